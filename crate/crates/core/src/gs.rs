//! Glassey–Strauss reduction of the collision integral.
//!
//! The post-collisional pair is parameterized as `p' = p + a omega`,
//! `q' = q - a omega`, where `a = 2 D2 / D1` is the nonzero root of the
//! quadratic `4 D1 r^2 - 8 D2 r` obtained from the energy delta, with
//!
//! ```text
//! D1 = (p0 + q0)^2 - (omega.(p + q))^2
//! D2 = (p0 + q0) omega.(p0 q - q0 p)
//! ```
//!
//! The reduced kernel is `B_n = B A^(n-3)`, which reduces to `B` for `n = 3`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::com::check_unit;
use crate::config::PhysicsConfig;
use crate::error::{Error, Result};
use crate::kinematics::{check_dimension, invariants, FourMomentum, Momentum};
use crate::observable::TestFunction;
use crate::operator::CrossSectionModel;

/// Per-`(p, q, omega)` outputs of the reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsGeometry {
    pub d1: f64,
    pub d2: f64,
    pub a: f64,
    pub n0: f64,
    pub p_prime: FourMomentum,
    pub q_prime: FourMomentum,
    /// `None` when the pair has vanishing relative momentum.
    pub cos_theta: Option<f64>,
    pub kernel_b: f64,
    pub kernel_a: f64,
    pub kernel_bn: f64,
}

/// `(D1, D2)`.
pub fn quadratic_coeffs(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<(f64, f64)> {
    check_unit(omega, cfg)?;
    let pair = GsPair::new(p, q, cfg)?;
    let at = pair.at(omega);
    Ok((at.d1, at.d2))
}

pub fn post_collision_gs(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<GsGeometry> {
    check_unit(omega, cfg)?;
    Ok(GsPair::new(p, q, cfg)?.geometry(omega))
}

/// `(B, A, B_n)`. On the diagonal `rho = 0` the factor `A` is `0/0`; it is
/// reported as 0 there and `B_n` is defined as 0 for `n != 3`.
pub fn kernels(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<(f64, f64, f64)> {
    check_unit(omega, cfg)?;
    let pair = GsPair::new(p, q, cfg)?;
    let at = pair.at(omega);
    Ok((at.kernel_b, at.kernel_a, at.kernel_bn))
}

/// `cos theta = 1 - (8 / rho^2) (omega.(p0 q - q0 p))^2 / D1`
pub fn gs_cosine(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<f64> {
    check_unit(omega, cfg)?;
    let pair = GsPair::new(p, q, cfg)?;
    pair.at(omega)
        .cos_theta
        .ok_or(Error::DegenerateAngle { rho: pair.rho })
}

/// `s sigma(rho, cos theta) B_n / (p0 q0) G(p, q, p', q')`
pub fn gs_integrand<S, G>(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    sigma: &S,
    g: &G,
    cfg: &PhysicsConfig,
) -> Result<f64>
where
    S: CrossSectionModel + ?Sized,
    G: TestFunction + ?Sized,
{
    check_unit(omega, cfg)?;
    GsPair::new(p, q, cfg)?.integrand(omega, sigma, g)
}

/// Closed-form Jacobian `p'0 q'0 / (p0 q0)` of `(p, q) -> (p', q')` at fixed
/// `omega`.
pub fn jacobian_prepost(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<f64> {
    let geom = post_collision_gs(p, q, omega, cfg)?;
    Ok(geom.p_prime.energy * geom.q_prime.energy / (p.energy * q.energy))
}

/// Absolute determinant of the `2n x 2n` Jacobian of `(p, q) -> (p', q')` at
/// fixed `omega`, by central differences with step `1e-5 max(1, |x_i|)`.
pub fn jacobian_finite_difference(
    p: &Momentum,
    q: &Momentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<f64> {
    check_unit(omega, cfg)?;
    check_dimension(p.dimension(), cfg.dimension)?;
    check_dimension(q.dimension(), cfg.dimension)?;
    let n = cfg.dimension;
    let c = cfg.light_speed;
    let map = |x: &[f64]| -> Vec<f64> {
        let pp = crate::kinematics::lift_unchecked(&Momentum::new(&x[..n]), c);
        let qq = crate::kinematics::lift_unchecked(&Momentum::new(&x[n..]), c);
        let (p_out, q_out) = GsPair::new_unchecked(&pp, &qq, cfg).post_collision(omega);
        let mut out = p_out.spatial.to_vec();
        out.extend_from_slice(q_out.spatial.as_slice());
        out
    };
    let mut x: Vec<f64> = p.to_vec();
    x.extend_from_slice(q.as_slice());
    let mut jac = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for col in 0..2 * n {
        let h = 1e-5 * x[col].abs().max(1.0);
        let orig = x[col];
        x[col] = orig + h;
        let plus = map(&x);
        x[col] = orig - h;
        let minus = map(&x);
        x[col] = orig;
        for row in 0..2 * n {
            jac[(row, col)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    Ok(jac.determinant().abs())
}

/// Values of the reduction at one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsPoint {
    pub d1: f64,
    pub d2: f64,
    pub a: f64,
    pub n0: f64,
    pub cos_theta: Option<f64>,
    pub kernel_b: f64,
    pub kernel_a: f64,
    pub kernel_bn: f64,
}

/// Quantities of the reduction that depend only on `(p, q)`.
#[derive(Debug, Clone)]
pub struct GsPair {
    pub p: FourMomentum,
    pub q: FourMomentum,
    pub rho: f64,
    pub s: f64,
    total: Momentum,
    total_energy: f64,
    /// `p0 q - q0 p`
    exchange: Momentum,
    /// `p/p0 - q/q0`
    velocity_gap: Momentum,
    dimension: usize,
    light_speed: f64,
    degenerate: bool,
}

impl GsPair {
    pub fn new(p: &FourMomentum, q: &FourMomentum, cfg: &PhysicsConfig) -> Result<Self> {
        invariants(p, q, cfg)?;
        Ok(Self::new_unchecked(p, q, cfg))
    }

    fn new_unchecked(p: &FourMomentum, q: &FourMomentum, cfg: &PhysicsConfig) -> Self {
        let rho = crate::kinematics::relative_momentum(p, q);
        let s = 2.0 * (p.energy * q.energy - p.spatial.dot(&q.spatial) + cfg.c2());
        GsPair {
            p: p.clone(),
            q: q.clone(),
            rho,
            s,
            total: &p.spatial + &q.spatial,
            total_energy: p.energy + q.energy,
            exchange: q.spatial.scale(p.energy).add_scaled(-q.energy, &p.spatial),
            velocity_gap: p
                .spatial
                .scale(1.0 / p.energy)
                .add_scaled(-1.0 / q.energy, &q.spatial),
            dimension: cfg.dimension,
            light_speed: cfg.light_speed,
            degenerate: rho <= cfg.tol_algebra,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Unit vector across which `|omega.(p/p0 - q/q0)|` has its kink, or `None`
    /// when `p/p0 = q/q0`.
    pub fn kink_axis(&self) -> Option<Momentum> {
        let norm = self.velocity_gap.norm();
        (norm > 0.0).then(|| self.velocity_gap.scale(1.0 / norm))
    }

    pub fn at(&self, omega: &Momentum) -> GsPoint {
        let e = self.total_energy;
        let total_dot = self.total.dot(omega);
        let exchange_dot = self.exchange.dot(omega);
        let d1 = e * e - total_dot * total_dot;
        let d2 = e * exchange_dot;
        let a = 2.0 * d2 / d1;
        let n0 = 2.0 * total_dot * exchange_dot / d1;
        let pq0 = self.p.energy * self.q.energy;
        let gap = self.velocity_gap.dot(omega).abs();
        let kernel_b = self.light_speed * e * e * pq0 * gap / (d1 * d1);
        let (cos_theta, kernel_a) = if self.degenerate {
            (None, 0.0)
        } else {
            let rho2 = self.rho * self.rho;
            let cos = 1.0 - 8.0 * exchange_dot * exchange_dot / (d1 * rho2);
            (
                Some(cos.clamp(-1.0, 1.0)),
                e * pq0 * gap / d1 * 4.0 / self.rho,
            )
        };
        let kernel_bn = match self.dimension {
            3 => kernel_b,
            _ if self.degenerate => 0.0,
            // B A^(n-3) = c E |D2|^(n-2) 4^(n-3) / (D1^(n-1) rho^(n-3)) with
            // |D2| = E p0 q0 |omega.(p/p0 - q/q0)|; finite for n = 2 where
            // B and A vanish together.
            n => {
                let abs_d2 = e * pq0 * gap;
                let k = n as i32;
                self.light_speed * e * abs_d2.powi(k - 2) * 4f64.powi(k - 3)
                    / (d1.powi(k - 1) * self.rho.powi(k - 3))
            }
        };
        GsPoint {
            d1,
            d2,
            a,
            n0,
            cos_theta,
            kernel_b,
            kernel_a,
            kernel_bn,
        }
    }

    pub fn post_collision(&self, omega: &Momentum) -> (FourMomentum, FourMomentum) {
        let at = self.at(omega);
        self.post_collision_at(omega, &at)
    }

    fn post_collision_at(&self, omega: &Momentum, at: &GsPoint) -> (FourMomentum, FourMomentum) {
        (
            FourMomentum::from_parts(
                self.p.energy + at.n0,
                self.p.spatial.add_scaled(at.a, omega),
            ),
            FourMomentum::from_parts(
                self.q.energy - at.n0,
                self.q.spatial.add_scaled(-at.a, omega),
            ),
        )
    }

    pub fn geometry(&self, omega: &Momentum) -> GsGeometry {
        let at = self.at(omega);
        let (p_prime, q_prime) = self.post_collision_at(omega, &at);
        GsGeometry {
            d1: at.d1,
            d2: at.d2,
            a: at.a,
            n0: at.n0,
            p_prime,
            q_prime,
            cos_theta: at.cos_theta,
            kernel_b: at.kernel_b,
            kernel_a: at.kernel_a,
            kernel_bn: at.kernel_bn,
        }
    }

    /// `(2/c) (rho/2)^(n-3) B_n`, written as `2^(n-2) (p0+q0) |D2|^(n-2) / D1^(n-1)`
    /// so that it stays finite on the diagonal for `n = 2`.
    pub fn raw_measure(&self, omega: &Momentum) -> f64 {
        let at = self.at(omega);
        let e = self.total_energy;
        let abs_d2 = at.d2.abs();
        let k = self.dimension as i32;
        2f64.powi(k - 2) * e * abs_d2.powi(k - 2) / at.d1.powi(k - 1)
    }

    /// Kernel weight `s sigma B_n / (p0 q0)` and the outgoing pair at `omega`;
    /// `None` on the diagonal, where the weight vanishes.
    pub fn collide<S>(
        &self,
        omega: &Momentum,
        sigma: &S,
    ) -> Result<Option<(f64, FourMomentum, FourMomentum)>>
    where
        S: CrossSectionModel + ?Sized,
    {
        let at = self.at(omega);
        let Some(cos_theta) = at.cos_theta else {
            return Ok(None);
        };
        let (pp, qp) = self.post_collision_at(omega, &at);
        let weight = self.s * sigma.eval(self.rho, cos_theta)? * at.kernel_bn
            / (self.p.energy * self.q.energy);
        Ok(Some((weight, pp, qp)))
    }

    pub fn integrand<S, G>(&self, omega: &Momentum, sigma: &S, g: &G) -> Result<f64>
    where
        S: CrossSectionModel + ?Sized,
        G: TestFunction + ?Sized,
    {
        Ok(match self.collide(omega, sigma)? {
            Some((weight, pp, qp)) => weight * g.eval(&self.p, &self.q, &pp, &qp),
            None => 0.0,
        })
    }
}
