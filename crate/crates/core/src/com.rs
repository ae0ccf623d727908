//! Center-of-momentum reduction of the collision integral.
//!
//! For a Lorentz map `L` sending `p + q` to `(sqrt s, 0, ..., 0)`, the
//! post-collisional pair is the image under `L^{-1}` of
//! `(sqrt s / 2, +-rho omega / 2)`, the scattering angle is the angle between
//! `omega` and the spatial part `k` of `L(p - q)`, and the reduced kernel is the
//! Møller velocity. [`ComPair`] caches everything that depends only on
//! `(p, q)` so that sphere quadrature only pays for the `omega`-dependent part.

use serde::{Deserialize, Serialize};

use crate::config::PhysicsConfig;
use crate::error::{Error, Result};
use crate::kinematics::{check_dimension, invariants, FourMomentum, Momentum};
use crate::lorentz::{com_frame_residual, com_tolerance, SpacetimeMatrix};
use crate::observable::TestFunction;
use crate::operator::CrossSectionModel;

/// Per-`(p, q, omega)` outputs of the boost form of the reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComGeometry {
    pub k: Momentum,
    /// `None` when the pair has vanishing relative momentum.
    pub cos_theta: Option<f64>,
    pub p_prime: FourMomentum,
    pub q_prime: FourMomentum,
    pub moller: f64,
}

pub(crate) fn check_unit(omega: &Momentum, cfg: &PhysicsConfig) -> Result<()> {
    check_dimension(omega.dimension(), cfg.dimension)?;
    let norm = omega.norm();
    if (norm - 1.0).abs() > cfg.tol_algebra {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(())
}

fn require_com_frame(
    lambda: &SpacetimeMatrix,
    p: &FourMomentum,
    q: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<()> {
    check_dimension(lambda.dimension(), cfg.dimension)?;
    let residual = com_frame_residual(lambda, p, q, cfg)?;
    if residual > com_tolerance(p, q, cfg) {
        return Err(Error::NotComFrame { residual });
    }
    Ok(())
}

/// Spatial part of `L(p - q)`; its length is the relative momentum.
pub fn k_vector(
    lambda: &SpacetimeMatrix,
    p: &FourMomentum,
    q: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<Momentum> {
    require_com_frame(lambda, p, q, cfg)?;
    let diff: Vec<f64> = p
        .components()
        .iter()
        .zip(q.components())
        .map(|(a, b)| a - b)
        .collect();
    let mapped = lambda.apply(&diff)?;
    Ok(Momentum::new(&mapped[1..]))
}

/// Post-collisional pair for an arbitrary center-of-momentum map `lambda`:
///
/// `p'^mu = L^{mu 0} sqrt(s)/2 - L^{mu j} omega_j rho/2`,
/// `q'^mu = L^{mu 0} sqrt(s)/2 + L^{mu j} omega_j rho/2`,
///
/// with `L^{mu kappa} = -g^{mu lambda} Lambda^kappa_lambda`.
pub fn post_collision_com(
    lambda: &SpacetimeMatrix,
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<(FourMomentum, FourMomentum)> {
    check_unit(omega, cfg)?;
    require_com_frame(lambda, p, q, cfg)?;
    let inv = invariants(p, q, cfg)?;
    let half_root_s = 0.5 * inv.s.sqrt();
    let half_rho = 0.5 * inv.rho;
    let side = lambda.side();
    // tensor(mu, kappa) = -g^{mu mu} Lambda[kappa][mu]
    let tensor = |mu: usize, kappa: usize| {
        let sign = if mu == 0 { 1.0 } else { -1.0 };
        sign * lambda.get(kappa, mu)
    };
    let mut pp = vec![0.0; side];
    let mut qp = vec![0.0; side];
    for (mu, (a, b)) in pp.iter_mut().zip(qp.iter_mut()).enumerate() {
        let centre = tensor(mu, 0) * half_root_s;
        let mut spread = 0.0;
        for j in 0..cfg.dimension {
            spread += tensor(mu, j + 1) * omega[j];
        }
        spread *= half_rho;
        *a = centre - spread;
        *b = centre + spread;
    }
    Ok((
        FourMomentum::from_parts(pp[0], Momentum::new(&pp[1..])),
        FourMomentum::from_parts(qp[0], Momentum::new(&qp[1..])),
    ))
}

/// Closed form of the reduction for the boost to the center-of-momentum
/// frame.
pub fn post_collision_boost(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<(FourMomentum, FourMomentum)> {
    check_unit(omega, cfg)?;
    Ok(ComPair::new(p, q, cfg)?.post_collision(omega))
}

/// All boost-form outputs at one direction.
pub fn com_geometry(
    p: &FourMomentum,
    q: &FourMomentum,
    omega: &Momentum,
    cfg: &PhysicsConfig,
) -> Result<ComGeometry> {
    check_unit(omega, cfg)?;
    let pair = ComPair::new(p, q, cfg)?;
    let (p_prime, q_prime) = pair.post_collision(omega);
    Ok(ComGeometry {
        k: pair.k.clone(),
        cos_theta: pair.cos_theta(omega),
        p_prime,
        q_prime,
        moller: pair.moller,
    })
}

/// `v sigma(rho, cos theta) G(p, q, p', q')` with the boost-form post-collisional
/// pair. Zero on the diagonal `rho = 0`, where the Møller velocity vanishes.
pub fn com_integrand<S, G>(
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
    ComPair::new(p, q, cfg)?.integrand(omega, sigma, g)
}

/// Quantities of the boost-form reduction that depend only on `(p, q)`.
#[derive(Debug, Clone)]
pub struct ComPair {
    pub p: FourMomentum,
    pub q: FourMomentum,
    pub rho: f64,
    pub s: f64,
    pub moller: f64,
    pub k: Momentum,
    total: Momentum,
    total_energy: f64,
    root_s: f64,
    /// `(gamma - 1) / |p+q|^2 = 1 / ((p0 + q0 + sqrt s) sqrt s)`
    boost_shear: f64,
    degenerate: bool,
}

impl ComPair {
    pub fn new(p: &FourMomentum, q: &FourMomentum, cfg: &PhysicsConfig) -> Result<Self> {
        let inv = invariants(p, q, cfg)?;
        let total = &p.spatial + &q.spatial;
        let total_energy = p.energy + q.energy;
        let root_s = inv.s.sqrt();
        // gamma - 1 = |P|^2 / ((E + sqrt s) sqrt s) on the mass shell, so the
        // shear term stays finite (and vanishes) as P -> 0.
        let boost_shear = 1.0 / ((total_energy + root_s) * root_s);
        let diff = &p.spatial - &q.spatial;
        let k = total
            .scale(-(p.energy - q.energy) / root_s)
            .add_scaled(1.0, &diff)
            .add_scaled(boost_shear * total.dot(&diff), &total);
        Ok(ComPair {
            p: p.clone(),
            q: q.clone(),
            rho: inv.rho,
            s: inv.s,
            moller: inv.moller,
            k,
            total,
            total_energy,
            root_s,
            boost_shear,
            degenerate: inv.rho <= cfg.tol_algebra,
        })
    }

    /// Whether the relative momentum vanishes within tolerance.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn post_collision(&self, omega: &Momentum) -> (FourMomentum, FourMomentum) {
        let total_dot = self.total.dot(omega);
        let half_rho = 0.5 * self.rho;
        let n = omega.dimension();
        let mut pp = Momentum::zeros(n);
        let mut qp = Momentum::zeros(n);
        {
            let (a, b) = (pp.as_mut_slice(), qp.as_mut_slice());
            for i in 0..n {
                let centre = 0.5 * self.total[i];
                let spread = half_rho * (omega[i] + self.boost_shear * self.total[i] * total_dot);
                a[i] = centre + spread;
                b[i] = centre - spread;
            }
        }
        let energy_shift = self.rho / (2.0 * self.root_s) * total_dot;
        let half_energy = 0.5 * self.total_energy;
        (
            FourMomentum::from_parts(half_energy + energy_shift, pp),
            FourMomentum::from_parts(half_energy - energy_shift, qp),
        )
    }

    /// `cos theta = k.omega / |k|`, or `None` on the diagonal.
    pub fn cos_theta(&self, omega: &Momentum) -> Option<f64> {
        if self.degenerate {
            return None;
        }
        let norm = self.k.norm();
        Some((self.k.dot(omega) / norm).clamp(-1.0, 1.0))
    }

    /// Kernel weight `v_o sigma` and the outgoing pair at `omega`; `None` on
    /// the diagonal, where the weight vanishes.
    pub fn collide<S>(
        &self,
        omega: &Momentum,
        sigma: &S,
    ) -> Result<Option<(f64, FourMomentum, FourMomentum)>>
    where
        S: CrossSectionModel + ?Sized,
    {
        let Some(cos_theta) = self.cos_theta(omega) else {
            return Ok(None);
        };
        let (pp, qp) = self.post_collision(omega);
        let weight = self.moller * sigma.eval(self.rho, cos_theta)?;
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
