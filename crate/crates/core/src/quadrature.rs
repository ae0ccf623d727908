//! Product quadrature on the unit sphere `S^(n-1)` and on balls in `R^n`.
//!
//! Sphere rules are built recursively: a rule on `S^(n-1)` is a rule in the
//! polar coordinate `t = omega_n` (weight `(1 - t^2)^((n-3)/2)`) times a rule
//! on `S^(n-2)` for the remaining directions. The pole is the last coordinate
//! axis; [`SphereRule::integrate_aligned`] reflects the rule so that the pole
//! points along a requested axis.
//!
//! All sums use pairwise summation in node order, so a given rule always
//! produces bit-identical results.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::jacobi::GaussJacobi;
use gauss_quad::legendre::GaussLegendre;
use gauss_quad::FiniteAboveNegOneF64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kinematics::Momentum;

/// Surface area `2 pi^(n/2) / Gamma(n/2)` of `S^(n-1)`.
pub fn sphere_area(dimension: usize) -> f64 {
    let half = dimension as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// Volume `pi^(n/2) R^n / Gamma(n/2 + 1)` of the ball of radius `R` in `R^n`.
pub fn ball_volume(dimension: usize, radius: f64) -> f64 {
    let half = dimension as f64 / 2.0;
    PI.powf(half) * radius.powi(dimension as i32) / gamma(half + 1.0)
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Gauss–Legendre nodes and weights on `[lo, hi]`.
pub(crate) fn gauss_legendre(points: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(points).expect("points >= 1"));
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Gauss–Jacobi rule on `[-1, 1]` for the weight `(1 - t^2)^alpha`.
fn gauss_gegenbauer(points: usize, alpha: f64) -> Vec<(f64, f64)> {
    if alpha == 0.0 {
        return gauss_legendre(points, -1.0, 1.0);
    }
    let exponent = FiniteAboveNegOneF64::new(alpha).expect("alpha > -1");
    let rule = GaussJacobi::new(
        NonZeroUsize::new(points).expect("points >= 1"),
        exponent,
        exponent,
    );
    rule.iter().map(|(x, w)| (*x, *w)).collect()
}

fn check_sphere_request(dimension: usize, order: usize) -> Result<()> {
    if dimension < 2 {
        return Err(Error::InvalidQuadrature(format!(
            "sphere rules need n >= 2, got n = {dimension}"
        )));
    }
    if order < 1 {
        return Err(Error::InvalidQuadrature("rule order must be >= 1".into()));
    }
    Ok(())
}

/// Nodes on `S^(n-1)` with positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRule {
    pub dimension: usize,
    pub nodes: Vec<Momentum>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Deterministic product rule.
    ///
    /// * `n = 2`: `4 order` equally spaced angles.
    /// * `n = 3`: `order`-point Gauss–Legendre in `cos theta` times `2 order`
    ///   equally spaced azimuths.
    /// * `n >= 4`: `order`-point Gauss–Jacobi in the polar cosine with weight
    ///   `sin^(n-3)`, times the rule on `S^(n-2)`.
    pub fn product(dimension: usize, order: usize) -> Result<Self> {
        check_sphere_request(dimension, order)?;
        if dimension == 2 {
            return Ok(circle(4 * order));
        }
        let polar = gauss_gegenbauer(order, (dimension as f64 - 3.0) / 2.0);
        Ok(extend(&polar, &product_inner(dimension - 1, order)))
    }

    /// Product rule whose polar factor is split at the equator `t = 0`, with
    /// `order` Gauss–Legendre points on each hemisphere.
    ///
    /// Integrands with a kink across a great circle are smooth on each
    /// hemisphere once the rule is aligned with the circle's normal, which
    /// restores spectral convergence. For `n = 2` this is the plain circle
    /// rule. For `n >= 4` the hemispheres use Gauss–Legendre in the polar
    /// angle with the `sin^(n-2)` factor folded into the weights, so the
    /// weight sum is exact only up to (spectrally small) quadrature error.
    pub fn split(dimension: usize, order: usize) -> Result<Self> {
        check_sphere_request(dimension, order)?;
        if dimension == 2 {
            return Ok(circle(4 * order));
        }
        let half = order;
        let polar: Vec<(f64, f64)> = if dimension == 3 {
            let mut v = gauss_legendre(half, -1.0, 0.0);
            v.extend(gauss_legendre(half, 0.0, 1.0));
            v
        } else {
            // Polar angle theta on each half of [0, pi], weight sin^(n-2).
            let power = dimension as i32 - 2;
            let mut v: Vec<(f64, f64)> = gauss_legendre(half, PI / 2.0, PI)
                .into_iter()
                .chain(gauss_legendre(half, 0.0, PI / 2.0))
                .map(|(theta, w)| (theta.cos(), w * theta.sin().powi(power)))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        };
        Ok(extend(&polar, &product_inner(dimension - 1, order)))
    }

    /// Equal-weight rule of `count` i.i.d. uniform directions (normalized
    /// standard Gaussian vectors), reproducible from `seed`.
    pub fn monte_carlo(dimension: usize, count: usize, seed: u64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidQuadrature(format!(
                "sphere rules need n >= 2, got n = {dimension}"
            )));
        }
        if count < 1 {
            return Err(Error::InvalidQuadrature("sample count must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(count);
        while nodes.len() < count {
            let v: Vec<f64> = (0..dimension)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-300 {
                nodes.push(Momentum::from(
                    v.into_iter().map(|x| x / norm).collect::<Vec<_>>(),
                ));
            }
        }
        let w = sphere_area(dimension) / count as f64;
        Ok(SphereRule {
            dimension,
            nodes,
            weights: vec![w; count],
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn integrate<F>(&self, mut f: F) -> f64
    where
        F: FnMut(&Momentum) -> f64,
    {
        let values: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .collect();
        pairwise_sum(&values)
    }

    pub fn try_integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&Momentum) -> Result<f64>,
    {
        let mut values = Vec::with_capacity(self.len());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            values.push(w * f(x)?);
        }
        Ok(pairwise_sum(&values))
    }

    /// Integrate with the rule reflected so that its pole lies along `axis`.
    /// `None` (or a zero axis) integrates with the rule as built.
    pub fn try_integrate_aligned<F>(&self, axis: Option<&Momentum>, mut f: F) -> Result<f64>
    where
        F: FnMut(&Momentum) -> Result<f64>,
    {
        let Some(reflector) = axis.and_then(|a| Reflector::towards(a, self.dimension)) else {
            return self.try_integrate(f);
        };
        let mut values = Vec::with_capacity(self.len());
        let mut buf = Momentum::zeros(self.dimension);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            reflector.apply(x, &mut buf);
            values.push(w * f(&buf)?);
        }
        Ok(pairwise_sum(&values))
    }

    /// Visit `(node, weight)` pairs of the rule reflected so that its pole
    /// lies along `axis`.
    pub fn try_for_each_aligned<F>(&self, axis: Option<&Momentum>, mut f: F) -> Result<()>
    where
        F: FnMut(&Momentum, f64) -> Result<()>,
    {
        match axis.and_then(|a| Reflector::towards(a, self.dimension)) {
            None => {
                for (x, w) in self.nodes.iter().zip(&self.weights) {
                    f(x, *w)?;
                }
            }
            Some(reflector) => {
                let mut buf = Momentum::zeros(self.dimension);
                for (x, w) in self.nodes.iter().zip(&self.weights) {
                    reflector.apply(x, &mut buf);
                    f(&buf, *w)?;
                }
            }
        }
        Ok(())
    }

    /// Copy of the rule reflected so that its pole lies along `axis`.
    pub fn aligned(&self, axis: &Momentum) -> SphereRule {
        let Some(reflector) = Reflector::towards(axis, self.dimension) else {
            return self.clone();
        };
        let nodes = self
            .nodes
            .iter()
            .map(|x| {
                let mut out = Momentum::zeros(self.dimension);
                reflector.apply(x, &mut out);
                out
            })
            .collect();
        SphereRule {
            dimension: self.dimension,
            nodes,
            weights: self.weights.clone(),
        }
    }
}

fn circle(count: usize) -> SphereRule {
    let w = 2.0 * PI / count as f64;
    let nodes = (0..count)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / count as f64;
            Momentum::new(&[phi.cos(), phi.sin()])
        })
        .collect();
    SphereRule {
        dimension: 2,
        nodes,
        weights: vec![w; count],
    }
}

/// Rule on `S^(n-1)` used as a factor: the circle gets `2 order` points.
fn product_inner(dimension: usize, order: usize) -> SphereRule {
    if dimension == 2 {
        return circle(2 * order);
    }
    let polar = gauss_gegenbauer(order, (dimension as f64 - 3.0) / 2.0);
    extend(&polar, &product_inner(dimension - 1, order))
}

/// `omega = (sqrt(1 - t^2) omega', t)`.
fn extend(polar: &[(f64, f64)], sub: &SphereRule) -> SphereRule {
    let dimension = sub.dimension + 1;
    let mut nodes = Vec::with_capacity(polar.len() * sub.len());
    let mut weights = Vec::with_capacity(polar.len() * sub.len());
    for &(t, wt) in polar {
        let radial = (1.0 - t * t).max(0.0).sqrt();
        for (node, w) in sub.nodes.iter().zip(&sub.weights) {
            let mut v: Vec<f64> = node.as_slice().iter().map(|x| radial * x).collect();
            v.push(t);
            nodes.push(Momentum::from(v));
            weights.push(wt * w);
        }
    }
    SphereRule {
        dimension,
        nodes,
        weights,
    }
}

/// Householder reflection exchanging the last coordinate axis with a unit
/// vector.
struct Reflector {
    v: Momentum,
}

impl Reflector {
    fn towards(axis: &Momentum, dimension: usize) -> Option<Self> {
        let norm = axis.norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        let mut v = axis.scale(-1.0 / norm);
        v.as_mut_slice()[dimension - 1] += 1.0;
        let vn = v.norm();
        if vn < 1e-14 {
            return None;
        }
        Some(Reflector {
            v: v.scale(1.0 / vn),
        })
    }

    fn apply(&self, x: &Momentum, out: &mut Momentum) {
        let proj = 2.0 * self.v.dot(x);
        for ((o, xi), vi) in out
            .as_mut_slice()
            .iter_mut()
            .zip(x.as_slice())
            .zip(self.v.as_slice())
        {
            *o = xi - proj * vi;
        }
    }
}

/// Radial Gauss–Legendre (weight `r^(n-1)`) composed with a sphere rule,
/// translated to `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRule {
    pub dimension: usize,
    pub radius: f64,
    pub center: Momentum,
    pub nodes: Vec<Momentum>,
    pub weights: Vec<f64>,
    pub radial_order: usize,
    pub sphere_order: usize,
    /// Radial factor: `(r, w)` with plain Gauss–Legendre weights (no `r^(n-1)`).
    pub radial: Vec<(f64, f64)>,
    /// Angular factor. Node `i * sphere.len() + j` is `center + r_i omega_j`.
    pub sphere: SphereRule,
}

impl BallRule {
    pub fn new(
        dimension: usize,
        radius: f64,
        radial_order: usize,
        sphere_order: usize,
    ) -> Result<Self> {
        Self::composite(dimension, radius, 1, radial_order, sphere_order)
    }

    /// Radial factor made of `panels` equal-width Gauss–Legendre panels with
    /// `per_panel` points each.
    pub fn composite(
        dimension: usize,
        radius: f64,
        panels: usize,
        per_panel: usize,
        sphere_order: usize,
    ) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidQuadrature(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if panels < 1 || per_panel < 1 {
            return Err(Error::InvalidQuadrature("radial order must be >= 1".into()));
        }
        let sphere = SphereRule::product(dimension, sphere_order)?;
        let width = radius / panels as f64;
        let radial: Vec<(f64, f64)> = (0..panels)
            .flat_map(|k| gauss_legendre(per_panel, k as f64 * width, (k + 1) as f64 * width))
            .collect();
        let mut nodes = Vec::with_capacity(radial.len() * sphere.len());
        let mut weights = Vec::with_capacity(radial.len() * sphere.len());
        for &(r, wr) in &radial {
            let wr = wr * r.powi(dimension as i32 - 1);
            for (omega, ws) in sphere.nodes.iter().zip(&sphere.weights) {
                nodes.push(omega.scale(r));
                weights.push(wr * ws);
            }
        }
        Ok(BallRule {
            dimension,
            radius,
            center: Momentum::zeros(dimension),
            nodes,
            weights,
            radial_order: panels * per_panel,
            sphere_order,
            radial,
            sphere,
        })
    }

    /// Same rule centered at `center`.
    pub fn translated(mut self, center: &Momentum) -> Self {
        let shift = center - &self.center;
        for node in &mut self.nodes {
            *node = node.add_scaled(1.0, &shift);
        }
        self.center = center.clone();
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn integrate<F>(&self, mut f: F) -> f64
    where
        F: FnMut(&Momentum) -> f64,
    {
        let values: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .collect();
        pairwise_sum(&values)
    }

    pub fn try_integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&Momentum) -> Result<f64>,
    {
        let mut values = Vec::with_capacity(self.len());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            values.push(w * f(x)?);
        }
        Ok(pairwise_sum(&values))
    }
}
