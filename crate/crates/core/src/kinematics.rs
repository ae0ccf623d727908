//! Momenta, on-shell four-momenta and the scalar collision invariants.
//!
//! Conventions: the metric is `diag(-1, 1, ..., 1)`, the energy of a
//! particle with spatial momentum `p` is `p0 = sqrt(c^2 + |p|^2)`, and all
//! formulas keep the speed of light `c` explicit.

use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::config::PhysicsConfig;
use crate::error::{Error, Result};

pub(crate) type Components = SmallVec<[f64; 4]>;

/// Spatial momentum in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Momentum(Components);

impl Momentum {
    pub fn new(components: &[f64]) -> Self {
        Momentum(Components::from_slice(components))
    }

    pub fn zeros(dimension: usize) -> Self {
        Momentum(smallvec::smallvec![0.0; dimension])
    }

    /// Unit vector along coordinate axis `axis`.
    pub fn unit(dimension: usize, axis: usize) -> Self {
        let mut m = Self::zeros(dimension);
        m.0[axis] = 1.0;
        m
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.to_vec()
    }

    pub fn dot(&self, other: &Momentum) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, factor: f64) -> Momentum {
        Momentum(self.0.iter().map(|x| x * factor).collect())
    }

    /// `self + factor * other`
    pub fn add_scaled(&self, factor: f64, other: &Momentum) -> Momentum {
        Momentum(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &Momentum) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for Momentum {
    fn from(v: Vec<f64>) -> Self {
        Momentum(Components::from_vec(v))
    }
}

impl Index<usize> for Momentum {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Momentum {
    type Output = Momentum;
    fn add(self, rhs: &Momentum) -> Momentum {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &Momentum {
    type Output = Momentum;
    fn sub(self, rhs: &Momentum) -> Momentum {
        self.add_scaled(-1.0, rhs)
    }
}

impl Neg for &Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        self.scale(-1.0)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Energy-momentum vector `(p0, p)`.
///
/// Values built with [`lift`] are on the mass shell by construction.
/// Post-collisional momenta carry the energy produced by the collision
/// formula itself; their mass-shell residual is checked in tests rather than
/// forced by re-lifting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourMomentum {
    pub energy: f64,
    pub spatial: Momentum,
}

impl FourMomentum {
    pub fn from_parts(energy: f64, spatial: Momentum) -> Self {
        FourMomentum { energy, spatial }
    }

    pub fn dimension(&self) -> usize {
        self.spatial.dimension()
    }

    /// Components `(p0, p1, ..., pn)`.
    pub fn components(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.dimension());
        v.push(self.energy);
        v.extend_from_slice(self.spatial.as_slice());
        v
    }

    /// `|p0 - sqrt(c^2 + |p|^2)|`
    pub fn mass_shell_residual(&self, light_speed: f64) -> f64 {
        (self.energy - (light_speed * light_speed + self.spatial.norm_sq()).sqrt()).abs()
    }

    /// Largest componentwise difference over all `1 + n` components.
    pub fn max_abs_diff(&self, other: &FourMomentum) -> f64 {
        (self.energy - other.energy)
            .abs()
            .max(self.spatial.max_abs_diff(&other.spatial))
    }
}

/// Put a spatial momentum on the mass shell.
pub fn lift(p: &Momentum, cfg: &PhysicsConfig) -> Result<FourMomentum> {
    check_dimension(p.dimension(), cfg.dimension)?;
    Ok(lift_unchecked(p, cfg.light_speed))
}

pub(crate) fn lift_unchecked(p: &Momentum, light_speed: f64) -> FourMomentum {
    let energy = (light_speed * light_speed + p.norm_sq()).sqrt();
    FourMomentum::from_parts(energy, p.clone())
}

pub(crate) fn check_dimension(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Minkowski product `-a0 b0 + a.b`.
pub fn lorentz_inner(a: &FourMomentum, b: &FourMomentum) -> Result<f64> {
    check_dimension(b.dimension(), a.dimension())?;
    Ok(-a.energy * b.energy + a.spatial.dot(&b.spatial))
}

/// Relative momentum, Mandelstam `s` and Møller velocity of a colliding pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionInvariants {
    pub rho: f64,
    pub s: f64,
    pub moller: f64,
}

/// `rho = sqrt(2(p0 q0 - p.q - c^2))`, `s = 2(p0 q0 - p.q + c^2)` and
/// `v = (c/4) rho sqrt(s) / (p0 q0)`.
///
/// The radicand of `rho` is first checked in the form written above; `rho`
/// itself is then evaluated as `sqrt(|p-q|^2 - (p0-q0)^2)` with
/// `p0 - q0 = (p-q).(p+q)/(p0+q0)`, which is the same quantity on the mass
/// shell but does not lose digits when `p` is close to `q`.
pub fn invariants(
    p: &FourMomentum,
    q: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<CollisionInvariants> {
    check_dimension(p.dimension(), cfg.dimension)?;
    check_dimension(q.dimension(), cfg.dimension)?;
    let c2 = cfg.c2();
    let pq = p.spatial.dot(&q.spatial);
    let radicand = 2.0 * (p.energy * q.energy - pq - c2);
    let scale = 1.0_f64.max(p.energy * q.energy);
    if radicand < -cfg.tol_algebra * scale {
        return Err(Error::OffMassShell { radicand });
    }
    let rho = relative_momentum(p, q);
    let s = 2.0 * (p.energy * q.energy - pq + c2);
    let moller = 0.25 * cfg.light_speed * rho * s.sqrt() / (p.energy * q.energy);
    Ok(CollisionInvariants { rho, s, moller })
}

/// Relative momentum of an on-shell pair without the radicand check.
pub(crate) fn relative_momentum(p: &FourMomentum, q: &FourMomentum) -> f64 {
    let sp = p.spatial.as_slice();
    let sq = q.spatial.as_slice();
    let mut diff_sq = 0.0;
    let mut diff_dot_sum = 0.0;
    for (a, b) in sp.iter().zip(sq) {
        diff_sq += (a - b) * (a - b);
        diff_dot_sum += (a - b) * (a + b);
    }
    let de = diff_dot_sum / (p.energy + q.energy);
    (diff_sq - de * de).max(0.0).sqrt()
}

/// Cosine of the scattering angle,
/// `[-(p0-q0)(p0'-q0') + (p-q).(p'-q')] / rho^2`, clamped to `[-1, 1]`.
///
/// The quadruple is expected to conserve total four-momentum.
pub fn scattering_cosine(
    p: &FourMomentum,
    q: &FourMomentum,
    p_prime: &FourMomentum,
    q_prime: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<f64> {
    for m in [p, q, p_prime, q_prime] {
        check_dimension(m.dimension(), cfg.dimension)?;
    }
    let rho = relative_momentum(p, q);
    if rho <= cfg.tol_algebra {
        return Err(Error::DegenerateAngle { rho });
    }
    let rho2 = rho * rho;
    let mut spatial = 0.0;
    for i in 0..cfg.dimension {
        spatial += (p.spatial[i] - q.spatial[i]) * (p_prime.spatial[i] - q_prime.spatial[i]);
    }
    let numerator = -(p.energy - q.energy) * (p_prime.energy - q_prime.energy) + spatial;
    let value = numerator / rho2;
    // Round-off in the numerator is of order eps * (p0 + q0)^2.
    let total = p.energy + q.energy;
    let slack = cfg.tol_algebra * (1.0 + total * total / rho2);
    if value.abs() > 1.0 + slack || !value.is_finite() {
        return Err(Error::CosineOutOfRange { value });
    }
    Ok(value.clamp(-1.0, 1.0))
}
