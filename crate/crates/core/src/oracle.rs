//! Brute-force check of both reductions against the raw constrained integral
//!
//! ```text
//! I = int dp' dq' / (p'0 q'0)  s sigma(rho, theta)  delta(p'0 + q'0 - p0 - q0)
//!       delta^n(p' + q' - p - q)  G(p, q, p', q')
//! ```
//!
//! The spatial delta is removed exactly (`q' = p + q - p'`); the energy delta
//! is replaced by a unit-mass Gaussian of width `eps`, and the `eps -> 0`
//! limit is extrapolated from a short schedule. The scattering angle is taken
//! from its defining invariant formula on `(p', q')`; nothing here uses either
//! reduction's post-collisional map.
//!
//! Exact reduced values are
//!
//! ```text
//! I = 2^(2-n) int rho^(n-2) sqrt(s) sigma G domega                         (COM)
//!   = int 2^(n-2) E |D2|^(n-2) / D1^(n-1)  s sigma G domega                (GS)
//! ```

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::com::ComPair;
use crate::config::PhysicsConfig;
use crate::error::{Error, Result};
use crate::gs::GsPair;
use crate::kinematics::{check_dimension, invariants, lift_unchecked, FourMomentum, Momentum};
use crate::observable::TestFunction;
use crate::operator::{CrossSectionModel, Representation};
use crate::quadrature::{pairwise_sum, BallRule};

/// Mollifier widths, as fractions of the energy scale
/// `min(c, p0 + q0 - 2 sqrt(c^2 + |p+q|^2/4))`.
pub const DEFAULT_EPSILONS: [f64; 3] = [0.08, 0.04, 0.02];

/// Tolerance on the discretized mollifier mass along every ray.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Coverage demanded beyond the energy shell, in mollifier widths.
const COVERAGE_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Angular order of the `p'`-ball around `(p + q)/2`.
    pub angular_order: usize,
    /// Gauss–Legendre points per radial panel.
    pub points_per_panel: usize,
    /// Angular order of the reduced sphere integrals.
    pub reduced_order: usize,
    /// Widths relative to the energy scale, strictly decreasing.
    pub epsilons: Vec<f64>,
}

impl OracleSettings {
    pub fn for_dimension(dimension: usize) -> Self {
        OracleSettings {
            angular_order: if dimension == 2 { 64 } else { 16 },
            points_per_panel: 8,
            reduced_order: if dimension == 2 { 64 } else { 32 },
            epsilons: DEFAULT_EPSILONS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `(eps, mollified I)` in schedule order.
    pub raw_estimates: Vec<(f64, f64)>,
    /// `None` when the limit is not defined by the mollified sequence (see
    /// `note`).
    pub extrapolated: Option<f64>,
    pub com_value: f64,
    pub gs_value: f64,
    pub rel_err_com: Option<f64>,
    pub rel_err_gs: Option<f64>,
    /// `|com_value - gs_value| / max(|com_value|, 1e-12)`
    pub reduced_rel_diff: f64,
    /// Energy scale multiplying the relative widths.
    pub epsilon_scale: f64,
    /// Largest per-ray mollifier mass error over all runs.
    pub max_mass_error: f64,
    /// `rho` vanishes within tolerance.
    pub degenerate: bool,
    pub note: Option<String>,
}

/// `(p0 - q0)(p'0 - q'0)` and spatial parts combined into the invariant
/// scattering cosine, divided by the pre-collision `rho^2` and clamped.
fn defining_cosine(
    p: &FourMomentum,
    q: &FourMomentum,
    pp: &FourMomentum,
    qp: &FourMomentum,
    rho2: f64,
) -> f64 {
    let d = &p.spatial - &q.spatial;
    let dp = &pp.spatial - &qp.spatial;
    let num = -(p.energy - q.energy) * (pp.energy - qp.energy) + d.dot(&dp);
    (num / rho2).clamp(-1.0, 1.0)
}

/// Gap `p0 + q0 - min_{p'} (p'0 + q'0)` between the collision energy and the
/// bottom of the energy surface at fixed total momentum: `rho^2 / (E + E_min)`.
pub fn energy_gap(p: &FourMomentum, q: &FourMomentum, cfg: &PhysicsConfig) -> f64 {
    let total = &p.spatial + &q.spatial;
    let e = p.energy + q.energy;
    let e_min = (4.0 * cfg.c2() + total.norm_sq()).sqrt();
    let rho = crate::kinematics::relative_momentum(p, q);
    rho * rho / (e + e_min)
}

/// Radial ball around `(p + q)/2` on which `E(p') = p'0 + (p+q-p')0` exceeds
/// the collision energy by at least `8 eps` on every ray, with radial panels
/// narrow enough to resolve the mollifier.
pub fn oracle_ball(
    p: &FourMomentum,
    q: &FourMomentum,
    eps: f64,
    settings: &OracleSettings,
    cfg: &PhysicsConfig,
) -> Result<BallRule> {
    let n = cfg.dimension;
    let centre = (&p.spatial + &q.spatial).scale(0.5);
    let e0 = p.energy + q.energy;
    let target = e0 + 1.25 * COVERAGE_WIDTHS * eps;
    let sphere = crate::quadrature::SphereRule::product(n, settings.angular_order)?;
    let c = cfg.light_speed;
    let energy = |x: &Momentum| {
        let qx = (&p.spatial + &q.spatial).add_scaled(-1.0, x);
        lift_unchecked(x, c).energy + lift_unchecked(&qx, c).energy
    };
    let mut radius: f64 = 0.0;
    let mut slope: f64 = 0.0;
    for omega in &sphere.nodes {
        let mut hi = 1.0f64.max(2.0 * p.spatial.norm() + 2.0 * q.spatial.norm());
        while energy(&centre.add_scaled(hi, omega)) < target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if energy(&centre.add_scaled(mid, omega)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        radius = radius.max(hi);
    }
    for omega in &sphere.nodes {
        let x = centre.add_scaled(radius, omega);
        let qx = (&p.spatial + &q.spatial).add_scaled(-1.0, &x);
        slope = slope.max(energy_slope(
            &lift_unchecked(&x, c),
            &lift_unchecked(&qx, c),
            omega,
        ));
    }
    // E is convex along each ray, so its slope is largest at the rim; a panel
    // then spans at most eps / 2 in energy.
    let width = 0.5 * eps / slope.max(1e-300);
    let panels = ((radius / width).ceil() as usize).max(1);
    Ok(BallRule::composite(
        n,
        radius,
        panels,
        settings.points_per_panel,
        settings.angular_order,
    )?
    .translated(&centre))
}

/// `dE/dr = omega.(p'/p'0 - q'/q'0)` along a ray `p' = centre + r omega`.
fn energy_slope(pp: &FourMomentum, qp: &FourMomentum, omega: &Momentum) -> f64 {
    omega.dot(&pp.spatial) / pp.energy - omega.dot(&qp.spatial) / qp.energy
}

/// Mollified integral and the worst per-ray mass error of the discretized
/// Gaussian, `|sum_r w_r delta_eps(E(r) - E0) E'(r) - exact|`.
pub fn mollified_i_with_mass<S, G>(
    p: &FourMomentum,
    q: &FourMomentum,
    sigma: &S,
    g: &G,
    eps: f64,
    inner: &BallRule,
    cfg: &PhysicsConfig,
) -> Result<(f64, f64)>
where
    S: CrossSectionModel + ?Sized,
    G: TestFunction + ?Sized,
{
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "mollifier width must be positive, got {eps}"
        )));
    }
    check_dimension(inner.dimension, cfg.dimension)?;
    let inv = invariants(p, q, cfg)?;
    let rho2 = inv.rho * inv.rho;
    let c = cfg.light_speed;
    let e0 = p.energy + q.energy;
    let total = &p.spatial + &q.spatial;
    let norm = 1.0 / ((2.0 * PI).sqrt() * eps);
    let cutoff = 12.0 * eps;
    let power = cfg.dimension as i32 - 1;
    let energy_at = |x: &Momentum| {
        let pp = lift_unchecked(x, c);
        let qp = lift_unchecked(&total.add_scaled(-1.0, x), c);
        (pp.energy + qp.energy, pp, qp)
    };
    let mut values = Vec::new();
    let mut mass_error: f64 = 0.0;
    let mut mass_terms = Vec::with_capacity(inner.radial.len());
    for (omega, w_omega) in inner.sphere.nodes.iter().zip(&inner.sphere.weights) {
        let (e_rim, _, _) = energy_at(&inner.center.add_scaled(inner.radius, omega));
        let excess = e_rim - e0;
        if excess < COVERAGE_WIDTHS * eps {
            return Err(Error::BallTooSmall {
                radius: inner.radius,
                excess: excess / eps,
            });
        }
        let (e_centre, _, _) = energy_at(&inner.center);
        mass_terms.clear();
        for &(r, wr) in &inner.radial {
            let x = inner.center.add_scaled(r, omega);
            let (e, pp, qp) = energy_at(&x);
            let u = e - e0;
            if u.abs() > cutoff {
                continue;
            }
            let delta = norm * (-0.5 * (u / eps).powi(2)).exp();
            mass_terms.push(wr * delta * energy_slope(&pp, &qp, omega));
            let cos = if rho2 > 0.0 {
                defining_cosine(p, q, &pp, &qp, rho2)
            } else {
                1.0
            };
            let sig = sigma.eval(inv.rho, cos)?;
            let value = w_omega * wr * r.powi(power) * inv.s * sig * delta
                / (pp.energy * qp.energy)
                * g.eval(p, q, &pp, &qp);
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    value,
                    location: format!("p' = {:?}", x.as_slice()),
                });
            }
            values.push(value);
        }
        let exact =
            0.5 * (erf((e_rim - e0) / (SQRT_2 * eps)) - erf((e_centre - e0) / (SQRT_2 * eps)));
        mass_error = mass_error.max((pairwise_sum(&mass_terms) - exact).abs());
    }
    Ok((pairwise_sum(&values), mass_error))
}

/// Mollified integral at width `eps` on `inner`, a ball around `(p + q)/2`.
///
/// Fails with [`Error::BallTooSmall`] unless the energy exceeds `p0 + q0` by
/// `8 eps` on the rim of every ray, and with [`Error::InvalidQuadrature`] if
/// the discretized mollifier misses unit mass by more than `1e-6` on a ray.
pub fn mollified_i<S, G>(
    p: &FourMomentum,
    q: &FourMomentum,
    sigma: &S,
    g: &G,
    eps: f64,
    inner: &BallRule,
    cfg: &PhysicsConfig,
) -> Result<f64>
where
    S: CrossSectionModel + ?Sized,
    G: TestFunction + ?Sized,
{
    let (value, mass_error) = mollified_i_with_mass(p, q, sigma, g, eps, inner, cfg)?;
    if mass_error > MASS_TOLERANCE {
        return Err(Error::InvalidQuadrature(format!(
            "mollifier mass off by {mass_error:e} on the inner rule"
        )));
    }
    Ok(value)
}

/// Least-squares fit of `v0 + v2 eps^2`; returns `v0`.
pub fn extrapolate(estimates: &[(f64, f64)]) -> Result<f64> {
    if estimates.len() < 3 {
        return Err(Error::TooFewEstimates(estimates.len()));
    }
    if estimates
        .windows(2)
        .any(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidConfig(
            "mollifier widths must be strictly decreasing".into(),
        ));
    }
    let m = estimates.len() as f64;
    let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(eps, v) in estimates {
        let x = eps * eps;
        sx += x;
        sxx += x * x;
        sy += v;
        sxy += x * v;
    }
    Ok((sxx * sy - sx * sxy) / (m * sxx - sx * sx))
}

/// Raw-integral value of one reduction: the angular integral scaled so that
/// both equal `I`.
pub fn reduced_value<S, G>(
    rep: Representation,
    p: &FourMomentum,
    q: &FourMomentum,
    sigma: &S,
    g: &G,
    order: usize,
    cfg: &PhysicsConfig,
) -> Result<f64>
where
    S: CrossSectionModel + ?Sized,
    G: TestFunction + ?Sized,
{
    let n = cfg.dimension;
    let k = n as i32;
    let rule = rep.sphere_rule(n, order)?;
    let values = match rep {
        Representation::Com => {
            let pair = ComPair::new(p, q, cfg)?;
            if pair.is_degenerate() && n > 2 {
                return Ok(0.0);
            }
            let factor = 2f64.powi(2 - k) * pair.rho.powi(k - 2) * pair.s.sqrt();
            let mut values = Vec::with_capacity(rule.len());
            for (omega, w) in rule.nodes.iter().zip(&rule.weights) {
                let cos = pair.cos_theta(omega).unwrap_or(1.0);
                let (pp, qp) = pair.post_collision(omega);
                values.push(w * factor * sigma.eval(pair.rho, cos)? * g.eval(p, q, &pp, &qp));
            }
            values
        }
        Representation::Gs => {
            let pair = GsPair::new(p, q, cfg)?;
            if pair.is_degenerate() && n > 2 {
                return Ok(0.0);
            }
            let mut values = Vec::with_capacity(rule.len());
            rule.try_for_each_aligned(pair.kink_axis().as_ref(), |omega, w| {
                let geom = pair.geometry(omega);
                let cos = geom.cos_theta.unwrap_or(1.0);
                values.push(
                    w * pair.raw_measure(omega)
                        * pair.s
                        * sigma.eval(pair.rho, cos)?
                        * g.eval(p, q, &geom.p_prime, &geom.q_prime),
                );
                Ok(())
            })?;
            values
        }
    };
    Ok(pairwise_sum(&values))
}

/// Mollified estimates over the width schedule, their extrapolation, and both
/// reduced values.
pub fn compare_reductions<S, G>(
    p: &FourMomentum,
    q: &FourMomentum,
    sigma: &S,
    g: &G,
    settings: &OracleSettings,
    cfg: &PhysicsConfig,
) -> Result<OracleReport>
where
    S: CrossSectionModel + ?Sized,
    G: TestFunction + ?Sized,
{
    cfg.validate()?;
    let inv = invariants(p, q, cfg)?;
    let com_value = reduced_value(
        Representation::Com,
        p,
        q,
        sigma,
        g,
        settings.reduced_order,
        cfg,
    )?;
    let gs_value = reduced_value(
        Representation::Gs,
        p,
        q,
        sigma,
        g,
        settings.reduced_order,
        cfg,
    )?;
    let reduced_rel_diff = (com_value - gs_value).abs() / com_value.abs().max(1e-12);
    let degenerate = inv.rho <= cfg.tol_algebra;
    let rel = |v: f64, reduced: f64| (v - reduced).abs() / reduced.abs().max(1e-12);
    if degenerate {
        // The energy surface collapses to the single point p' = p: for n >= 3
        // the constrained integral vanishes, for n = 2 it is finite but the
        // mollified sequence sits on the threshold and converges to half of it.
        let (extrapolated, note) = if cfg.dimension > 2 {
            (Some(0.0), "rho = 0: constraint surface has measure zero")
        } else {
            (
                None,
                "rho = 0 in two dimensions: mollified limit is one-sided, no estimate",
            )
        };
        return Ok(OracleReport {
            raw_estimates: Vec::new(),
            extrapolated,
            com_value,
            gs_value,
            rel_err_com: extrapolated.map(|v| rel(v, com_value)),
            rel_err_gs: extrapolated.map(|v| rel(v, gs_value)),
            reduced_rel_diff,
            epsilon_scale: 0.0,
            max_mass_error: 0.0,
            degenerate,
            note: Some(note.into()),
        });
    }
    let epsilon_scale = cfg.light_speed.min(energy_gap(p, q, cfg));
    let mut raw_estimates = Vec::with_capacity(settings.epsilons.len());
    let mut max_mass_error: f64 = 0.0;
    for &fraction in &settings.epsilons {
        let eps = fraction * epsilon_scale;
        let ball = oracle_ball(p, q, eps, settings, cfg)?;
        let (value, mass_error) = mollified_i_with_mass(p, q, sigma, g, eps, &ball, cfg)?;
        if mass_error > MASS_TOLERANCE {
            return Err(Error::InvalidQuadrature(format!(
                "mollifier mass off by {mass_error:e} at eps = {eps:e}"
            )));
        }
        max_mass_error = max_mass_error.max(mass_error);
        raw_estimates.push((eps, value));
    }
    let extrapolated = extrapolate(&raw_estimates)?;
    Ok(OracleReport {
        raw_estimates,
        extrapolated: Some(extrapolated),
        com_value,
        gs_value,
        rel_err_com: Some(rel(extrapolated, com_value)),
        rel_err_gs: Some(rel(extrapolated, gs_value)),
        reduced_rel_diff,
        epsilon_scale,
        max_mass_error,
        degenerate,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::lift;
    use crate::observable::Observable;
    use crate::operator::{sphere_integral, CrossSection};
    use approx::assert_relative_eq;

    fn cfg2() -> PhysicsConfig {
        PhysicsConfig::new(2, 1.0).unwrap()
    }

    fn pair2() -> (FourMomentum, FourMomentum) {
        let cfg = cfg2();
        (
            lift(&Momentum::new(&[0.3, 0.0]), &cfg).unwrap(),
            lift(&Momentum::new(&[-0.2, 0.1]), &cfg).unwrap(),
        )
    }

    #[test]
    fn extrapolation_examples() {
        assert_relative_eq!(
            extrapolate(&[(0.3, 2.0), (0.2, 2.0), (0.1, 2.0)]).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        let quad: Vec<(f64, f64)> = [0.08, 0.04, 0.02]
            .iter()
            .map(|e| (*e, 1.5 + 3.0 * e * e))
            .collect();
        assert_relative_eq!(extrapolate(&quad).unwrap(), 1.5, epsilon = 1e-12);
        assert!(matches!(
            extrapolate(&quad[..2]),
            Err(Error::TooFewEstimates(2))
        ));
        assert!(extrapolate(&[(0.1, 1.0), (0.2, 1.0), (0.05, 1.0)]).is_err());
    }

    #[test]
    fn reduced_values_scale_sphere_integrals() {
        let cfg = PhysicsConfig::new(3, 1.0).unwrap();
        let p = lift(&Momentum::new(&[0.6, -0.2, 0.1]), &cfg).unwrap();
        let q = lift(&Momentum::new(&[-0.3, 0.4, 0.0]), &cfg).unwrap();
        let sigma = CrossSection::default();
        let g = Observable::GaussianInPPrime { width: 1.0 };
        // 2^(2-n) rho^(n-3) 4 p0 q0 / c at n = 3
        let factor = 2.0 * p.energy * q.energy / cfg.light_speed;
        for rep in Representation::ALL {
            let rule = rep.sphere_rule(3, 32).unwrap();
            let angular = sphere_integral(rep, &p, &q, &sigma, &g, &rule, &cfg).unwrap();
            let raw = reduced_value(rep, &p, &q, &sigma, &g, 32, &cfg).unwrap();
            assert_relative_eq!(raw, factor * angular, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_observable_or_cross_section_gives_zero() {
        let cfg = cfg2();
        let (p, q) = pair2();
        let settings = OracleSettings::for_dimension(2);
        let eps = 0.04 * energy_gap(&p, &q, &cfg);
        let ball = oracle_ball(&p, &q, eps, &settings, &cfg).unwrap();
        let sigma = CrossSection::default();
        assert_eq!(
            mollified_i(&p, &q, &sigma, &Observable::Zero, eps, &ball, &cfg).unwrap(),
            0.0
        );
        let zero = |_: f64, _: f64| 0.0;
        assert_eq!(
            mollified_i(&p, &q, &zero, &Observable::One, eps, &ball, &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn small_ball_is_rejected() {
        let cfg = cfg2();
        let (p, q) = pair2();
        let centre = (&p.spatial + &q.spatial).scale(0.5);
        let ball = BallRule::composite(2, 0.01, 4, 8, 8)
            .unwrap()
            .translated(&centre);
        let err = mollified_i(
            &p,
            &q,
            &CrossSection::default(),
            &Observable::One,
            0.01,
            &ball,
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::BallTooSmall { .. }));
    }

    #[test]
    fn two_dimensional_example_converges() {
        let cfg = cfg2();
        let (p, q) = pair2();
        let settings = OracleSettings::for_dimension(2);
        for g in [Observable::One, Observable::JuttnerInPPrime { beta: 1.0 }] {
            let report =
                compare_reductions(&p, &q, &CrossSection::default(), &g, &settings, &cfg).unwrap();
            assert!(report.reduced_rel_diff <= 1e-8, "{report:?}");
            assert!(report.rel_err_com.unwrap() <= 0.01, "{report:?}");
            assert!(report.rel_err_gs.unwrap() <= 0.01, "{report:?}");
            assert!(report.max_mass_error <= MASS_TOLERANCE);
            let extrapolated = report.extrapolated.unwrap();
            let errs: Vec<f64> = report
                .raw_estimates
                .iter()
                .map(|(_, v)| (v - extrapolated).abs())
                .collect();
            assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
        }
    }

    #[test]
    fn identical_momenta() {
        let cfg3 = PhysicsConfig::new(3, 1.0).unwrap();
        let p = lift(&Momentum::new(&[0.2, 0.1, -0.4]), &cfg3).unwrap();
        let settings = OracleSettings::for_dimension(3);
        let r = compare_reductions(
            &p,
            &p,
            &CrossSection::default(),
            &Observable::One,
            &settings,
            &cfg3,
        )
        .unwrap();
        assert!(r.degenerate);
        assert_eq!(
            (r.extrapolated, r.com_value, r.gs_value),
            (Some(0.0), 0.0, 0.0)
        );

        // In two dimensions the constrained integral at rho = 0 is 4 pi c sigma G.
        let cfg = cfg2();
        let p = lift(&Momentum::new(&[0.2, 0.1]), &cfg).unwrap();
        let r = compare_reductions(
            &p,
            &p,
            &CrossSection::default(),
            &Observable::One,
            &OracleSettings::for_dimension(2),
            &cfg,
        )
        .unwrap();
        assert!(r.extrapolated.is_none());
        assert_relative_eq!(r.com_value, 4.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(r.gs_value, 4.0 * PI, max_relative = 1e-10);
    }
}
