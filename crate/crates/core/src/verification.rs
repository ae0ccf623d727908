//! Randomized property suites over the whole library.
//!
//! Each suite draws its inputs from a seeded generator and reports the worst
//! residual of every check it performs. Tolerances derive from the
//! configuration: algebraic identities use `tol_algebra` (or `10 tol_algebra`
//! where the residual involves a matrix product or a division by `rho^2`),
//! the representation equivalence uses `100 tol_algebra` relative, and the
//! finite-difference Jacobian uses `tol_quadrature` relative.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::com::{post_collision_boost, post_collision_com, ComPair};
use crate::config::PhysicsConfig;
use crate::error::Result;
use crate::gs::{
    gs_cosine, jacobian_finite_difference, jacobian_prepost, kernels, post_collision_gs, GsPair,
};
use crate::kinematics::{
    invariants, lift, lift_unchecked, lorentz_inner, scattering_cosine, FourMomentum, Momentum,
};
use crate::lorentz::{boost_to_com, com_frame_residual, SpacetimeMatrix};
use crate::observable::Observable;
use crate::operator::{sphere_integral, CrossSection, Representation};

/// One measured identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Recorded quantities that are not pass/fail.
    pub observations: Vec<(String, f64)>,
    /// Set when the suite aborted on an error instead of finishing.
    pub error: Option<String>,
}

impl SuiteReport {
    fn new(name: &str, trials: usize, checks: Vec<Check>) -> Self {
        SuiteReport {
            name: name.into(),
            trials,
            passed: checks.iter().all(Check::passed),
            checks,
            observations: Vec::new(),
            error: None,
        }
    }

    fn aborted(name: &str, error: crate::error::Error) -> Self {
        SuiteReport {
            name: name.into(),
            trials: 0,
            passed: false,
            checks: Vec::new(),
            observations: Vec::new(),
            error: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    /// Random trials for the algebraic suites.
    pub trials: usize,
    pub jacobian_trials: usize,
    pub equivalence_pairs: usize,
    pub equivalence_order: usize,
    /// Momenta are drawn uniformly from the ball `|p| <= momentum_range`.
    pub momentum_range: f64,
    /// Smaller ball for the Jacobian suite.
    pub jacobian_range: f64,
    /// Half-width of the cube from which equivalence pairs are drawn.
    pub equivalence_range: f64,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            trials: 10_000,
            jacobian_trials: 100,
            equivalence_pairs: 50,
            equivalence_order: 32,
            momentum_range: 10.0,
            jacobian_range: 5.0,
            equivalence_range: 2.0,
            seed: 20_240_601,
        }
    }
}

/// Seeded source of momenta and directions.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn direction(&mut self, dimension: usize) -> Momentum {
        loop {
            let v: Vec<f64> = (0..dimension)
                .map(|_| self.rng.sample(StandardNormal))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return Momentum::from(v.into_iter().map(|x| x / norm).collect::<Vec<_>>());
            }
        }
    }

    /// Uniform in the ball `|p| <= radius`.
    pub fn in_ball(&mut self, dimension: usize, radius: f64) -> Momentum {
        let r = radius * self.rng.random::<f64>().powf(1.0 / dimension as f64);
        self.direction(dimension).scale(r)
    }

    /// Uniform in the cube `[-half_width, half_width]^n`.
    pub fn in_cube(&mut self, dimension: usize, half_width: f64) -> Momentum {
        let v: Vec<f64> = (0..dimension)
            .map(|_| self.rng.random_range(-half_width..=half_width))
            .collect();
        Momentum::from(v)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.random_range(0..items.len())]
    }
}

struct Worst(f64);

impl Worst {
    fn new() -> Self {
        Worst(0.0)
    }

    fn update(&mut self, value: f64) {
        // NaN must fail the check, so it wins over any finite value.
        if value.is_nan() || value > self.0 || self.0.is_nan() {
            self.0 = if self.0.is_nan() { self.0 } else { value };
        }
    }
}

fn check(name: &str, worst: &Worst, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        worst: if worst.0.is_nan() {
            f64::INFINITY
        } else {
            worst.0
        },
        tolerance,
    }
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_pair(s: &mut Sampler, cfg: &PhysicsConfig, radius: f64) -> (FourMomentum, FourMomentum) {
    let n = cfg.dimension;
    (
        lift_unchecked(&s.in_ball(n, radius), cfg.light_speed),
        lift_unchecked(&s.in_ball(n, radius), cfg.light_speed),
    )
}

/// Boost to the center-of-momentum frame over pairs drawn with a
/// configuration chosen uniformly from `configs` per trial.
pub fn lorentz_suite(
    configs: &[PhysicsConfig],
    trials: usize,
    radius: f64,
    seed: u64,
) -> Result<SuiteReport> {
    let mut s = Sampler::new(seed);
    let (mut det, mut metric, mut frame, mut time_row, mut inverse, mut invariance) = (
        Worst::new(),
        Worst::new(),
        Worst::new(),
        Worst::new(),
        Worst::new(),
        Worst::new(),
    );
    for _ in 0..trials {
        let cfg = *s.pick(configs);
        let (p, q) = random_pair(&mut s, &cfg, radius);
        let boost = boost_to_com(&p, &q, &cfg)?;
        let (d, m) = boost.lorentz_residuals();
        det.update(d);
        metric.update(m);
        let inv = invariants(&p, &q, &cfg)?;
        let sum: Vec<f64> = p
            .components()
            .iter()
            .zip(q.components())
            .map(|(a, b)| a + b)
            .collect();
        let diff: Vec<f64> = p
            .components()
            .iter()
            .zip(q.components())
            .map(|(a, b)| a - b)
            .collect();
        let mapped = boost.apply(&sum)?;
        let mut target = vec![0.0; mapped.len()];
        target[0] = inv.s.sqrt();
        frame.update(max_abs(&mapped, &target));
        time_row.update(boost.apply(&diff)?[0].abs());
        let numeric = boost
            .to_dmatrix()
            .try_inverse()
            .unwrap_or_else(|| DMatrix::from_element(boost.side(), boost.side(), f64::NAN));
        let closed = boost.invert_unchecked().to_dmatrix();
        inverse.update((numeric - closed).abs().max());
        let pm = boost.apply_momentum(&p)?;
        let qm = boost.apply_momentum(&q)?;
        let pb = FourMomentum::from_parts(pm[0], Momentum::new(&pm[1..]));
        let qb = FourMomentum::from_parts(qm[0], Momentum::new(&qm[1..]));
        let before = lorentz_inner(&p, &q)?;
        let after = lorentz_inner(&pb, &qb)?;
        invariance.update((before - after).abs() / before.abs().max(1.0));
    }
    let tol = 10.0
        * configs
            .iter()
            .map(|c| c.tol_algebra)
            .fold(f64::INFINITY, f64::min);
    Ok(SuiteReport::new(
        "lorentz",
        trials,
        vec![
            check("det_minus_one", &det, tol),
            check("metric_preservation", &metric, tol),
            check("maps_total_to_rest", &frame, tol),
            check("relative_time_component", &time_row, tol),
            check("inverse_vs_numeric", &inverse, tol),
            check("inner_product_invariance", &invariance, tol),
        ],
    ))
}

/// Conservation, mass shell and invariants for one post-collision map.
fn conservation_checks<F>(
    name: &str,
    cfg: &PhysicsConfig,
    settings: &VerifySettings,
    seed: u64,
    mut map: F,
) -> Result<SuiteReport>
where
    F: FnMut(&FourMomentum, &FourMomentum, &Momentum) -> Result<(FourMomentum, FourMomentum)>,
{
    let mut s = Sampler::new(seed);
    let (mut momentum, mut energy, mut shell, mut rho, mut mandelstam) = (
        Worst::new(),
        Worst::new(),
        Worst::new(),
        Worst::new(),
        Worst::new(),
    );
    for _ in 0..settings.trials {
        let (p, q) = random_pair(&mut s, cfg, settings.momentum_range);
        let omega = s.direction(cfg.dimension);
        let (pp, qp) = map(&p, &q, &omega)?;
        let before = &p.spatial + &q.spatial;
        let after = &pp.spatial + &qp.spatial;
        momentum.update(before.max_abs_diff(&after));
        energy.update((p.energy + q.energy - pp.energy - qp.energy).abs());
        shell.update(
            pp.mass_shell_residual(cfg.light_speed)
                .max(qp.mass_shell_residual(cfg.light_speed)),
        );
        let inv = invariants(&p, &q, cfg)?;
        let inv_after = invariants(&pp, &qp, cfg)?;
        rho.update((inv.rho - inv_after.rho).abs());
        mandelstam.update((inv.s - inv_after.s).abs() / inv.s.max(1.0));
    }
    let tol = cfg.tol_algebra;
    Ok(SuiteReport::new(
        name,
        settings.trials,
        vec![
            check("momentum_conservation", &momentum, tol),
            check("energy_conservation", &energy, tol),
            check("mass_shell", &shell, tol),
            check("rho_preserved", &rho, tol),
            check("s_preserved", &mandelstam, tol),
        ],
    ))
}

pub fn com_conservation_suite(
    cfg: &PhysicsConfig,
    settings: &VerifySettings,
) -> Result<SuiteReport> {
    conservation_checks(
        "com-conservation",
        cfg,
        settings,
        settings.seed ^ 0x11,
        |p, q, w| post_collision_boost(p, q, w, cfg),
    )
}

pub fn gs_conservation_suite(
    cfg: &PhysicsConfig,
    settings: &VerifySettings,
) -> Result<SuiteReport> {
    conservation_checks(
        "gs-conservation",
        cfg,
        settings,
        settings.seed ^ 0x12,
        |p, q, w| {
            let g = post_collision_gs(p, q, w, cfg)?;
            Ok((g.p_prime, g.q_prime))
        },
    )
}

/// The literal tensor formula with the boost agrees with the closed form.
pub fn com_generic_suite(cfg: &PhysicsConfig, settings: &VerifySettings) -> Result<SuiteReport> {
    let mut s = Sampler::new(settings.seed ^ 0x13);
    let mut worst = Worst::new();
    for _ in 0..settings.trials {
        let (p, q) = random_pair(&mut s, cfg, settings.momentum_range);
        let omega = s.direction(cfg.dimension);
        let boost = boost_to_com(&p, &q, cfg)?;
        let (pa, qa) = post_collision_com(&boost, &p, &q, &omega, cfg)?;
        let (pb, qb) = post_collision_boost(&p, &q, &omega, cfg)?;
        worst.update(pa.max_abs_diff(&pb).max(qa.max_abs_diff(&qb)));
    }
    Ok(SuiteReport::new(
        "com-generic-vs-boost",
        settings.trials,
        vec![check("post_collision_agreement", &worst, cfg.tol_algebra)],
    ))
}

/// Closed-form cosines against the defining invariant formula on each
/// reduction's own outputs.
pub fn angle_suite(cfg: &PhysicsConfig, settings: &VerifySettings) -> Result<SuiteReport> {
    let mut s = Sampler::new(settings.seed ^ 0x14);
    let (mut com, mut gs) = (Worst::new(), Worst::new());
    let mut trials = 0;
    while trials < settings.trials {
        let (p, q) = random_pair(&mut s, cfg, settings.momentum_range);
        if invariants(&p, &q, cfg)?.rho <= cfg.tol_algebra {
            continue;
        }
        trials += 1;
        let omega = s.direction(cfg.dimension);
        let pair = ComPair::new(&p, &q, cfg)?;
        let (pp, qp) = pair.post_collision(&omega);
        let closed = pair.cos_theta(&omega).expect("non-degenerate pair");
        com.update((closed - scattering_cosine(&p, &q, &pp, &qp, cfg)?).abs());
        let g = post_collision_gs(&p, &q, &omega, cfg)?;
        let closed = gs_cosine(&p, &q, &omega, cfg)?;
        gs.update((closed - scattering_cosine(&p, &q, &g.p_prime, &g.q_prime, cfg)?).abs());
    }
    let tol = 10.0 * cfg.tol_algebra;
    Ok(SuiteReport::new(
        "angle",
        trials,
        vec![check("com_cosine", &com, tol), check("gs_cosine", &gs, tol)],
    ))
}

/// Pre-post invariance, kernel symmetry, involution and `D1 > 0` for the GS
/// reduction.
pub fn gs_symmetry_suite(cfg: &PhysicsConfig, settings: &VerifySettings) -> Result<SuiteReport> {
    let mut s = Sampler::new(settings.seed ^ 0x15);
    let (mut exchange, mut kernel, mut involution, mut d1_negative, mut d1_ratio) = (
        Worst::new(),
        Worst::new(),
        Worst::new(),
        Worst::new(),
        f64::INFINITY,
    );
    for _ in 0..settings.trials {
        let (p, q) = random_pair(&mut s, cfg, settings.momentum_range);
        let omega = s.direction(cfg.dimension);
        let g = post_collision_gs(&p, &q, &omega, cfg)?;
        let (pp, qp) = (&g.p_prime, &g.q_prime);
        let pre = omega.dot(&q.spatial.scale(p.energy).add_scaled(-q.energy, &p.spatial));
        let post = omega.dot(
            &pp.spatial
                .scale(qp.energy)
                .add_scaled(-pp.energy, &qp.spatial),
        );
        exchange.update((pre - post).abs());
        let (_, _, bn) = kernels(&p, &q, &omega, cfg)?;
        let pp_lifted = lift(&pp.spatial, cfg)?;
        let qp_lifted = lift(&qp.spatial, cfg)?;
        let (_, _, bn_post) = kernels(&pp_lifted, &qp_lifted, &omega, cfg)?;
        kernel.update((bn - bn_post).abs() / bn.abs().max(1.0));
        let back = GsPair::new(&pp_lifted, &qp_lifted, cfg)?.post_collision(&omega);
        involution.update(back.0.max_abs_diff(&p).max(back.1.max_abs_diff(&q)));
        d1_negative.update(-g.d1);
        d1_ratio = d1_ratio.min(g.d1 / (4.0 * cfg.c2()));
    }
    let mut report = SuiteReport::new(
        "gs-symmetry",
        settings.trials,
        vec![
            check("exchange_invariance", &exchange, cfg.tol_algebra),
            check("kernel_symmetry", &kernel, 10.0 * cfg.tol_algebra),
            check("involution", &involution, 10.0 * cfg.tol_algebra),
            check("d1_positive", &d1_negative, 0.0),
        ],
    );
    report
        .observations
        .push(("min_d1_over_4c2".into(), d1_ratio));
    Ok(report)
}

/// At `n = 3` the reduced kernel is exactly `B`.
pub fn kernel_dimension_suite(
    cfg: &PhysicsConfig,
    settings: &VerifySettings,
) -> Result<SuiteReport> {
    let mut s = Sampler::new(settings.seed ^ 0x16);
    let mut worst = Worst::new();
    let mut product = Worst::new();
    for _ in 0..settings.trials {
        let (p, q) = random_pair(&mut s, cfg, settings.momentum_range);
        let omega = s.direction(cfg.dimension);
        let (b, a, bn) = kernels(&p, &q, &omega, cfg)?;
        if cfg.dimension == 3 {
            worst.update((bn - b).abs());
        }
        if a > 0.0 && b > 0.0 {
            let expected = b * a.powi(cfg.dimension as i32 - 3);
            product.update((bn - expected).abs() / expected.max(1e-300));
        }
    }
    Ok(SuiteReport::new(
        "kernel-dimension-factor",
        settings.trials,
        vec![
            check("b3_equals_b", &worst, 0.0),
            check(
                "bn_equals_b_times_a_power",
                &product,
                10.0 * cfg.tol_algebra,
            ),
        ],
    ))
}

pub fn jacobian_suite(cfg: &PhysicsConfig, settings: &VerifySettings) -> Result<SuiteReport> {
    let mut s = Sampler::new(settings.seed ^ 0x17);
    let mut worst = Worst::new();
    for _ in 0..settings.jacobian_trials {
        let p = s.in_ball(cfg.dimension, settings.jacobian_range);
        let q = s.in_ball(cfg.dimension, settings.jacobian_range);
        let omega = s.direction(cfg.dimension);
        let closed = jacobian_prepost(&lift(&p, cfg)?, &lift(&q, cfg)?, &omega, cfg)?;
        let fd = jacobian_finite_difference(&p, &q, &omega, cfg)?;
        worst.update((fd - closed).abs() / closed.abs());
    }
    Ok(SuiteReport::new(
        "jacobian",
        settings.jacobian_trials,
        vec![check(
            "closed_vs_finite_difference",
            &worst,
            cfg.tol_quadrature,
        )],
    ))
}

/// Cross sections and test functions exercised by the equivalence suite.
pub fn equivalence_fixtures() -> (Vec<CrossSection>, Vec<Observable>) {
    (
        vec![
            CrossSection::Constant { amplitude: 1.0 },
            CrossSection::PowerLaw {
                amplitude: 1.0,
                rho_exponent: 1.0,
                angular_exponent: 0.0,
            },
        ],
        vec![
            Observable::One,
            Observable::EnergyDifference,
            Observable::GaussianInPPrime { width: 1.0 },
        ],
    )
}

/// Angular integrals of the two reductions agree for every fixture.
pub fn equivalence_suite(cfg: &PhysicsConfig, settings: &VerifySettings) -> Result<SuiteReport> {
    let mut s = Sampler::new(settings.seed ^ 0x18);
    let (sigmas, observables) = equivalence_fixtures();
    let com_rule = Representation::Com.sphere_rule(cfg.dimension, settings.equivalence_order)?;
    let gs_rule = Representation::Gs.sphere_rule(cfg.dimension, settings.equivalence_order)?;
    let mut worst = Worst::new();
    for _ in 0..settings.equivalence_pairs {
        let p = lift(&s.in_cube(cfg.dimension, settings.equivalence_range), cfg)?;
        let q = lift(&s.in_cube(cfg.dimension, settings.equivalence_range), cfg)?;
        for sigma in &sigmas {
            for g in &observables {
                let lhs = sphere_integral(Representation::Com, &p, &q, sigma, g, &com_rule, cfg)?;
                let rhs = sphere_integral(Representation::Gs, &p, &q, sigma, g, &gs_rule, cfg)?;
                worst.update((lhs - rhs).abs() / lhs.abs().max(1e-12));
            }
        }
    }
    Ok(SuiteReport::new(
        "equivalence",
        settings.equivalence_pairs,
        vec![check("com_vs_gs_relative", &worst, 100.0 * cfg.tol_algebra)],
    ))
}

/// The exchange collision `p = (1,0,0)`, `q = 0`, `omega = (1,0,0)` at
/// `n = 3`, `c = 1`, against hand-derived values.
pub fn worked_example_suite(cfg: &PhysicsConfig) -> Result<SuiteReport> {
    let cfg3 = PhysicsConfig::with_tolerances(3, 1.0, cfg.tol_algebra, cfg.tol_quadrature)?;
    let p = lift(&Momentum::new(&[1.0, 0.0, 0.0]), &cfg3)?;
    let q = lift(&Momentum::zeros(3), &cfg3)?;
    let omega = Momentum::unit(3, 0);
    let inv = invariants(&p, &q, &cfg3)?;
    let g = post_collision_gs(&p, &q, &omega, &cfg3)?;
    let expected = [
        ("rho_sqrt_s", inv.rho * inv.s.sqrt(), 2.0),
        ("moller", inv.moller, 0.3535534),
        ("a", g.a, -1.0),
        ("gs_cos_theta", gs_cosine(&p, &q, &omega, &cfg3)?, -1.0),
        ("n0", g.n0, -0.4142136),
        ("kernel_b", g.kernel_b, 0.25),
        ("d1", g.d1, 4.8284271),
        ("d2", g.d2, -2.4142136),
    ];
    let checks = expected
        .iter()
        .map(|(name, got, want)| Check {
            name: (*name).into(),
            worst: (got - want).abs(),
            tolerance: 1e-7,
        })
        .collect();
    Ok(SuiteReport::new("worked-example", 1, checks))
}

/// Suites reported by the command-line `verify` command. A suite that hits
/// an error (for example a precondition rejected under an unattainable
/// tolerance) is reported as failed with the error attached.
pub fn run_all(cfg: &PhysicsConfig, settings: &VerifySettings) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    type Suite = fn(&PhysicsConfig, &VerifySettings) -> Result<SuiteReport>;
    let suites: [(&str, Suite); 10] = [
        ("lorentz", |cfg, st| {
            lorentz_suite(
                std::slice::from_ref(cfg),
                st.trials,
                st.momentum_range,
                st.seed,
            )
        }),
        ("com-conservation", com_conservation_suite),
        ("gs-conservation", gs_conservation_suite),
        ("com-generic-vs-boost", com_generic_suite),
        ("angle", angle_suite),
        ("gs-symmetry", gs_symmetry_suite),
        ("kernel-dimension-factor", kernel_dimension_suite),
        ("jacobian", jacobian_suite),
        ("equivalence", equivalence_suite),
        ("worked-example", |cfg, _| worked_example_suite(cfg)),
    ];
    Ok(suites
        .iter()
        .map(|(name, run)| run(cfg, settings).unwrap_or_else(|e| SuiteReport::aborted(name, e)))
        .collect())
}

/// Residual of a user-supplied map against the center-of-momentum conditions.
pub fn com_frame_report(
    lambda: &SpacetimeMatrix,
    p: &FourMomentum,
    q: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<Check> {
    Ok(Check {
        name: "com_frame".into(),
        worst: com_frame_residual(lambda, p, q, cfg)?,
        tolerance: cfg.tol_algebra * (p.energy + q.energy).max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifySettings {
        VerifySettings {
            trials: 500,
            jacobian_trials: 10,
            equivalence_pairs: 3,
            ..VerifySettings::default()
        }
    }

    #[test]
    fn default_suites_pass_in_three_dimensions() {
        let cfg = PhysicsConfig::new(3, 1.0).unwrap();
        let reports = run_all(&cfg, &quick()).unwrap();
        assert!(reports.len() >= 8);
        for r in &reports {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn impossible_tolerance_fails() {
        let cfg = PhysicsConfig::with_tolerances(3, 1.0, 1e-30, 1e-6).unwrap();
        let reports = run_all(&cfg, &quick()).unwrap();
        assert!(reports.iter().any(|r| !r.passed));
    }

    #[test]
    fn sampler_is_deterministic() {
        let a: Vec<Momentum> = {
            let mut s = Sampler::new(3);
            (0..5).map(|_| s.in_ball(3, 2.0)).collect()
        };
        let mut s = Sampler::new(3);
        for x in a {
            assert_eq!(x, s.in_ball(3, 2.0));
            assert!(x.norm() <= 2.0);
        }
    }

    #[test]
    fn nan_fails_a_check() {
        let mut w = Worst::new();
        w.update(1.0);
        w.update(f64::NAN);
        w.update(2.0);
        assert!(!check("x", &w, 10.0).passed());
    }
}
