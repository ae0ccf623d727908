//! Property tests for the algebraic identities behind both reductions.

use proptest::prelude::*;

use relboltz::com::post_collision_boost;
use relboltz::gs::{gs_cosine, kernels, post_collision_gs};
use relboltz::kinematics::lorentz_inner;
use relboltz::{
    boost_to_com, collision_operator, invariants, lift, scattering_cosine, BallRule, CrossSection,
    Distribution, FourMomentum, Momentum, PhysicsConfig, Representation, SphereRule,
};

fn config() -> impl Strategy<Value = PhysicsConfig> {
    (2usize..=4, prop::sample::select(vec![0.5, 1.0, 3.0]))
        .prop_map(|(n, c)| PhysicsConfig::new(n, c).unwrap())
}

fn momentum(n: usize, range: f64) -> impl Strategy<Value = Momentum> {
    prop::collection::vec(-range..range, n).prop_map(Momentum::from)
}

fn direction(n: usize) -> impl Strategy<Value = Momentum> {
    prop::collection::vec(-1.0..1.0f64, n)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            Momentum::from(v.into_iter().map(|x| x / norm).collect::<Vec<_>>())
        })
}

/// `(cfg, p, q, omega)` with momenta in the cube `[-5, 5]^n`.
fn collision() -> impl Strategy<Value = (PhysicsConfig, FourMomentum, FourMomentum, Momentum)> {
    config().prop_flat_map(|cfg| {
        let n = cfg.dimension;
        (Just(cfg), momentum(n, 5.0), momentum(n, 5.0), direction(n)).prop_map(|(cfg, p, q, w)| {
            let p = lift(&p, &cfg).unwrap();
            let q = lift(&q, &cfg).unwrap();
            (cfg, p, q, w)
        })
    })
}

fn energy_scale(p: &FourMomentum, q: &FourMomentum) -> f64 {
    (p.energy + q.energy).max(1.0)
}

fn assert_conserves(
    cfg: &PhysicsConfig,
    p: &FourMomentum,
    q: &FourMomentum,
    pp: &FourMomentum,
    qp: &FourMomentum,
) -> Result<(), TestCaseError> {
    let scale = energy_scale(p, q);
    let before: Vec<f64> = p
        .components()
        .iter()
        .zip(q.components())
        .map(|(a, b)| a + b)
        .collect();
    let after: Vec<f64> = pp
        .components()
        .iter()
        .zip(qp.components())
        .map(|(a, b)| a + b)
        .collect();
    for (a, b) in before.iter().zip(&after) {
        prop_assert!((a - b).abs() <= 1e-10 * scale, "{before:?} vs {after:?}");
    }
    for m in [pp, qp] {
        prop_assert!(m.mass_shell_residual(cfg.light_speed) <= 1e-10 * scale);
    }
    let pre = invariants(p, q, cfg).unwrap();
    let post = invariants(pp, qp, cfg).unwrap();
    prop_assert!((pre.s - post.s).abs() <= 1e-10 * scale * scale);
    prop_assert!((pre.rho - post.rho).abs() <= 1e-8 * scale);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn boost_is_proper_and_reaches_the_rest_frame((cfg, p, q, _w) in collision()) {
        let lambda = boost_to_com(&p, &q, &cfg).unwrap();
        let (det, metric) = lambda.lorentz_residuals();
        let scale = energy_scale(&p, &q) / cfg.light_speed;
        prop_assert!(det <= 1e-9 * scale * scale);
        prop_assert!(metric <= 1e-9 * scale * scale);
        let total: Vec<f64> = p.components().iter().zip(q.components()).map(|(a, b)| a + b).collect();
        let rest = lambda.apply(&total).unwrap();
        let root_s = invariants(&p, &q, &cfg).unwrap().s.sqrt();
        prop_assert!((rest[0] - root_s).abs() <= 1e-9 * scale * root_s);
        for x in &rest[1..] {
            prop_assert!(x.abs() <= 1e-9 * scale * root_s);
        }
    }

    #[test]
    fn boost_preserves_inner_products((cfg, p, q, _w) in collision()) {
        let lambda = boost_to_com(&p, &q, &cfg).unwrap();
        let image = |m: &FourMomentum| {
            let v = lambda.apply(&m.components()).unwrap();
            FourMomentum::from_parts(v[0], Momentum::new(&v[1..]))
        };
        let before = lorentz_inner(&p, &q).unwrap();
        let after = lorentz_inner(&image(&p), &image(&q)).unwrap();
        let scale = energy_scale(&p, &q);
        prop_assert!((before - after).abs() <= 1e-9 * scale * scale);
    }

    #[test]
    fn com_collision_conserves((cfg, p, q, w) in collision()) {
        let (pp, qp) = post_collision_boost(&p, &q, &w, &cfg).unwrap();
        assert_conserves(&cfg, &p, &q, &pp, &qp)?;
    }

    #[test]
    fn gs_collision_conserves((cfg, p, q, w) in collision()) {
        let g = post_collision_gs(&p, &q, &w, &cfg).unwrap();
        assert_conserves(&cfg, &p, &q, &g.p_prime, &g.q_prime)?;
    }

    #[test]
    fn gs_cosine_matches_the_invariant_definition((cfg, p, q, w) in collision()) {
        prop_assume!(invariants(&p, &q, &cfg).unwrap().rho > 1e-3);
        let g = post_collision_gs(&p, &q, &w, &cfg).unwrap();
        let closed = gs_cosine(&p, &q, &w, &cfg).unwrap();
        let defined = scattering_cosine(&p, &q, &g.p_prime, &g.q_prime, &cfg).unwrap();
        prop_assert!((closed - defined).abs() <= 1e-8, "{closed} vs {defined}");
    }

    #[test]
    fn gs_map_is_an_involution_with_invariant_kernel((cfg, p, q, w) in collision()) {
        let once = post_collision_gs(&p, &q, &w, &cfg).unwrap();
        let twice = post_collision_gs(&once.p_prime, &once.q_prime, &w, &cfg).unwrap();
        let scale = energy_scale(&p, &q);
        prop_assert!(twice.p_prime.max_abs_diff(&p) <= 1e-9 * scale);
        prop_assert!(twice.q_prime.max_abs_diff(&q) <= 1e-9 * scale);
        let (_, _, bn) = kernels(&p, &q, &w, &cfg).unwrap();
        let (_, _, bn_post) = kernels(&once.p_prime, &once.q_prime, &w, &cfg).unwrap();
        prop_assert!((bn - bn_post).abs() <= 1e-8 * bn.abs().max(1.0));
    }

    #[test]
    fn pair_exchange_leaves_invariants_alone((cfg, p, q, _w) in collision()) {
        let a = invariants(&p, &q, &cfg).unwrap();
        let b = invariants(&q, &p, &cfg).unwrap();
        prop_assert_eq!(a.s, b.s);
        prop_assert!((a.rho - b.rho).abs() <= 1e-12 * a.rho.max(1.0));
        prop_assert!(a.rho >= 0.0 && a.s >= 4.0 * cfg.c2() * (1.0 - 1e-12));
    }

    #[test]
    fn sphere_rules_integrate_constants(n in 2usize..=4, order in 1usize..12) {
        let area = relboltz::quadrature::sphere_area(n);
        let product = SphereRule::product(n, order).unwrap();
        prop_assert!((product.weight_sum() - area).abs() <= 1e-12 * area);
        for w in &product.nodes {
            prop_assert!((w.norm() - 1.0).abs() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn operator_is_bilinear(
        alpha in 0.1..3.0f64,
        beta in 0.5..2.0f64,
        p in momentum(2, 1.5),
    ) {
        let cfg = PhysicsConfig::new(2, 1.0).unwrap();
        let sigma = CrossSection::default();
        let ball = BallRule::new(2, 8.0 + p.norm(), 12, 6).unwrap();
        let f = Distribution::gaussian_bump(Momentum::new(&[0.5, 0.0]), 1.0).unwrap();
        let h = Distribution::juttner(beta).unwrap();
        let eval = |f: &Distribution, h: &Distribution| {
            collision_operator(f, h, &p, &sigma, Representation::Gs, 6, &ball, &cfg).unwrap()
        };
        let base = eval(&f, &h);
        let scaled = eval(&f.clone().scaled(alpha), &h);
        let tol = 1e-12 * (base.gain.abs() + base.loss.abs()) * alpha;
        prop_assert!((scaled.value - alpha * base.value).abs() <= tol);

        let sum = Distribution::user({
            let (f, h) = (f.clone(), h.clone());
            move |m: &FourMomentum| f.evaluate(m) + h.evaluate(m)
        });
        let split = eval(&f, &h).value + eval(&h, &h).value;
        let joint = eval(&sum, &h);
        prop_assert!((joint.value - split).abs() <= 1e-12 * (joint.gain.abs() + joint.loss.abs()));
    }
}
