//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use relboltz::oracle::{compare_reductions, OracleSettings};
use relboltz::quadrature::BallRule;
use relboltz::verification::{
    angle_suite, com_conservation_suite, equivalence_suite, gs_conservation_suite,
    gs_symmetry_suite, jacobian_suite, kernel_dimension_suite, lorentz_suite, worked_example_suite,
    Sampler, SuiteReport, VerifySettings,
};
use relboltz::{
    collision_operator, conservation_moments, lift, CrossSection, Distribution, Momentum,
    Observable, PhysicsConfig, Representation,
};

struct Outcome {
    passed: bool,
    summary: String,
}

fn from_suites(reports: &[SuiteReport]) -> Outcome {
    let mut parts = Vec::new();
    for r in reports {
        if let Some(err) = &r.error {
            parts.push(format!("{}: error {err}", r.name));
        }
        for c in &r.checks {
            parts.push(format!(
                "{}.{}={:.2e}/{:.0e}",
                r.name, c.name, c.worst, c.tolerance
            ));
        }
    }
    Outcome {
        passed: reports.iter().all(|r| r.passed),
        summary: parts.join(" "),
    }
}

fn within(outcome: Outcome, elapsed: Duration, limit: Option<Duration>) -> Outcome {
    match limit {
        Some(limit) if elapsed > limit => Outcome {
            passed: false,
            summary: format!(
                "{} [runtime {elapsed:.1?} exceeds {limit:?}]",
                outcome.summary
            ),
        },
        _ => outcome,
    }
}

fn cfg(n: usize, c: f64) -> PhysicsConfig {
    PhysicsConfig::new(n, c).unwrap()
}

fn lorentz() -> Outcome {
    let configs: Vec<PhysicsConfig> = [2, 3, 4]
        .iter()
        .flat_map(|&n| [0.5, 1.0, 3.0].map(|c| cfg(n, c)))
        .collect();
    from_suites(&[lorentz_suite(&configs, 10_000, 10.0, 1).unwrap()])
}

fn conservation() -> Outcome {
    let settings = VerifySettings::default();
    let mut reports = Vec::new();
    for cfg in [cfg(3, 1.0), cfg(2, 0.5), cfg(4, 3.0)] {
        reports.push(com_conservation_suite(&cfg, &settings).unwrap());
        reports.push(gs_conservation_suite(&cfg, &settings).unwrap());
    }
    from_suites(&reports)
}

fn angles() -> Outcome {
    let settings = VerifySettings::default();
    from_suites(&[
        angle_suite(&cfg(3, 1.0), &settings).unwrap(),
        angle_suite(&cfg(2, 1.0), &settings).unwrap(),
    ])
}

fn worked_point() -> Outcome {
    from_suites(&[worked_example_suite(&cfg(3, 1.0)).unwrap()])
}

fn equivalence() -> Outcome {
    from_suites(&[equivalence_suite(&cfg(3, 1.0), &VerifySettings::default()).unwrap()])
}

fn jacobian() -> Outcome {
    from_suites(&[jacobian_suite(&cfg(3, 1.0), &VerifySettings::default()).unwrap()])
}

fn kernel_symmetry() -> Outcome {
    from_suites(&[gs_symmetry_suite(&cfg(3, 1.0), &VerifySettings::default()).unwrap()])
}

fn oracle() -> Outcome {
    let cfg = cfg(2, 1.0);
    let settings = OracleSettings::for_dimension(2);
    let mut sampler = Sampler::new(8);
    let mut passed = true;
    let mut parts = Vec::new();
    for _ in 0..3 {
        let p = lift(&sampler.in_ball(2, 1.0), &cfg).unwrap();
        let q = lift(&sampler.in_ball(2, 1.0), &cfg).unwrap();
        for g in [Observable::One, Observable::JuttnerInPPrime { beta: 1.0 }] {
            match compare_reductions(&p, &q, &CrossSection::default(), &g, &settings, &cfg) {
                Ok(r) => {
                    let (ec, eg) = (
                        r.rel_err_com.unwrap_or(f64::INFINITY),
                        r.rel_err_gs.unwrap_or(f64::INFINITY),
                    );
                    passed &= ec <= 0.01 && eg <= 0.01 && r.reduced_rel_diff <= 1e-8;
                    parts.push(format!("{}:{:.1e}/{:.1e}", g.name(), ec, eg));
                }
                Err(e) => {
                    passed = false;
                    parts.push(format!("{}: error {e}", g.name()));
                }
            }
        }
    }
    Outcome {
        passed,
        summary: format!("rel_err com/gs {}", parts.join(" ")),
    }
}

fn bump(n: usize) -> Distribution {
    let mut centre = vec![0.0; n];
    centre[0] = 0.5;
    Distribution::gaussian_bump(Momentum::from(centre), 1.0).unwrap()
}

fn operator() -> Outcome {
    let cfg3 = cfg(3, 1.0);
    let sigma = CrossSection::default();
    let mut passed = true;
    let mut parts = Vec::new();

    // Equilibrium: the bracket vanishes at every node.
    let juttner = Distribution::juttner(1.0).unwrap();
    let mut sampler = Sampler::new(9);
    let mut imbalance: f64 = 0.0;
    for _ in 0..2 {
        let p = sampler.in_ball(3, 2.0);
        let ball = relboltz::operator::default_ball(&p, &cfg3).unwrap();
        for rep in Representation::ALL {
            let r =
                collision_operator(&juttner, &juttner, &p, &sigma, rep, 16, &ball, &cfg3).unwrap();
            imbalance = imbalance.max(r.max_pointwise_imbalance);
        }
    }
    passed &= imbalance <= 1e-12;
    parts.push(format!("juttner_pointwise={imbalance:.1e}"));

    // Representation agreement on the bump fixture at 20 points.
    let f = bump(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = sampler.in_ball(3, 2.0);
        let ball = relboltz::operator::default_ball(&p, &cfg3).unwrap();
        let com =
            collision_operator(&f, &f, &p, &sigma, Representation::Com, 16, &ball, &cfg3).unwrap();
        let gs =
            collision_operator(&f, &f, &p, &sigma, Representation::Gs, 16, &ball, &cfg3).unwrap();
        let diff = (com.value - gs.value).abs();
        let allowed = (1e-6 * com.value.abs()).max(1e-9);
        passed &= diff <= allowed;
        worst = worst.max(diff / com.value.abs().max(1e-300));
    }
    parts.push(format!("com_vs_gs_rel={worst:.1e}"));

    // Conservation moments, coarse and doubled orders.
    let cfg2 = cfg(2, 1.0);
    let f2 = bump(2);
    let centre = Momentum::new(&[0.5, 0.0]);
    let mut previous = f64::INFINITY;
    for (radial, angular, inner) in [(16, 6, 8), (32, 12, 16)] {
        let grid = BallRule::new(2, 7.0, radial, angular)
            .unwrap()
            .translated(&centre);
        let m = conservation_moments(&f2, &f2, &sigma, Representation::Gs, inner, &grid, &cfg2)
            .unwrap();
        let rel = m.worst_relative();
        passed &= rel <= 1e-4 && rel < previous;
        parts.push(format!("moments(radial {radial})={rel:.1e}"));
        previous = rel;
    }
    Outcome {
        passed,
        summary: parts.join(" "),
    }
}

fn dimension_factor() -> Outcome {
    let settings = VerifySettings::default();
    let two = VerifySettings {
        equivalence_order: 256,
        ..VerifySettings::default()
    };
    from_suites(&[
        kernel_dimension_suite(&cfg(3, 1.0), &settings).unwrap(),
        equivalence_suite(&cfg(2, 1.0), &two).unwrap(),
        equivalence_suite(&cfg(4, 1.0), &settings).unwrap(),
    ])
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 10] = [
        ("1 lorentz", lorentz, Some(Duration::from_secs(5))),
        ("2 conservation", conservation, None),
        ("3 angle closed forms", angles, None),
        ("4 worked point", worked_point, None),
        (
            "5 representation equivalence",
            equivalence,
            Some(Duration::from_secs(60)),
        ),
        ("6 jacobian", jacobian, None),
        ("7 kernel symmetry", kernel_symmetry, None),
        ("8 oracle", oracle, Some(Duration::from_secs(600))),
        ("9 operator", operator, None),
        ("10 dimension factor", dimension_factor, None),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    for (name, run, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = within(run(), start.elapsed(), limit);
        let elapsed = start.elapsed();
        if !outcome.passed {
            failures += 1;
        }
        println!(
            "{} criterion {name} ({elapsed:.1?}): {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.summary
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
