use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Subcommand;
use serde_json::{json, Map, Value};

use relboltz::com::com_geometry;
use relboltz::gs::{jacobian_prepost, kernels, post_collision_gs};
use relboltz::operator::default_ball;
use relboltz::oracle::{compare_reductions, OracleSettings};
use relboltz::verification::{run_all, VerifySettings};
use relboltz::{
    boost_to_com, collision_operator, invariants, lift, sphere_integral, BallRule, Distribution,
    Error, FourMomentum, Momentum, Observable, PhysicsConfig, Representation,
};

use crate::config::{RunConfig, Vector};
use crate::output::{Body, Output};

/// Default angular order of the equivalence check; the circle needs many
/// more nodes because its product rule is only trapezoidal.
const EQUIVALENCE_ORDER: usize = 32;
const EQUIVALENCE_ORDER_CIRCLE: usize = 256;

/// Floor on `|Q_com|` in the operator's `rel_diff`: a value of at most
/// 1e-6 then means `|Q_com - Q_gs| <= max(1e-6 |Q_com|, 1e-9)`.
const REL_DIFF_FLOOR: f64 = 1e-3;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every property suite and report worst residuals; exit 2 on failure
    Verify,
    /// Invariants and center-of-momentum boost of a pair, plus kernels at an
    /// optional direction
    Kinematics {
        #[arg(long, allow_hyphen_values = true)]
        p: Vector,
        #[arg(long, allow_hyphen_values = true)]
        q: Vector,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<Vector>,
    },
    /// Post-collisional momenta of both representations at one direction
    Postcollision {
        #[arg(long, allow_hyphen_values = true)]
        p: Vector,
        #[arg(long, allow_hyphen_values = true)]
        q: Vector,
        #[arg(long, allow_hyphen_values = true)]
        omega: Vector,
    },
    /// Sphere integrals of both reductions for one pair and test function
    Equivalence {
        #[arg(long, allow_hyphen_values = true)]
        p: Vector,
        #[arg(long, allow_hyphen_values = true)]
        q: Vector,
        /// one, zero, energy-difference, gaussian, juttner
        #[arg(long, default_value = "one")]
        g: String,
    },
    /// Q(f, h) at every momentum listed in a CSV points file
    Operator {
        /// juttner or bump
        #[arg(long, default_value = "juttner")]
        f: String,
        #[arg(long, default_value = "juttner")]
        h: String,
        /// CSV file with one momentum of n components per row
        #[arg(long)]
        points: PathBuf,
        /// Inverse temperature of the Juttner distribution
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Bump center; defaults to (0.5, 0, ..., 0)
        #[arg(long, allow_hyphen_values = true)]
        bump_center: Option<Vector>,
        #[arg(long, default_value_t = 1.0)]
        bump_width: f64,
    },
    /// Mollified brute-force integral against both reduced values
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        p: Vector,
        #[arg(long, allow_hyphen_values = true)]
        q: Vector,
        #[arg(long, default_value = "one")]
        g: String,
        /// Allow n >= 4, which is expensive
        #[arg(long)]
        force: bool,
    },
}

/// Rendered output plus whether every verification check passed.
pub struct Report<'a> {
    pub output: Output<'a>,
    pub passed: bool,
}

pub fn run<'a>(command: &Command, cfg: &'a RunConfig) -> anyhow::Result<Report<'a>> {
    let phys = cfg.physics()?;
    let (name, body, passed) = match command {
        Command::Verify => {
            let (body, passed) = verify(cfg, &phys)?;
            ("verify", body, passed)
        }
        Command::Kinematics { p, q, omega } => {
            ("kinematics", kinematics(&phys, p, q, omega.as_ref())?, true)
        }
        Command::Postcollision { p, q, omega } => {
            ("postcollision", postcollision(&phys, p, q, omega)?, true)
        }
        Command::Equivalence { p, q, g } => {
            ("equivalence", equivalence(cfg, &phys, p, q, g)?, true)
        }
        Command::Operator {
            f,
            h,
            points,
            beta,
            bump_center,
            bump_width,
        } => {
            let spec = DistributionSpec {
                beta: *beta,
                bump_center: bump_center.as_ref(),
                bump_width: *bump_width,
            };
            ("operator", operator(cfg, &phys, f, h, points, &spec)?, true)
        }
        Command::Oracle { p, q, g, force } => {
            ("oracle", oracle(cfg, &phys, p, q, g, *force)?, true)
        }
    };
    Ok(Report {
        output: Output {
            command: name,
            config: cfg,
            body,
        },
        passed,
    })
}

fn lift_vector(v: &Vector, phys: &PhysicsConfig, what: &str) -> anyhow::Result<FourMomentum> {
    if v.0.len() != phys.dimension {
        bail!(
            "{what} has {} components, expected n = {}",
            v.0.len(),
            phys.dimension
        );
    }
    Ok(lift(&Momentum::new(&v.0), phys)?)
}

fn direction(v: &Vector, phys: &PhysicsConfig) -> anyhow::Result<Momentum> {
    if v.0.len() != phys.dimension {
        bail!(
            "omega has {} components, expected n = {}",
            v.0.len(),
            phys.dimension
        );
    }
    Ok(Momentum::new(&v.0))
}

fn observable(name: &str) -> anyhow::Result<Observable> {
    Observable::parse(name).with_context(|| {
        format!("unknown test function `{name}`; expected one, zero, energy-difference, gaussian or juttner")
    })
}

fn four(p: &FourMomentum) -> Value {
    json!(p.components())
}

fn verify(cfg: &RunConfig, phys: &PhysicsConfig) -> anyhow::Result<(Body, bool)> {
    let settings = VerifySettings {
        trials: cfg.trials,
        seed: cfg.seed,
        equivalence_order: cfg.sphere_order.unwrap_or(if phys.dimension == 2 {
            EQUIVALENCE_ORDER_CIRCLE
        } else {
            EQUIVALENCE_ORDER
        }),
        ..VerifySettings::default()
    };
    let suites = run_all(phys, &settings)?;
    let passed = suites.iter().all(|s| s.passed);
    let mut rows = Vec::new();
    for s in &suites {
        if let Some(err) = &s.error {
            rows.push(vec![
                json!(s.name),
                json!("error"),
                Value::Null,
                Value::Null,
                json!(false),
                json!(err),
            ]);
        }
        for c in &s.checks {
            rows.push(vec![
                json!(s.name),
                json!(c.name),
                json!(c.worst),
                json!(c.tolerance),
                json!(c.passed()),
                Value::Null,
            ]);
        }
    }
    let mut summary = Map::new();
    summary.insert("passed".into(), json!(passed));
    summary.insert("settings".into(), serde_json::to_value(&settings)?);
    summary.insert("suites".into(), serde_json::to_value(&suites)?);
    let columns = ["suite", "check", "worst", "tolerance", "passed", "error"]
        .map(String::from)
        .to_vec();
    Ok((
        Body::Table {
            columns,
            rows,
            summary,
        },
        passed,
    ))
}

fn kinematics(
    phys: &PhysicsConfig,
    p: &Vector,
    q: &Vector,
    omega: Option<&Vector>,
) -> anyhow::Result<Body> {
    let p = lift_vector(p, phys, "p")?;
    let q = lift_vector(q, phys, "q")?;
    let inv = invariants(&p, &q, phys)?;
    let boost = boost_to_com(&p, &q, phys)?;
    let (det, metric) = boost.lorentz_residuals();
    let frame = relboltz::lorentz::com_frame_residual(&boost, &p, &q, phys)?;
    let mut record = json!({
        "p": four(&p),
        "q": four(&q),
        "invariants": inv,
        "boost": {
            "matrix": boost.rows(),
            "det_residual": det,
            "metric_residual": metric,
            "com_frame_residual": frame,
        },
    });
    if let Some(omega) = omega {
        let omega = direction(omega, phys)?;
        let (b, a, bn) = kernels(&p, &q, &omega, phys)?;
        let geom = post_collision_gs(&p, &q, &omega, phys)?;
        record["omega"] = json!(omega.to_vec());
        record["kernels"] = json!({
            "B": b,
            "A": a,
            "B_n": bn,
            "D1": geom.d1,
            "D2": geom.d2,
            "jacobian": jacobian_prepost(&p, &q, &omega, phys)?,
        });
    }
    Ok(Body::Record(record))
}

fn postcollision(
    phys: &PhysicsConfig,
    p: &Vector,
    q: &Vector,
    omega: &Vector,
) -> anyhow::Result<Body> {
    let p = lift_vector(p, phys, "p")?;
    let q = lift_vector(q, phys, "q")?;
    let omega = direction(omega, phys)?;
    let gs = post_collision_gs(&p, &q, &omega, phys)?;
    let com = com_geometry(&p, &q, &omega, phys)?;
    let mut record = json!({
        "p": four(&p),
        "q": four(&q),
        "omega": omega.to_vec(),
        "gs": {
            "p_prime": four(&gs.p_prime),
            "q_prime": four(&gs.q_prime),
            "cos_theta": gs.cos_theta,
            "a": gs.a,
            "N0": gs.n0,
            "D1": gs.d1,
            "D2": gs.d2,
            "B": gs.kernel_b,
            "A": gs.kernel_a,
            "B_n": gs.kernel_bn,
        },
        "note": "the two representations parameterize omega differently: their (p', q') at the same omega \
                 generally differ, while the families swept out over the sphere coincide",
    });
    match com.cos_theta {
        Some(cos) => {
            record["com"] = json!({
                "p_prime": four(&com.p_prime),
                "q_prime": four(&com.q_prime),
                "cos_theta": cos,
                "k": com.k.to_vec(),
            });
        }
        None => {
            record["com"] = Value::Null;
            let rho = invariants(&p, &q, phys)?.rho;
            record["com_reason"] = json!(Error::DegenerateAngle { rho }.to_string());
        }
    }
    Ok(Body::Record(record))
}

fn equivalence(
    cfg: &RunConfig,
    phys: &PhysicsConfig,
    p: &Vector,
    q: &Vector,
    g: &str,
) -> anyhow::Result<Body> {
    let p = lift_vector(p, phys, "p")?;
    let q = lift_vector(q, phys, "q")?;
    let g = observable(g)?;
    let sigma = cfg.sigma.cross_section()?;
    let order = cfg.sphere_order.unwrap_or(if phys.dimension == 2 {
        EQUIVALENCE_ORDER_CIRCLE
    } else {
        EQUIVALENCE_ORDER
    });
    let mut values = Vec::new();
    let mut orders = Map::new();
    for rep in Representation::ALL {
        let rule = rep.sphere_rule(phys.dimension, order)?;
        values.push(sphere_integral(rep, &p, &q, &sigma, &g, &rule, phys)?);
        orders.insert(
            rep.name().into(),
            json!({ "sphere_order": order, "nodes": rule.len() }),
        );
    }
    let (lhs, rhs) = (values[0], values[1]);
    let abs_diff = (lhs - rhs).abs();
    Ok(Body::Record(json!({
        "p": four(&p),
        "q": four(&q),
        "observable": g.name(),
        "lhs_com": lhs,
        "rhs_gs": rhs,
        "abs_diff": abs_diff,
        "rel_diff": abs_diff / lhs.abs().max(1e-12),
        "orders": orders,
    })))
}

struct DistributionSpec<'a> {
    beta: f64,
    bump_center: Option<&'a Vector>,
    bump_width: f64,
}

impl DistributionSpec<'_> {
    fn build(&self, name: &str, dimension: usize) -> anyhow::Result<Distribution> {
        match name {
            "juttner" => Ok(Distribution::juttner(self.beta)?),
            "bump" | "gaussian-bump" => {
                let center = match self.bump_center {
                    Some(v) if v.0.len() == dimension => Momentum::new(&v.0),
                    Some(v) => bail!(
                        "bump center has {} components, expected n = {dimension}",
                        v.0.len()
                    ),
                    None => {
                        let mut c = Momentum::zeros(dimension);
                        c.as_mut_slice()[0] = 0.5;
                        c
                    }
                };
                Ok(Distribution::gaussian_bump(center, self.bump_width)?)
            }
            other => bail!("unknown distribution `{other}`; expected juttner or bump"),
        }
    }
}

/// One momentum per row; `#` starts a comment line.
pub fn read_points(path: &Path, dimension: usize) -> anyhow::Result<Vec<Momentum>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open points file {}", path.display()))?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("points file row {}", i + 1))?;
        if record.len() != dimension {
            bail!(
                "points file row {} has {} columns, expected n = {dimension}",
                i + 1,
                record.len()
            );
        }
        let values = record
            .iter()
            .map(|field| {
                field.parse::<f64>().with_context(|| {
                    format!("points file row {}: `{field}` is not a number", i + 1)
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        points.push(Momentum::new(&values));
    }
    Ok(points)
}

fn operator(
    cfg: &RunConfig,
    phys: &PhysicsConfig,
    f: &str,
    h: &str,
    points: &Path,
    spec: &DistributionSpec<'_>,
) -> anyhow::Result<Body> {
    let n = phys.dimension;
    let fd = spec.build(f, n)?;
    let hd = spec.build(h, n)?;
    let sigma = cfg.sigma.cross_section()?;
    let points = read_points(points, n)?;
    let sphere_order = cfg
        .sphere_order
        .unwrap_or(relboltz::operator::DEFAULT_SPHERE_ORDER);
    let radial_order = cfg
        .radial_order
        .unwrap_or(relboltz::operator::DEFAULT_RADIAL_ORDER);

    let mut rows = Vec::with_capacity(points.len());
    for p in &points {
        let ball = match cfg.ball_radius {
            Some(r) => BallRule::new(n, r, radial_order, sphere_order)?,
            None if cfg.radial_order.is_none() && cfg.sphere_order.is_none() => {
                default_ball(p, phys)?
            }
            None => BallRule::new(
                n,
                8.0 * phys.light_speed + p.norm(),
                radial_order,
                sphere_order,
            )?,
        };
        let com = collision_operator(
            &fd,
            &hd,
            p,
            &sigma,
            Representation::Com,
            sphere_order,
            &ball,
            phys,
        )?;
        let gs = collision_operator(
            &fd,
            &hd,
            p,
            &sigma,
            Representation::Gs,
            sphere_order,
            &ball,
            phys,
        )?;
        let mut row: Vec<Value> = p.as_slice().iter().map(|&x| json!(x)).collect();
        row.extend([
            json!(com.value),
            json!(gs.value),
            json!(com.gain),
            json!(com.loss),
            json!((com.value - gs.value).abs() / com.value.abs().max(REL_DIFF_FLOOR)),
            json!(ball.radius),
        ]);
        rows.push(row);
    }

    let mut columns: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    columns.extend(["q_com", "q_gs", "gain", "loss", "rel_diff", "ball_radius"].map(String::from));
    let mut summary = Map::new();
    summary.insert("f".into(), json!(f));
    summary.insert("h".into(), json!(h));
    summary.insert(
        "orders".into(),
        json!({
            "sphere_order": sphere_order,
            "radial_order": radial_order,
            "ball_sphere_order": sphere_order,
        }),
    );
    Ok(Body::Table {
        columns,
        rows,
        summary,
    })
}

fn oracle(
    cfg: &RunConfig,
    phys: &PhysicsConfig,
    p: &Vector,
    q: &Vector,
    g: &str,
    force: bool,
) -> anyhow::Result<Body> {
    if phys.dimension >= 4 && !force {
        bail!(
            "the oracle at n = {} integrates over a {}-dimensional ball and is expensive; pass --force to run it anyway",
            phys.dimension,
            phys.dimension
        );
    }
    let p = lift_vector(p, phys, "p")?;
    let q = lift_vector(q, phys, "q")?;
    let g = observable(g)?;
    let sigma = cfg.sigma.cross_section()?;
    let mut settings = OracleSettings::for_dimension(phys.dimension);
    if let Some(order) = cfg.sphere_order {
        settings.reduced_order = order;
    }
    let report = compare_reductions(&p, &q, &sigma, &g, &settings, phys)?;
    Ok(Body::Record(json!({
        "p": four(&p),
        "q": four(&q),
        "observable": g.name(),
        "settings": settings,
        "report": report,
    })))
}
