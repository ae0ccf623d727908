//! The reduced collision operator
//!
//! ```text
//! Q(f, h)(p) = int dq int domega K(p, q, omega) [f(p') h(q') - f(p) h(q)]
//! ```
//!
//! evaluated with either reduction's kernel `K` and post-collisional map.

mod cross_section;
mod distribution;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cross_section::{CrossSection, CrossSectionModel};
pub use distribution::Distribution;

use crate::com::ComPair;
use crate::config::PhysicsConfig;
use crate::error::{Error, Result};
use crate::gs::GsPair;
use crate::kinematics::{check_dimension, lift, lift_unchecked, FourMomentum, Momentum};
use crate::observable::TestFunction;
use crate::quadrature::{pairwise_sum, BallRule, SphereRule};

pub const DEFAULT_SPHERE_ORDER: usize = 16;
pub const DEFAULT_RADIAL_ORDER: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// Center-of-momentum parameterization, kernel `v_o sigma`.
    Com,
    /// Glassey–Strauss parameterization, kernel `s sigma B_n / (p0 q0)`.
    Gs,
}

impl Representation {
    pub const ALL: [Representation; 2] = [Representation::Com, Representation::Gs];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Com => "com",
            Representation::Gs => "gs",
        }
    }

    /// Sphere rule used for this representation's angular integral.
    ///
    /// The GS kernel has a kink across the great circle orthogonal to
    /// `p/p0 - q/q0` (odd `n`), so it gets the equator-split rule, which
    /// [`sphere_integral`] aligns with that direction per pair.
    pub fn sphere_rule(self, dimension: usize, order: usize) -> Result<SphereRule> {
        match self {
            Representation::Com => SphereRule::product(dimension, order),
            Representation::Gs => SphereRule::split(dimension, order),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "com" => Ok(Representation::Com),
            "gs" => Ok(Representation::Gs),
            other => Err(Error::InvalidConfig(format!(
                "unknown representation {other:?} (expected com or gs)"
            ))),
        }
    }
}

enum Pair {
    Com(ComPair),
    Gs(GsPair),
}

impl Pair {
    fn new(
        rep: Representation,
        p: &FourMomentum,
        q: &FourMomentum,
        cfg: &PhysicsConfig,
    ) -> Result<Self> {
        Ok(match rep {
            Representation::Com => Pair::Com(ComPair::new(p, q, cfg)?),
            Representation::Gs => Pair::Gs(GsPair::new(p, q, cfg)?),
        })
    }

    fn axis(&self) -> Option<Momentum> {
        match self {
            Pair::Com(_) => None,
            Pair::Gs(pair) => pair.kink_axis(),
        }
    }

    fn collide<S>(
        &self,
        omega: &Momentum,
        sigma: &S,
    ) -> Result<Option<(f64, FourMomentum, FourMomentum)>>
    where
        S: CrossSectionModel + ?Sized,
    {
        match self {
            Pair::Com(pair) => pair.collide(omega, sigma),
            Pair::Gs(pair) => pair.collide(omega, sigma),
        }
    }
}

/// `int K(p, q, omega) G(p, q, p', q') domega` in the chosen representation.
///
/// `rule` should come from [`Representation::sphere_rule`]; for the GS
/// representation it is aligned with the kernel's kink before use.
pub fn sphere_integral<S, G>(
    rep: Representation,
    p: &FourMomentum,
    q: &FourMomentum,
    sigma: &S,
    g: &G,
    rule: &SphereRule,
    cfg: &PhysicsConfig,
) -> Result<f64>
where
    S: CrossSectionModel + ?Sized,
    G: TestFunction + ?Sized,
{
    check_dimension(rule.dimension, cfg.dimension)?;
    let pair = Pair::new(rep, p, q, cfg)?;
    let axis = pair.axis();
    let mut values = Vec::with_capacity(rule.len());
    rule.try_for_each_aligned(axis.as_ref(), |omega, w| {
        if let Some((k, pp, qp)) = pair.collide(omega, sigma)? {
            values.push(w * k * g.eval(p, q, &pp, &qp));
        }
        Ok(())
    })?;
    Ok(pairwise_sum(&values))
}

/// Quadrature resolution behind an [`OperatorResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOrders {
    pub representation: Representation,
    pub sphere_order: usize,
    pub sphere_nodes: usize,
    pub radial_order: usize,
    pub ball_sphere_order: usize,
    pub ball_radius: f64,
    pub ball_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    /// `gain - loss`
    pub value: f64,
    pub gain: f64,
    pub loss: f64,
    pub rule_orders: RuleOrders,
    /// Largest `|f(p')h(q') - f(p)h(q)| / max(|f(p')h(q')|, |f(p)h(q)|)` seen
    /// at any node; round-off level when `f h` is a collision equilibrium.
    pub max_pointwise_imbalance: f64,
}

/// Default `q`-ball for evaluating `Q` at `p`: radius `8c + |p|`, radial
/// order 48, angular order 16.
pub fn default_ball(p: &Momentum, cfg: &PhysicsConfig) -> Result<BallRule> {
    BallRule::new(
        cfg.dimension,
        8.0 * cfg.light_speed + p.norm(),
        DEFAULT_RADIAL_ORDER,
        DEFAULT_SPHERE_ORDER,
    )
}

/// `Q(f, h)(p)` with the outer integral over `q` on `ball` and the inner
/// angular integral on a rule of `sphere_order`.
#[allow(clippy::too_many_arguments)]
pub fn collision_operator<S>(
    f: &Distribution,
    h: &Distribution,
    p: &Momentum,
    sigma: &S,
    rep: Representation,
    sphere_order: usize,
    ball: &BallRule,
    cfg: &PhysicsConfig,
) -> Result<OperatorResult>
where
    S: CrossSectionModel + ?Sized,
{
    cfg.validate()?;
    check_dimension(ball.dimension, cfg.dimension)?;
    let rule = rep.sphere_rule(cfg.dimension, sphere_order)?;
    collision_operator_with_rule(f, h, p, sigma, rep, &rule, sphere_order, ball, cfg)
}

#[allow(clippy::too_many_arguments)]
fn collision_operator_with_rule<S>(
    f: &Distribution,
    h: &Distribution,
    p: &Momentum,
    sigma: &S,
    rep: Representation,
    rule: &SphereRule,
    sphere_order: usize,
    ball: &BallRule,
    cfg: &PhysicsConfig,
) -> Result<OperatorResult>
where
    S: CrossSectionModel + ?Sized,
{
    let p4 = lift(p, cfg)?;
    if (p - &ball.center).norm() >= ball.radius {
        return Err(Error::InvalidConfig(format!(
            "evaluation point lies outside the q-ball of radius {}",
            ball.radius
        )));
    }
    let fp = f.evaluate(&p4);
    let mut gains = Vec::with_capacity(ball.len());
    let mut losses = Vec::with_capacity(ball.len());
    let mut inner_gain = Vec::with_capacity(rule.len());
    let mut inner_loss = Vec::with_capacity(rule.len());
    let mut imbalance: f64 = 0.0;
    for (q, wq) in ball.nodes.iter().zip(&ball.weights) {
        let q4 = lift_unchecked(q, cfg.light_speed);
        let loss_g = fp * h.evaluate(&q4);
        let pair = Pair::new(rep, &p4, &q4, cfg)?;
        let axis = pair.axis();
        inner_gain.clear();
        inner_loss.clear();
        rule.try_for_each_aligned(axis.as_ref(), |omega, w| {
            let Some((k, pp, qp)) = pair.collide(omega, sigma)? else {
                return Ok(());
            };
            let gain_g = f.evaluate(&pp) * h.evaluate(&qp);
            let gain = w * k * gain_g;
            let loss = w * k * loss_g;
            if !(gain.is_finite() && loss.is_finite()) {
                return Err(Error::NonFinite {
                    value: if gain.is_finite() { loss } else { gain },
                    location: format!("q = {:?}, omega = {:?}", q.as_slice(), omega.as_slice()),
                });
            }
            let scale = gain_g.abs().max(loss_g.abs());
            if scale > 0.0 {
                imbalance = imbalance.max((gain_g - loss_g).abs() / scale);
            }
            inner_gain.push(gain);
            inner_loss.push(loss);
            Ok(())
        })?;
        gains.push(wq * pairwise_sum(&inner_gain));
        losses.push(wq * pairwise_sum(&inner_loss));
    }
    let gain = pairwise_sum(&gains);
    let loss = pairwise_sum(&losses);
    Ok(OperatorResult {
        value: gain - loss,
        gain,
        loss,
        rule_orders: RuleOrders {
            representation: rep,
            sphere_order,
            sphere_nodes: rule.len(),
            radial_order: ball.radial_order,
            ball_sphere_order: ball.sphere_order,
            ball_radius: ball.radius,
            ball_nodes: ball.len(),
        },
        max_pointwise_imbalance: imbalance,
    })
}

/// Moments `int Q(f, h)(p) phi(p) dp` for the collision invariants
/// `phi in {1, p^1, .., p^n, p0}`, with a companion scale
/// `int loss(p) |phi(p)| dp` for each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationMoments {
    pub moments: Vec<f64>,
    pub loss_scale: Vec<f64>,
}

impl ConservationMoments {
    /// `|moment| / loss_scale` per invariant (0 where the scale vanishes).
    pub fn relative(&self) -> Vec<f64> {
        self.moments
            .iter()
            .zip(&self.loss_scale)
            .map(|(m, s)| if *s > 0.0 { m.abs() / s } else { m.abs() })
            .collect()
    }

    pub fn worst_relative(&self) -> f64 {
        self.relative().into_iter().fold(0.0, f64::max)
    }
}

/// Conservation moments of `Q(f, h)` using `grid` both for the outer `p`
/// integral and for the `q` integral inside each `Q` evaluation. `f` and `h`
/// should be negligible on the grid boundary.
pub fn conservation_moments<S>(
    f: &Distribution,
    h: &Distribution,
    sigma: &S,
    rep: Representation,
    sphere_order: usize,
    grid: &BallRule,
    cfg: &PhysicsConfig,
) -> Result<ConservationMoments>
where
    S: CrossSectionModel + ?Sized,
{
    cfg.validate()?;
    check_dimension(grid.dimension, cfg.dimension)?;
    let n = cfg.dimension;
    let rule = rep.sphere_rule(n, sphere_order)?;
    let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); n + 2];
    let mut scales: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); n + 2];
    for (p, wp) in grid.nodes.iter().zip(&grid.weights) {
        let q = collision_operator_with_rule(f, h, p, sigma, rep, &rule, sphere_order, grid, cfg)?;
        let p4 = lift_unchecked(p, cfg.light_speed);
        let mut phi = Vec::with_capacity(n + 2);
        phi.push(1.0);
        phi.extend_from_slice(p.as_slice());
        phi.push(p4.energy);
        for (k, v) in phi.into_iter().enumerate() {
            terms[k].push(wp * q.value * v);
            scales[k].push(wp * q.loss.abs() * v.abs());
        }
    }
    Ok(ConservationMoments {
        moments: terms.iter().map(|t| pairwise_sum(t)).collect(),
        loss_scale: scales.iter().map(|t| pairwise_sum(t)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observable::Observable;
    use approx::assert_relative_eq;

    fn cfg(n: usize) -> PhysicsConfig {
        PhysicsConfig::new(n, 1.0).unwrap()
    }

    fn bump(n: usize) -> Distribution {
        let mut centre = vec![0.0; n];
        centre[0] = 0.5;
        Distribution::gaussian_bump(Momentum::from(centre), 1.0).unwrap()
    }

    #[test]
    fn parses_representation() {
        assert_eq!("gs".parse::<Representation>().unwrap(), Representation::Gs);
        assert!("lab".parse::<Representation>().is_err());
    }

    #[test]
    fn constant_integrand_gives_sphere_area_times_moller() {
        let cfg = cfg(3);
        let p = lift(&Momentum::new(&[1.0, 0.0, 0.0]), &cfg).unwrap();
        let q = lift(&Momentum::zeros(3), &cfg).unwrap();
        for rep in Representation::ALL {
            let rule = rep.sphere_rule(3, 32).unwrap();
            let v = sphere_integral(
                rep,
                &p,
                &q,
                &CrossSection::default(),
                &Observable::One,
                &rule,
                &cfg,
            )
            .unwrap();
            assert_relative_eq!(v, 4.4428829, epsilon = 1e-7);
        }
    }

    #[test]
    fn juttner_is_a_null_point() {
        let cfg = cfg(3);
        let j = Distribution::juttner(1.0).unwrap();
        let p = Momentum::new(&[0.3, -0.2, 0.4]);
        let ball = BallRule::new(3, 8.0 + p.norm(), 12, 6).unwrap();
        for rep in Representation::ALL {
            let r = collision_operator(&j, &j, &p, &CrossSection::default(), rep, 6, &ball, &cfg)
                .unwrap();
            assert!(
                r.max_pointwise_imbalance <= 1e-12,
                "{}",
                r.max_pointwise_imbalance
            );
            assert!(r.value.abs() <= 1e-12 * r.gain.abs());
            assert!(r.gain > 0.0);
        }
    }

    #[test]
    fn value_is_linear_in_sigma() {
        let cfg = cfg(2);
        let f = bump(2);
        let p = Momentum::new(&[0.1, 0.2]);
        let ball = BallRule::new(2, 8.0, 16, 8).unwrap();
        let sigma = CrossSection::power_law(1.0, 1.0, 0.0).unwrap();
        let base =
            collision_operator(&f, &f, &p, &sigma, Representation::Gs, 8, &ball, &cfg).unwrap();
        let scaled = collision_operator(
            &f,
            &f,
            &p,
            &sigma.scaled(2.5),
            Representation::Gs,
            8,
            &ball,
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(scaled.value, 2.5 * base.value, max_relative = 1e-14);
        assert_eq!(base.value, base.gain - base.loss);
    }

    #[test]
    fn representations_agree_on_bump() {
        let cfg = cfg(2);
        let f = bump(2);
        let p = Momentum::new(&[0.4, -0.3]);
        let ball = default_ball(&p, &cfg).unwrap();
        let sigma = CrossSection::default();
        let com =
            collision_operator(&f, &f, &p, &sigma, Representation::Com, 16, &ball, &cfg).unwrap();
        let gs =
            collision_operator(&f, &f, &p, &sigma, Representation::Gs, 16, &ball, &cfg).unwrap();
        assert_relative_eq!(com.value, gs.value, max_relative = 1e-6);
        assert_relative_eq!(com.loss, gs.loss, max_relative = 1e-8);
    }

    #[test]
    fn rejects_points_outside_ball() {
        let cfg = cfg(2);
        let f = bump(2);
        let ball = BallRule::new(2, 1.0, 4, 4).unwrap();
        let p = Momentum::new(&[2.0, 0.0]);
        assert!(collision_operator(
            &f,
            &f,
            &p,
            &CrossSection::default(),
            Representation::Com,
            4,
            &ball,
            &cfg
        )
        .is_err());
    }

    #[test]
    fn nan_distribution_is_reported() {
        let cfg = cfg(2);
        let f =
            Distribution::user(|p: &FourMomentum| if p.spatial[0] > 0.5 { f64::NAN } else { 1.0 });
        let ball = BallRule::new(2, 2.0, 4, 4).unwrap();
        let p = Momentum::zeros(2);
        let err = collision_operator(
            &f,
            &f,
            &p,
            &CrossSection::default(),
            Representation::Com,
            4,
            &ball,
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn zero_cross_section_moments_vanish() {
        let cfg = cfg(2);
        let f = bump(2);
        let grid = BallRule::new(2, 6.0, 6, 3).unwrap();
        let sigma = |_: f64, _: f64| 0.0;
        let m = conservation_moments(&f, &f, &sigma, Representation::Com, 3, &grid, &cfg).unwrap();
        assert!(m.moments.iter().all(|v| *v == 0.0));
        assert_eq!(m.moments.len(), 4);
    }
}
