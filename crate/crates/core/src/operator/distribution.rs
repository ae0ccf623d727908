use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kinematics::{FourMomentum, Momentum};

type UserFn = Arc<dyn Fn(&FourMomentum) -> f64 + Send + Sync>;

/// Momentum-space scalar field used as `f` or `h` in the collision operator.
#[derive(Clone)]
pub enum Distribution {
    /// Unnormalized `exp(-beta p0)`.
    Juttner {
        beta: f64,
    },
    /// `exp(-|p - center|^2 / (2 width^2))`.
    GaussianBump {
        center: Momentum,
        width: f64,
    },
    /// `amplitude * inner`.
    Scaled {
        amplitude: f64,
        inner: Box<Distribution>,
    },
    User(UserFn),
}

impl Distribution {
    pub fn juttner(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Juttner inverse temperature must be positive, got {beta}"
            )));
        }
        Ok(Distribution::Juttner { beta })
    }

    pub fn gaussian_bump(center: Momentum, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bump width must be positive, got {width}"
            )));
        }
        Ok(Distribution::GaussianBump { center, width })
    }

    pub fn user<F>(f: F) -> Self
    where
        F: Fn(&FourMomentum) -> f64 + Send + Sync + 'static,
    {
        Distribution::User(Arc::new(f))
    }

    pub fn scaled(self, amplitude: f64) -> Self {
        Distribution::Scaled {
            amplitude,
            inner: Box::new(self),
        }
    }

    pub fn evaluate(&self, p: &FourMomentum) -> f64 {
        match self {
            Distribution::Juttner { beta } => (-beta * p.energy).exp(),
            Distribution::GaussianBump { center, width } => {
                let d2: f64 = p
                    .spatial
                    .as_slice()
                    .iter()
                    .zip(center.as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (-0.5 * d2 / (width * width)).exp()
            }
            Distribution::Scaled { amplitude, inner } => amplitude * inner.evaluate(p),
            Distribution::User(f) => f(p),
        }
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Juttner { beta } => write!(f, "Juttner {{ beta: {beta} }}"),
            Distribution::GaussianBump { center, width } => {
                write!(
                    f,
                    "GaussianBump {{ center: {:?}, width: {width} }}",
                    center.as_slice()
                )
            }
            Distribution::Scaled { amplitude, inner } => {
                write!(f, "Scaled {{ amplitude: {amplitude}, inner: {inner:?} }}")
            }
            Distribution::User(_) => write!(f, "User(..)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PhysicsConfig;
    use crate::kinematics::lift;

    #[test]
    fn juttner_is_exponential_in_energy() {
        let cfg = PhysicsConfig::default();
        let p = lift(&Momentum::new(&[1.0, 0.0, 0.0]), &cfg).unwrap();
        let f = Distribution::juttner(2.0).unwrap();
        assert_eq!(f.evaluate(&p), (-2.0 * 2f64.sqrt()).exp());
    }

    #[test]
    fn bump_peaks_at_center() {
        let cfg = PhysicsConfig::default();
        let center = Momentum::new(&[0.5, 0.0, 0.0]);
        let f = Distribution::gaussian_bump(center.clone(), 1.0).unwrap();
        assert_eq!(f.evaluate(&lift(&center, &cfg).unwrap()), 1.0);
        let off = lift(&Momentum::new(&[1.5, 0.0, 0.0]), &cfg).unwrap();
        assert!((f.evaluate(&off) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(Distribution::gaussian_bump(center, 0.0).is_err());
    }

    #[test]
    fn scaled_and_user() {
        let cfg = PhysicsConfig::default();
        let p = lift(&Momentum::new(&[0.0, 2.0, 0.0]), &cfg).unwrap();
        let g = Distribution::user(|p| p.energy).scaled(3.0);
        assert!((g.evaluate(&p) - 3.0 * 5f64.sqrt()).abs() < 1e-14);
        assert!(Distribution::juttner(-1.0).is_err());
    }
}
