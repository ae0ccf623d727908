use serde::{Deserialize, Serialize};

use crate::kinematics::FourMomentum;

/// Scalar `G(p, q, p', q')` integrated against a reduced collision kernel.
pub trait TestFunction {
    fn eval(
        &self,
        p: &FourMomentum,
        q: &FourMomentum,
        p_prime: &FourMomentum,
        q_prime: &FourMomentum,
    ) -> f64;
}

impl<F> TestFunction for F
where
    F: Fn(&FourMomentum, &FourMomentum, &FourMomentum, &FourMomentum) -> f64,
{
    fn eval(
        &self,
        p: &FourMomentum,
        q: &FourMomentum,
        p_prime: &FourMomentum,
        q_prime: &FourMomentum,
    ) -> f64 {
        self(p, q, p_prime, q_prime)
    }
}

/// Built-in test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
    /// `G = 1`
    One,
    /// `G = 0`
    Zero,
    /// `G = p'0 - p0`
    EnergyDifference,
    /// `G = exp(-|p'|^2 / width^2)`
    GaussianInPPrime { width: f64 },
    /// `G = exp(-beta p'0)`
    JuttnerInPPrime { beta: f64 },
}

impl Observable {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "one" | "1" => Some(Observable::One),
            "zero" | "0" => Some(Observable::Zero),
            "energy-difference" => Some(Observable::EnergyDifference),
            "gaussian" | "gaussian-in-p-prime" => Some(Observable::GaussianInPPrime { width: 1.0 }),
            "juttner" | "juttner-in-p-prime" => Some(Observable::JuttnerInPPrime { beta: 1.0 }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Observable::One => "one",
            Observable::Zero => "zero",
            Observable::EnergyDifference => "energy-difference",
            Observable::GaussianInPPrime { .. } => "gaussian",
            Observable::JuttnerInPPrime { .. } => "juttner",
        }
    }
}

impl TestFunction for Observable {
    fn eval(
        &self,
        p: &FourMomentum,
        _q: &FourMomentum,
        p_prime: &FourMomentum,
        _q_prime: &FourMomentum,
    ) -> f64 {
        match *self {
            Observable::One => 1.0,
            Observable::Zero => 0.0,
            Observable::EnergyDifference => p_prime.energy - p.energy,
            Observable::GaussianInPPrime { width } => {
                (-p_prime.spatial.norm_sq() / (width * width)).exp()
            }
            Observable::JuttnerInPPrime { beta } => (-beta * p_prime.energy).exp(),
        }
    }
}
