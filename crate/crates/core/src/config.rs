use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension, speed of light and the two tolerance scales shared by
/// every operation in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub dimension: usize,
    pub light_speed: f64,
    pub tol_algebra: f64,
    pub tol_quadrature: f64,
}

impl PhysicsConfig {
    pub const DEFAULT_TOL_ALGEBRA: f64 = 1e-10;
    pub const DEFAULT_TOL_QUADRATURE: f64 = 1e-6;

    pub fn new(dimension: usize, light_speed: f64) -> Result<Self> {
        Self::with_tolerances(
            dimension,
            light_speed,
            Self::DEFAULT_TOL_ALGEBRA,
            Self::DEFAULT_TOL_QUADRATURE,
        )
    }

    pub fn with_tolerances(
        dimension: usize,
        light_speed: f64,
        tol_algebra: f64,
        tol_quadrature: f64,
    ) -> Result<Self> {
        let cfg = PhysicsConfig {
            dimension,
            light_speed,
            tol_algebra,
            tol_quadrature,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::InvalidConfig(format!(
                "spatial dimension must satisfy n >= 2, got n = {}",
                self.dimension
            )));
        }
        if !(self.light_speed.is_finite() && self.light_speed > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "light speed must be positive and finite, got c = {}",
                self.light_speed
            )));
        }
        if !(self.tol_algebra.is_finite() && self.tol_algebra > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol_algebra must be positive, got {}",
                self.tol_algebra
            )));
        }
        if !(self.tol_quadrature.is_finite() && self.tol_quadrature > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol_quadrature must be positive, got {}",
                self.tol_quadrature
            )));
        }
        Ok(())
    }

    pub fn c2(&self) -> f64 {
        self.light_speed * self.light_speed
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            dimension: 3,
            light_speed: 1.0,
            tol_algebra: Self::DEFAULT_TOL_ALGEBRA,
            tol_quadrature: Self::DEFAULT_TOL_QUADRATURE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_dimension() {
        let err = PhysicsConfig::new(1, 1.0).unwrap_err();
        assert!(err.to_string().contains("n >= 2"));
    }

    #[test]
    fn rejects_nonpositive_light_speed() {
        assert!(PhysicsConfig::new(3, 0.0).is_err());
        assert!(PhysicsConfig::new(3, -1.0).is_err());
        assert!(PhysicsConfig::new(3, f64::NAN).is_err());
    }

    #[test]
    fn default_is_valid() {
        PhysicsConfig::default().validate().unwrap();
    }
}
