use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Differential cross section `sigma(rho, theta)`, evaluated from the
/// relative momentum and the cosine of the scattering angle.
pub trait CrossSectionModel {
    fn eval(&self, rho: f64, cos_theta: f64) -> Result<f64>;
}

impl<F> CrossSectionModel for F
where
    F: Fn(f64, f64) -> f64,
{
    fn eval(&self, rho: f64, cos_theta: f64) -> Result<f64> {
        Ok(self(rho, cos_theta))
    }
}

/// Built-in cross sections.
///
/// `PowerLaw` is `C rho^a (sin theta)^b` with `sin theta = sqrt(1 - cos^2)`
/// clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum CrossSection {
    Constant {
        #[serde(rename = "C")]
        amplitude: f64,
    },
    PowerLaw {
        #[serde(rename = "C")]
        amplitude: f64,
        #[serde(rename = "a")]
        rho_exponent: f64,
        #[serde(rename = "b")]
        angular_exponent: f64,
    },
}

impl CrossSection {
    pub fn constant(amplitude: f64) -> Result<Self> {
        let s = CrossSection::Constant { amplitude };
        s.validate()?;
        Ok(s)
    }

    pub fn power_law(amplitude: f64, rho_exponent: f64, angular_exponent: f64) -> Result<Self> {
        let s = CrossSection::PowerLaw {
            amplitude,
            rho_exponent,
            angular_exponent,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CrossSection::Constant { amplitude } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "cross-section amplitude must be finite and nonnegative, got {amplitude}"
                    )));
                }
            }
            CrossSection::PowerLaw {
                amplitude,
                rho_exponent,
                angular_exponent,
            } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "cross-section amplitude must be finite and nonnegative, got {amplitude}"
                    )));
                }
                if !rho_exponent.is_finite() {
                    return Err(Error::InvalidConfig(
                        "power-law rho exponent must be finite".into(),
                    ));
                }
                if !(angular_exponent.is_finite() && angular_exponent >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "power-law angular exponent must be >= 0, got {angular_exponent}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same model with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            CrossSection::Constant { amplitude } => CrossSection::Constant {
                amplitude: amplitude * factor,
            },
            CrossSection::PowerLaw {
                amplitude,
                rho_exponent,
                angular_exponent,
            } => CrossSection::PowerLaw {
                amplitude: amplitude * factor,
                rho_exponent,
                angular_exponent,
            },
        }
    }
}

impl Default for CrossSection {
    fn default() -> Self {
        CrossSection::Constant { amplitude: 1.0 }
    }
}

impl CrossSectionModel for CrossSection {
    fn eval(&self, rho: f64, cos_theta: f64) -> Result<f64> {
        match *self {
            CrossSection::Constant { amplitude } => Ok(amplitude),
            CrossSection::PowerLaw {
                amplitude,
                rho_exponent,
                angular_exponent,
            } => {
                if rho_exponent < 0.0 && rho <= 0.0 {
                    return Err(Error::SingularCrossSection {
                        rho,
                        exponent: rho_exponent,
                    });
                }
                let radial = if rho_exponent == 0.0 {
                    1.0
                } else {
                    rho.powf(rho_exponent)
                };
                let angular = if angular_exponent == 0.0 {
                    1.0
                } else {
                    let c = cos_theta.clamp(-1.0, 1.0);
                    (1.0 - c * c).max(0.0).sqrt().powf(angular_exponent)
                };
                Ok(amplitude * radial * angular)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_ignores_arguments() {
        let s = CrossSection::constant(1.0).unwrap();
        assert_eq!(s.eval(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(s.eval(12.0, -0.3).unwrap(), 1.0);
    }

    #[test]
    fn power_law_values() {
        let s = CrossSection::power_law(1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(s.eval(0.9101797, 0.2).unwrap(), 0.9101797);
        let ang = CrossSection::power_law(1.0, 0.0, 2.0).unwrap();
        assert_eq!(ang.eval(0.5, 1.0).unwrap(), 0.0);
        assert_eq!(ang.eval(0.5, -1.0).unwrap(), 0.0);
        assert_relative_eq!(ang.eval(0.5, 0.6).unwrap(), 0.64, epsilon = 1e-15);
    }

    #[test]
    fn negative_exponent_is_singular_at_zero() {
        let s = CrossSection::power_law(1.0, -1.0, 0.0).unwrap();
        assert!(matches!(
            s.eval(0.0, 0.0),
            Err(Error::SingularCrossSection { .. })
        ));
        assert_relative_eq!(s.eval(2.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn rejects_negative_angular_exponent() {
        assert!(CrossSection::power_law(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn closures_are_models() {
        let f = |rho: f64, _c: f64| 2.0 * rho;
        assert_eq!(f.eval(3.0, 0.0).unwrap(), 6.0);
    }
}
