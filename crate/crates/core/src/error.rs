use thiserror::Error;

/// Errors raised by the kinematics, quadrature and operator layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix shape mismatch: expected side {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("relative-momentum radicand {radicand:e} is negative beyond tolerance; inputs are off the mass shell")]
    OffMassShell { radicand: f64 },

    #[error("scattering angle is undefined for vanishing relative momentum (rho = {rho:e})")]
    DegenerateAngle { rho: f64 },

    #[error("scattering cosine {value} lies outside [-1, 1] beyond tolerance")]
    CosineOutOfRange { value: f64 },

    #[error("direction has norm {norm}, expected a unit vector")]
    NonUnitDirection { norm: f64 },

    #[error("matrix is not a proper Lorentz transformation (det residual {det_residual:e}, metric residual {metric_residual:e})")]
    NotLorentz {
        det_residual: f64,
        metric_residual: f64,
    },

    #[error("Lorentz map does not send the pair to its center-of-momentum frame (residual {residual:e})")]
    NotComFrame { residual: f64 },

    #[error("cross section is singular at rho = {rho} (rho exponent {exponent})")]
    SingularCrossSection { rho: f64, exponent: f64 },

    #[error("invalid quadrature request: {0}")]
    InvalidQuadrature(String),

    #[error("integration ball of radius {radius} does not cover the energy shell (boundary energy excess {excess:e})")]
    BallTooSmall { radius: f64, excess: f64 },

    #[error("non-finite integrand value {value} at {location}")]
    NonFinite { value: f64, location: String },

    #[error("extrapolation needs at least 3 estimates with strictly decreasing widths, got {0}")]
    TooFewEstimates(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
