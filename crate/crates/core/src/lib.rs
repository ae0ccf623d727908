//! Relativistic Boltzmann collision operator in `n >= 2` spatial dimensions.
//!
//! Two reductions of the collision integral are implemented side by side:
//! the center-of-momentum parameterization ([`com`]) and the Glassey–Strauss
//! parameterization ([`gs`]). Their angular integrals agree for every test
//! function, which [`operator`], [`oracle`] and [`verification`] exercise
//! numerically.
//!
//! Units keep the speed of light `c` explicit; the metric is
//! `diag(-1, 1, .., 1)` and momenta lie on the mass shell
//! `p0 = sqrt(c^2 + |p|^2)`.

pub mod com;
pub mod config;
pub mod error;
pub mod gs;
pub mod kinematics;
pub mod lorentz;
pub mod observable;
pub mod operator;
pub mod oracle;
pub mod quadrature;
pub mod verification;

pub use config::PhysicsConfig;
pub use error::{Error, Result};
pub use kinematics::{
    invariants, lift, scattering_cosine, CollisionInvariants, FourMomentum, Momentum,
};
pub use lorentz::{boost_to_com, SpacetimeMatrix};
pub use observable::{Observable, TestFunction};
pub use operator::{
    collision_operator, conservation_moments, sphere_integral, CrossSection, CrossSectionModel,
    Distribution, OperatorResult, Representation,
};
pub use quadrature::{BallRule, SphereRule};
