//! Thermal noise in torsion pendulums, free and PI-feedback locked.
//!
//! * [`pendulum`]: closed-form spectra, autocorrelations and force-noise limits.
//! * [`sim`]: seeded Langevin simulation of the same systems.
//! * [`spectral`]: Welch PSD, autocorrelation and ensemble estimators.
//! * [`planner`]: wire design, Casimir-force targets and noise budgets.
//! * [`cli`]: configuration, file formats and the command implementations
//!   behind the `torsion-noise` binary.

pub mod cli;
pub mod error;
pub mod pendulum;
pub mod planner;
pub mod quadrature;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use pendulum::{
    derive, derive_feedback, DerivedQuantities, FeedbackDerived, FeedbackParams, NoiseSpectrum,
    PendulumParams, SpectrumKind, BOLTZMANN,
};
