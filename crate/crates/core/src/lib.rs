//! Linearized dynamics of an optical cavity with a moving end-mirror and a
//! trapped dielectric sphere.
//!
//! The pipeline runs lab parameters ([`params`]) through the mean-field fixed
//! point ([`steady_state`]) into the 6x6 drift and diffusion matrices and the
//! stationary covariance ([`linear`]). [`experiments`] sweeps and optimizes
//! over drive and detuning, [`geometry`] covers the pumping configurations,
//! and [`oracle`] holds independent solvers used for cross-checks.

pub mod constants;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linear;
pub mod oracle;
pub mod params;
pub mod presets;
pub mod steady_state;
pub mod validation;

pub use error::{Error, Result};
