//! Gaussian continuous-variable states, entanglement and EPR-steering
//! quantifiers, and numerical checks of tripartite monogamy relations.

pub mod error;
pub mod fuzz;
pub mod gaussian;
pub mod mc;
pub mod network;
pub mod optimize;
pub mod quantifiers;
pub mod sweep;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, Quadrature, TwoModeReduced};
