//! Simulation of two simultaneous spin-wave/photon entangled sources in one
//! atomic ensemble, with an exact state-vector engine and a Monte Carlo
//! click sampler.

pub mod analysis;
pub mod engines;
pub mod error;
pub mod hilbert;
pub mod optics;
pub mod protocols;
pub mod source;

pub use error::{Error, Result};
