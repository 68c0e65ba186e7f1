//! Speed and sensitivity limits for detecting a single electronic charge.
//!
//! A ballistic or tunnelling electrometer resolves one electron with unit
//! amplitude SNR up to a bandwidth set by the (effective) Rydberg frequency,
//! times a geometric screening factor. This crate evaluates that limit for a
//! cylindrical-wire FET, a quantum point contact and a single-electron
//! transistor, and checks it against a Monte Carlo counting simulation.

pub mod cli;
pub mod devices;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod report;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
