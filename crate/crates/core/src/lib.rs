//! Multi-user MIMO downlink precoding simulator.
//!
//! A base station with M antennas serves K single-antenna users over a
//! narrowband channel. The crate computes closed-form link budgets for
//! matched-filter and zero-forcing precoding, runs Monte Carlo rate
//! estimation over i.i.d. Rayleigh or line-of-sight channels, and models
//! per-antenna gain/phase errors in the transmit chain. Everything is
//! evaluated at the SINR level; no payload symbols are ever drawn.
//!
//! Monte Carlo results are bitwise reproducible for a given seed,
//! independent of the number of worker threads: every realization has its
//! own counter-derived random stream and the accumulation order is fixed.

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod engine;
pub mod error;
pub mod impairments;
pub mod numerics;
pub mod precoding;
pub mod validate;

pub use error::{Error, Result};
