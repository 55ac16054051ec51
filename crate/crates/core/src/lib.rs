//! Desk-scale array-signal-processing workbench for direction-of-arrival
//! estimation with fully coherent sources and per-antenna amplitude-phase
//! errors.
//!
//! The pipeline: synthesize ULA snapshots ([`array`]), move to the frequency
//! domain and pull the spectral-peak measurement ([`spectrum`]), build an
//! error-absorbing steering dictionary from an auxiliary-source sweep
//! ([`rsv`]), and recover directions by L1 sparse reconstruction ([`sparse`]).
//! Classical estimators (ML, WSF, MUSIC) live in [`estimators`] as
//! benchmarks, and [`harness`] runs config-driven Monte Carlo experiments
//! that land as CSV tables.

pub mod array;
pub mod error;
pub mod rng;
pub mod rsv;
pub mod sparse;
pub mod spectrum;

pub use error::{Error, Result};
