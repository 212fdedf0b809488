//! Desk-scale simulation of interference, anomalous weak values and
//! Leggett-Garg tests of macrorealism.
//!
//! The modules build on each other bottom-up:
//!
//! - [`qcore`]: states, operators, dichotomic observables, Born rule.
//! - [`interferometer`]: the two-path Mach-Zehnder setup.
//! - [`weakval`]: weak values with post-selection.
//! - [`lgi`]: three-time and two-time Leggett-Garg expressions.
//! - [`quasiprob`]: symmetrized two-time quasiprobabilities and NSIT.
//! - [`mrcheck`]: macrorealist feasibility of two-time statistics.
//! - [`experiment`]: seeded finite-shot emulation.

pub mod error;
pub mod experiment;
pub mod interferometer;
pub mod lgi;
pub mod mrcheck;
pub mod qcore;
pub mod quasiprob;
pub mod weakval;

pub use error::{Error, Result};
