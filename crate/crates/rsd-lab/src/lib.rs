//! Monte Carlo experiments, verifier suites, file formats and the command
//! line for random serial dictatorship markets.
//!
//! The exact machinery (RSD, cutoffs, permutation algebra, the brute-force
//! oracle, property checks) lives in `rsd-core`; this crate drives it at
//! scale. Every replication draws its randomness from
//! `substream(master_seed, label, replication)`, and every aggregate is
//! either an integer sum or an ordered collection, so results do not depend
//! on the worker count.

pub mod bounds;
pub mod calibrate;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod io;
pub mod mc;
pub mod report;
pub mod suites;

pub use crate::experiments::{ExperimentError, ExperimentReport, ReportRow};
pub use crate::mc::McConfig;
