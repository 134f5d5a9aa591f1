#![no_std]

//! Random serial dictatorship (RSD) in finite matching markets.
//!
//! This crate holds everything that is a pure function of its inputs:
//!
//! - [`market`]: validated market instances (students, schools, capacities,
//!   strict partial preference lists).
//! - [`permutation`]: picking orders with both directions stored, plus the
//!   algebra used to compare orders (transpositions, the insertion operator,
//!   Hamming distance, decomposition into transpositions).
//! - [`rsd`]: running the mechanism, demand trajectories and cutoffs.
//! - [`seed`] and [`generators`]: seeded substreams, preference profiles and
//!   uniformly random orders.
//! - [`oracle`]: exact enumeration over all `n!` orders for small markets.
//! - [`verify`]: executable property checks with minimal witnesses.
//!
//! Only `alloc` is required. IO, parallel Monte Carlo and the command line
//! live in the `rsd-lab` crate.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod generators;
pub mod market;
pub mod oracle;
pub mod permutation;
pub mod rsd;
pub mod seed;
pub mod battery;
pub mod verify;

pub use crate::error::{InstanceError, OracleError, SpecError};
pub use crate::generators::{
    generate_instance, lottery_model_permutation, sample_permutation, GeneratorKind, GeneratorSpec,
};
pub use crate::market::MarketInstance;
pub use crate::oracle::{enumerate_oracle, OracleResult, ORACLE_MAX_STUDENTS};
pub use crate::permutation::Permutation;
pub use crate::rsd::{cutoffs, demand_trajectory, run_rsd, Assignment, CutoffVector, DemandTrajectory};
