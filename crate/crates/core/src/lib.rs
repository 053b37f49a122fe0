//! Simulation of decentralized learners that share a contextual bandit
//! problem and can call each other for a fee.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod coord;
pub mod env;
pub mod learner;
pub mod partition;

pub use coord::{Engine, SlotLog};
pub use env::{ArrivalProcess, Choice, Context, Environment, Topology};
pub use learner::{AlgoParams, Algorithm};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
