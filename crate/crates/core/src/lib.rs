//! Epidemics with a fixed recovery time on large sparse graphs.
//!
//! The final size of such an SIR outbreak has the law of the union of the
//! seeds' components under bond percolation. This crate generates the random
//! graphs of interest, samples percolation and outbreaks, computes the
//! branching-process survival probability for configuration-model limits,
//! and implements a local estimator that probes only bounded neighborhoods
//! of a few random vertices. Brute-force oracles back the tests.

pub mod epidemic;
pub mod error;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod percolation;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use graph::Graph;
