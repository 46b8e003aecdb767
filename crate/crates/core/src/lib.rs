//! Time-windows TSP with service times and predictions: exact oracles, an
//! offline approximation pipeline, prediction-following online algorithms,
//! instance generators and an experiment harness.

// inequalities are kept in the `a <= b - 1` shape of their derivations
#![allow(clippy::int_plus_one, clippy::needless_range_loop)]

pub mod error;
pub mod graph;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub mod matching;
pub mod rational;
pub mod offline;
pub mod online;
pub mod generators;
pub mod harness;
pub mod par;
