//! Consistency-based reconfiguration of hybrid systems via SAT.

pub mod discretization;
pub mod engine;
pub mod error;
pub mod harness;
pub mod hybrid_model;
pub mod sat;
pub mod system_model;

pub use error::{Error, Result};
