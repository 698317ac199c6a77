//! Random walks on weighted graphs, their local times, and the resistance
//! metric.

pub mod cli_io;
pub mod error;
pub mod exact_chain;
pub mod experiments;
pub mod garsia;
pub mod graphs;
pub mod linalg;
pub mod resistance;
pub mod rng;
pub mod walk_sim;

pub use error::{Error, Result};
