//! Simulation engine: district compartment model, commuter-coupled district
//! graph and parameter ensembles with percentile bands.

pub mod ensemble;
pub mod error;
pub mod graph;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
