//! Splitting numbers and splitting types of equivariant vector bundles on
//! smooth complete toric varieties, in exact integer arithmetic.

pub mod bundle_data;
pub mod cli;
pub mod error;
pub mod exact_linear;
pub mod fan;
pub mod intersection;
pub mod solver;
pub mod splitting;
pub mod surface_graph;

pub use error::{Error, Result};
