//! Configuration spaces of points on trees: discrete models, cohomology
//! products and topological complexity certificates.

pub mod arcs;
pub mod cli;
pub mod clouds;
pub mod cohomology;
pub mod complex;
pub mod error;
pub mod planner;
pub mod tc;
pub mod tree;

pub use error::{Error, Result};
