//! Random plane trees with fixed degree statistics: exact enumeration,
//! samplers, explicit tail bounds and simply generated tree analytics.

pub mod bounds;
pub mod error;
pub mod oracle;
pub mod samplers;
pub mod simply_generated;
pub mod stats;
pub mod trees;

pub use error::{Error, Result};
pub use trees::{DegreeStatistics, MarkedTree, Norms, PlaneTree};
