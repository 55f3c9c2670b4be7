//! Reproducible experiments over the `arbor` library: oracle equivalence
//! suites, bound-versus-empirical tail sweeps, size-ladder convergence
//! trends and degree-statistics concentration runs.
//!
//! Every run is a pure function of its [`ExperimentConfig`]; reports differ
//! between runs only in their wall-clock field.

pub mod config;
pub mod error;
pub mod experiments;
pub mod parallel;
pub mod report;

pub use config::{ConcentrationClass, ExperimentConfig, ExperimentKind, Target};
pub use error::{HarnessError, Result};
pub use experiments::{run, run_concentration, run_convergence, run_equivalence_suite, run_tail_sweep};
pub use report::{Cell, ExperimentReport};
