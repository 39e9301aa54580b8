//! Exact nonsignaling boxes, generalized Svetlichny functionals and
//! nonlocality-swapping couplers.
//!
//! All arithmetic is exact over Q(√2) ([`Scalar`]); nothing on a
//! computational path goes through floating point.

pub mod checks;
pub mod coupler;
pub mod error;
pub mod format;
pub mod functional;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod table;

pub use coupler::{BranchResult, CouplerEffect};
pub use error::{Error, Result};
pub use functional::{bounds, ch_evaluate, classify, correlator, BellFunctional, BoundTriple};
pub use scalar::Scalar;
pub use scenario::{
    efficiency_compare, hybrid_three, run_scenario, swap_many, swap_two, ScenarioReport,
    ScenarioSpec,
};
pub use table::{BoxKind, BoxTable, Discard, ValidationReport};
