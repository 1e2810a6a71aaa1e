//! Monte Carlo estimators of the deviation statistics, gated against the
//! closed forms.

pub mod accum;
pub mod backends;
pub mod estimate;
pub mod exec;
pub mod regions;
pub mod report;
pub mod suites;

pub use estimate::{estimate_bridge_cov, estimate_integrated, estimate_pointwise, Setup};
pub use exec::Exec;
pub use report::{Check, EstimateReport, SuiteReport, Verdict};
pub use suites::{run_suite, Suite, SuiteConfig};
