//! Exact joint sampling of a driving path, the process it drives and the
//! three bridges built from it, on a common grid.
//!
//! Each replicate draws, on the grid merged with the transformed times, the
//! driver increments jointly with the increments of the stochastic integral
//! behind the integral-representation bridge (and, for OU, of the process
//! itself) from their exact Gaussian step law. No discretisation error
//! enters the grid values.

mod bundle;
mod euler;
mod grid;
mod plan;
mod write;

pub use bundle::PathBundle;
pub use euler::euler_bridge;
pub use grid::TimeGrid;
pub use plan::{ou_step_cov, wiener_step_cov, Plan, Process, SeedSpec};
pub use write::{write_paths_csv, write_paths_header, write_paths_rows};
