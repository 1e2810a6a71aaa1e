use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::wiener::check_horizon;

/// Strictly increasing times `0 = t_0 < ... < t_n = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, n_steps: usize) -> Result<Self> {
        check_horizon(horizon)?;
        if n_steps == 0 {
            return domain("a grid needs at least one step");
        }
        let mut points: Vec<f64> =
            (0..=n_steps).map(|k| horizon * k as f64 / n_steps as f64).collect();
        points[n_steps] = horizon;
        Ok(TimeGrid { horizon, points })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || points[0] != 0.0 {
            return domain("grid must start at 0 and have at least two points");
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) || !points.iter().all(|p| p.is_finite()) {
            return domain("grid points must be finite and strictly increasing");
        }
        let horizon = *points.last().unwrap();
        Ok(TimeGrid { horizon, points })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Every `stride`-th point; `n_steps` must be divisible by `stride`.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || self.n_steps() % stride != 0 {
            return domain(format!("cannot coarsen {} steps by {stride}", self.n_steps()));
        }
        Ok(TimeGrid {
            horizon: self.horizon,
            points: self.points.iter().step_by(stride).copied().collect(),
        })
    }
}
