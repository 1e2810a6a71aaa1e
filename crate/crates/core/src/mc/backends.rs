//! Euler–Maruyama against the exact integral-representation bridge on a
//! shared driver.

use std::sync::Arc;

use crate::error::Result;
use crate::path::{euler_bridge, PathBundle, Plan, Process, SeedSpec, TimeGrid};
use crate::wiener::{BridgeKind, BridgeSpec};

use super::accum::Layout;
use super::exec::{run, Exec};

/// Strong error of the Euler scheme at successive refinements.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub steps: Vec<usize>,
    /// RMS over replicates of the max-over-grid error, per level.
    pub rms: Vec<f64>,
    pub rms_se: Vec<f64>,
    /// `log2(rms[i] / rms[i+1])`.
    pub rates: Vec<f64>,
    /// Sample mean and variance of the finest Euler path at `T/2`, with
    /// their standard errors.
    pub mid_mean: (f64, f64),
    pub mid_var: (f64, f64),
}

impl Convergence {
    pub fn strictly_decreasing(&self) -> bool {
        self.rms.windows(2).all(|w| w[1] < w[0])
    }
}

/// Samples exact paths on `n_fine` steps and runs Euler on the same driver
/// at `n_fine / 2^j`, `j = levels-1, …, 0`.
pub fn backend_crosscheck(process: Process, spec: BridgeSpec, n_fine: usize, levels: usize, reps: u64, seed: u64, exec: Exec) -> Result<Convergence> {
    let grid = TimeGrid::uniform(spec.horizon, n_fine)?;
    let strides: Vec<usize> = (0..levels).rev().map(|j| 1usize << j).collect();
    let coarse: Vec<TimeGrid> = strides.iter().map(|&s| grid.coarsen(s)).collect::<Result<_>>()?;
    let plan = Arc::new(Plan::new(grid, process)?);
    let mid = n_fine / 2;
    let mut lay = Layout::new();
    let errs: Vec<_> = strides.iter().map(|_| lay.scalar(0.0)).collect();
    let mid_stat = lay.scalar(0.0);
    let tot = run(exec, &lay, reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(seed, r));
        b.set_endpoints(spec)?;
        let exact = b.bridge(BridgeKind::Ir);
        for (l, &s) in strides.iter().enumerate() {
            let w: Vec<f64> = b.driver().iter().step_by(s).copied().collect();
            let x = euler_bridge(coarse[l].points(), &w, process, &spec)?;
            let e = x.iter().zip(exact.iter().step_by(s)).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            errs[l].push(tally, e * e);
            if s == 1 {
                mid_stat.push(tally, x[mid]);
            }
        }
        Ok(())
    })?;
    let mut rms = Vec::new();
    let mut rms_se = Vec::new();
    for e in &errs {
        let s = e.stats(&tot);
        let r = s.mean.max(0.0).sqrt();
        rms.push(r);
        rms_se.push(if r > 0.0 { s.se_mean / (2.0 * r) } else { 0.0 });
    }
    let rates = rms.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let m = mid_stat.stats(&tot);
    Ok(Convergence {
        steps: coarse.iter().map(|g| g.n_steps()).collect(),
        rms,
        rms_se,
        rates,
        mid_mean: (m.mean, m.se_mean),
        mid_var: (m.var, m.se_var),
    })
}

/// Largest difference between Euler and the exact bridge on the noise-free
/// driver.
pub fn zero_noise_gap(process: Process, spec: BridgeSpec, n: usize) -> Result<f64> {
    let plan = Arc::new(Plan::new(TimeGrid::uniform(spec.horizon, n)?, process)?);
    let mut b = PathBundle::zeros(plan.clone());
    b.set_endpoints(spec)?;
    let x = euler_bridge(plan.grid().points(), b.driver(), process, &spec)?;
    Ok(x.iter().zip(b.bridge(BridgeKind::Ir)).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}
