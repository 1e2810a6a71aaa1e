use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::{exprel, sinhc};
use crate::ou::{kappa_star_unchecked, kappa_unchecked, ProcessParams, TimeChange};

use super::TimeGrid;

/// The driven process: standard Wiener, or OU with the given parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum Process {
    Wiener,
    Ou(ProcessParams),
}

/// Identifies one replicate's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        SeedSpec { master_seed, replicate_index }
    }

    /// ChaCha8 keyed by the master seed, on the stream numbered by the
    /// replicate index.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.replicate_index);
        rng
    }
}

/// Which Gaussian coordinates an interval of the merged time set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    /// Ends at or before `t_{n-1}`: driver, auxiliary integral and (OU) the
    /// OU increment.
    Full,
    /// Ends in `(t_{n-1}, T]`: driver and (OU) the OU increment.
    Tail,
    /// Past `T`: driver only.
    Beyond,
}

/// Covariance of `(ΔW, ΔM)` over `[u, v]` with `M_t = ∫_0^t dW_s/(T - s)`,
/// `v < T`.
pub fn wiener_step_cov(u: f64, v: f64, horizon: f64) -> [[f64; 2]; 2] {
    let h = v - u;
    let mm = h / ((horizon - u) * (horizon - v));
    let wm = (h / (horizon - v)).ln_1p();
    [[h, wm], [wm, mm]]
}

/// Covariance of `(ΔW, ΔV, ΔN)` over `[u, v]`, `v < T`, where
/// `ΔV = ∫_u^v e^{q(v-s)} dW_s` and `N_t = ∫_0^t dW_s/sinh(q(T - s))`.
pub fn ou_step_cov(u: f64, v: f64, horizon: f64, q: f64) -> [[f64; 3]; 3] {
    let h = v - u;
    let (ru, rv) = (horizon - u, horizon - v);
    let ww = h;
    let wv = h * exprel(q * h);
    let vv = h * exprel(2.0 * q * h);
    let nn = h * sinhc(q * h) / ((q * rv).sinh() * (q * ru).sinh());
    let wn = (0.5 * q * h).sinh() / ((0.5 * q * ru).cosh() * (0.5 * q * rv).sinh());
    let wn = wn.ln_1p() / q;
    // ∫ (1 + coth(qr)) dr over [T-v, T-u], split by sign of q so every term
    // has one sign
    let vn = if q > 0.0 {
        let y = (-2.0 * q * rv).exp() * (-2.0 * q * h).exp_m1() / (-2.0 * q * rv).exp_m1();
        (-q * rv).exp() * (2.0 * h + y.ln_1p() / q)
    } else {
        let y = (2.0 * q * rv).exp() * (2.0 * q * h).exp_m1() / (2.0 * q * rv).exp_m1();
        (-q * rv).exp() * y.ln_1p() / q
    };
    [[ww, wv, wn], [wv, vv, vn], [wn, vn, nn]]
}

/// A square root `B` with `B Bᵀ = c`, by Cholesky with diagonal pivoting on
/// the correlation-scaled matrix. Near-collinear steps (small `|q|h`, or a
/// transformed time next to a grid point) leave rounding-level pivots that
/// clamp to 0; a pivot below `-1e-10` in correlation units is an error.
pub(crate) fn sqrt_factor<const D: usize>(c: &[[f64; D]; D]) -> Result<[[f64; D]; D]> {
    let mut scale = [0.0; D];
    for i in 0..D {
        if !(c[i][i] >= 0.0) || !c[i][i].is_finite() {
            return Err(Error::Numerical(format!("step covariance has diagonal {:e}", c[i][i])));
        }
        scale[i] = c[i][i].sqrt();
    }
    let mut r = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            let s = scale[i] * scale[j];
            r[i][j] = if s > 0.0 { c[i][j] / s } else { 0.0 };
            if !r[i][j].is_finite() {
                return Err(Error::Numerical("step covariance is not finite".into()));
            }
        }
    }
    // columns of l are indexed by elimination step
    let mut l = [[0.0; D]; D];
    let mut done = [false; D];
    for step in 0..D {
        let mut piv = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for i in 0..D {
            if !done[i] {
                let d = r[i][i] - (0..step).map(|k| l[i][k] * l[i][k]).sum::<f64>();
                if d > best {
                    best = d;
                    piv = i;
                }
            }
        }
        if best < -1e-10 {
            return Err(Error::Numerical(format!(
                "step covariance not positive semidefinite: pivot {best:e} in correlation units"
            )));
        }
        done[piv] = true;
        let root = best.max(0.0).sqrt();
        l[piv][step] = root;
        for i in 0..D {
            if !done[i] {
                let s = r[i][piv] - (0..step).map(|k| l[i][k] * l[piv][k]).sum::<f64>();
                l[i][step] = if root > 0.0 { s / root } else { 0.0 };
            }
        }
    }
    for i in 0..D {
        for k in 0..D {
            l[i][k] *= scale[i];
        }
    }
    Ok(l)
}

/// Time layout, per-interval sampling factors and per-grid-point
/// coefficients shared by every replicate of a run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub(crate) process: Process,
    pub(crate) grid: TimeGrid,
    /// Grid points merged with the transformed times, sorted, deduplicated.
    pub(crate) times: Vec<f64>,
    pub(crate) grid_idx: Vec<usize>,
    /// Position of the transformed time of each grid point `k < n`.
    pub(crate) ext_idx: Vec<usize>,
    /// Position of `T` in `times`.
    pub(crate) end_idx: usize,
    /// Intervals `0..aux_end` are `Step::Full`.
    pub(crate) aux_end: usize,
    pub(crate) factors: Vec<[[f64; 3]; 3]>,
    pub(crate) step_len: Vec<f64>,
    /// `Cov(ΔW, Δaux)` per full interval (used by endpoint conditioning).
    pub(crate) cross: Vec<f64>,
    /// `e^{qh}` per interval up to `T` (OU only).
    pub(crate) growth: Vec<f64>,
    pub(crate) coef: Coefficients,
}

/// Per-grid-point coefficients that do not depend on the endpoints.
/// Wiener: `lead = t/T`, `rest = 1 - t/T`, `ir = T - t`, `st = (T - t)/T`.
/// OU: `lead = sinh(qt)/sinh(qT)`, `rest = sinh(q(T-t))/sinh(qT)`,
/// `ir = σ sinh(q(T-t))`, `st = σ e^{-qt} κ(T-t)/κ(T)`, `expo = e^{qt}`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Coefficients {
    pub lead: Vec<f64>,
    pub rest: Vec<f64>,
    pub ir: Vec<f64>,
    pub st: Vec<f64>,
    pub expo: Vec<f64>,
    pub exp_qt_end: f64,
}

impl Plan {
    pub fn new(grid: TimeGrid, process: Process) -> Result<Self> {
        let horizon = grid.horizon();
        let pts = grid.points();
        let n = grid.n_steps();
        let tc = match process {
            Process::Wiener => None,
            Process::Ou(p) => Some(TimeChange::new(p, horizon)?),
        };
        let transform = |t: f64| match &tc {
            None => t * horizon / (horizon - t),
            Some(tc) => kappa_star_unchecked(t, tc),
        };
        let ext: Vec<f64> = pts[..n].iter().map(|&t| if t == 0.0 { 0.0 } else { transform(t) }).collect();
        if ext.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("transformed times overflow; shorten the horizon or rate".into()));
        }
        let mut times: Vec<f64> = pts.iter().chain(ext.iter()).copied().collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let find = |t: f64| times.binary_search_by(|x| x.total_cmp(&t)).expect("merged time present");
        let grid_idx: Vec<usize> = pts.iter().map(|&t| find(t)).collect();
        let ext_idx: Vec<usize> = ext.iter().map(|&t| find(t)).collect();
        let end_idx = grid_idx[n];
        let aux_end = grid_idx[n - 1];

        let n_int = times.len() - 1;
        let mut factors = Vec::with_capacity(n_int);
        let mut step_len = Vec::with_capacity(n_int);
        let mut cross = Vec::with_capacity(aux_end);
        let mut growth = Vec::new();
        for j in 0..n_int {
            let (u, v) = (times[j], times[j + 1]);
            let h = v - u;
            step_len.push(h);
            let step = plan_step(j, aux_end, end_idx);
            let f = match (step, process) {
                (Step::Full, Process::Wiener) => {
                    let c = wiener_step_cov(u, v, horizon);
                    cross.push(c[0][1]);
                    pad(sqrt_factor(&c)?)
                }
                (Step::Full, Process::Ou(p)) => {
                    let c = ou_step_cov(u, v, horizon, p.q);
                    cross.push(c[0][2]);
                    sqrt_factor(&c)?
                }
                (Step::Tail, Process::Ou(p)) => {
                    let c = ou_step_cov(u, v, horizon, p.q);
                    pad(sqrt_factor(&[[c[0][0], c[0][1]], [c[1][0], c[1][1]]])?)
                }
                _ => [[h.sqrt(), 0.0, 0.0], [0.0; 3], [0.0; 3]],
            };
            factors.push(f);
            if let (Process::Ou(p), true) = (process, j < end_idx) {
                growth.push((p.q * h).exp());
            }
        }

        let mut coef = Coefficients::default();
        match &tc {
            None => {
                for &t in pts {
                    coef.lead.push(t / horizon);
                    coef.rest.push((horizon - t) / horizon);
                    coef.ir.push(horizon - t);
                    coef.st.push((horizon - t) / horizon);
                    coef.expo.push(1.0);
                }
                coef.exp_qt_end = 1.0;
            }
            Some(tc) => {
                let q = tc.params.q;
                let sigma = tc.params.sigma;
                let kt = kappa_unchecked(horizon, q);
                for &t in pts {
                    coef.lead.push(tc.ratio(t));
                    coef.rest.push(tc.ratio_rest(t));
                    coef.ir.push(sigma * (q * (horizon - t)).sinh());
                    coef.st.push(sigma * (-q * t).exp() * kappa_unchecked(horizon - t, q) / kt);
                    coef.expo.push((q * t).exp());
                }
                coef.exp_qt_end = (q * horizon).exp();
            }
        }
        Ok(Plan { process, grid, times, grid_idx, ext_idx, end_idx, aux_end, factors, step_len, cross, growth, coef })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    /// The merged time set the driver is sampled on.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The time at which the space-time transform reads the driver for each
    /// grid point `k < n`.
    pub fn extended_times(&self) -> Vec<f64> {
        self.ext_idx.iter().map(|&i| self.times[i]).collect()
    }

    pub(crate) fn n_intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub(crate) fn step(&self, j: usize) -> Step {
        plan_step(j, self.aux_end, self.end_idx)
    }

    /// Normals consumed per replicate.
    pub fn normals_per_path(&self) -> usize {
        let dims = match self.process {
            Process::Wiener => [2, 1, 1],
            Process::Ou(_) => [3, 2, 1],
        };
        (0..self.n_intervals())
            .map(|j| match self.step(j) {
                Step::Full => dims[0],
                Step::Tail => dims[1],
                Step::Beyond => dims[2],
            })
            .sum()
    }
}

fn pad(l: [[f64; 2]; 2]) -> [[f64; 3]; 3] {
    [[l[0][0], l[0][1], 0.0], [l[1][0], l[1][1], 0.0], [0.0; 3]]
}

fn plan_step(j: usize, aux_end: usize, end_idx: usize) -> Step {
    if j < aux_end {
        Step::Full
    } else if j < end_idx {
        Step::Tail
    } else {
        Step::Beyond
    }
}
