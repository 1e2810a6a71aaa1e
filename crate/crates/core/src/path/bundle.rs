use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, finite, Error, Result};
use crate::wiener::{BridgeKind, BridgeSpec};

use super::plan::{Plan, Process, SeedSpec, Step};

/// One replicate: the driver on the merged time set, and on the grid the
/// process, the three bridges and their deviations from the process.
///
/// The Gaussian increments are kept, so the endpoints can be changed and
/// the driver conditioned on its endpoint without resampling.
#[derive(Debug, Clone)]
pub struct PathBundle {
    plan: Arc<Plan>,
    seed: Option<SeedSpec>,
    spec: BridgeSpec,
    conditioned: Option<f64>,
    dw: Vec<f64>,
    daux: Vec<f64>,
    dv: Vec<f64>,
    w_all: Vec<f64>,
    aux_all: Vec<f64>,
    u0_all: Vec<f64>,
    w: Vec<f64>,
    w_ext: Vec<f64>,
    aux: Vec<f64>,
    process: Vec<f64>,
    bridges: [Vec<f64>; 3],
    deviations: [Vec<f64>; 3],
}

impl PathBundle {
    /// An all-zero bundle (every increment 0) with endpoints `a = b = 0`.
    pub fn zeros(plan: Arc<Plan>) -> Self {
        let m = plan.n_intervals();
        let g = plan.grid.n_steps() + 1;
        let spec = BridgeSpec::new(0.0, 0.0, plan.horizon()).expect("plan horizon is valid");
        let mut out = PathBundle {
            seed: None,
            spec,
            conditioned: None,
            dw: vec![0.0; m],
            daux: vec![0.0; plan.aux_end],
            dv: vec![0.0; plan.end_idx],
            w_all: vec![0.0; m + 1],
            aux_all: vec![0.0; plan.aux_end + 1],
            u0_all: vec![0.0; plan.end_idx + 1],
            w: vec![0.0; g],
            w_ext: vec![0.0; g],
            aux: vec![0.0; g],
            process: vec![0.0; g],
            bridges: [vec![0.0; g], vec![0.0; g], vec![0.0; g]],
            deviations: [vec![0.0; g], vec![0.0; g], vec![0.0; g]],
            plan,
        };
        out.rebuild();
        out
    }

    /// Samples a fresh replicate from `seed` with endpoints `spec`.
    pub fn sample(plan: Arc<Plan>, seed: SeedSpec, spec: BridgeSpec) -> Result<Self> {
        let mut out = PathBundle::zeros(plan);
        out.check_spec(&spec)?;
        out.spec = spec;
        out.resample(seed);
        Ok(out)
    }

    /// Replaces the increments with a fresh draw from `seed`, dropping any
    /// conditioning. Reuses the buffers.
    pub fn resample(&mut self, seed: SeedSpec) {
        let mut rng = seed.rng();
        let plan = &*self.plan;
        let mut z = || -> f64 { rng.sample(StandardNormal) };
        for j in 0..plan.n_intervals() {
            let l = &plan.factors[j];
            match (plan.step(j), plan.process) {
                (Step::Full, Process::Wiener) => {
                    let (z0, z1) = (z(), z());
                    self.dw[j] = l[0][0] * z0 + l[0][1] * z1;
                    self.daux[j] = l[1][0] * z0 + l[1][1] * z1;
                }
                (Step::Full, Process::Ou(_)) => {
                    let z = [z(), z(), z()];
                    let dot = |r: &[f64; 3]| r[0] * z[0] + r[1] * z[1] + r[2] * z[2];
                    self.dw[j] = dot(&l[0]);
                    self.dv[j] = dot(&l[1]);
                    self.daux[j] = dot(&l[2]);
                }
                (Step::Tail, Process::Ou(_)) => {
                    let (z0, z1) = (z(), z());
                    self.dw[j] = l[0][0] * z0 + l[0][1] * z1;
                    self.dv[j] = l[1][0] * z0 + l[1][1] * z1;
                }
                _ => self.dw[j] = l[0][0] * z(),
            }
        }
        self.seed = Some(seed);
        self.conditioned = None;
        self.rebuild();
    }

    /// Sets the increments directly (test hook). `daux` covers the full
    /// intervals and `dv` every interval up to `T`; `dv` is ignored for
    /// Wiener plans.
    pub fn set_increments(&mut self, dw: &[f64], daux: &[f64], dv: &[f64]) -> Result<()> {
        let p = &*self.plan;
        if dw.len() != p.n_intervals() || daux.len() != p.aux_end {
            return domain("increment lengths do not match the plan");
        }
        if matches!(p.process, Process::Ou(_)) && dv.len() != p.end_idx {
            return domain("OU increment lengths do not match the plan");
        }
        self.dw.copy_from_slice(dw);
        self.daux.copy_from_slice(daux);
        if matches!(p.process, Process::Ou(_)) {
            self.dv.copy_from_slice(dv);
        }
        self.seed = None;
        self.conditioned = None;
        self.rebuild();
        Ok(())
    }

    /// Changes the endpoints and recomputes process, bridges and deviations
    /// from the same driver.
    pub fn set_endpoints(&mut self, spec: BridgeSpec) -> Result<()> {
        self.check_spec(&spec)?;
        self.spec = spec;
        self.rebuild_derived();
        Ok(())
    }

    /// Conditions the driver on `W_T = d`: the increments up to `T` are
    /// replaced by their regression on the endpoint, which is exact in law
    /// and leaves the increments past `T` untouched. Wiener plans only.
    /// Conditioning again on another value moves the same path exactly.
    pub fn condition_on_endpoint(&mut self, d: f64) -> Result<()> {
        finite("d", d)?;
        if matches!(self.plan.process, Process::Ou(_)) {
            return Err(Error::Unsupported("endpoint conditioning is only available for the Wiener process".into()));
        }
        let p = &*self.plan;
        let delta = d - self.w_all[p.end_idx];
        if delta != 0.0 {
            let horizon = p.horizon();
            for j in 0..p.end_idx {
                self.dw[j] += delta * p.step_len[j] / horizon;
            }
            for j in 0..p.aux_end {
                self.daux[j] += delta * p.cross[j] / horizon;
            }
        }
        self.conditioned = Some(d);
        self.rebuild();
        Ok(())
    }

    fn check_spec(&self, spec: &BridgeSpec) -> Result<()> {
        if spec.horizon != self.plan.horizon() {
            return domain(format!("spec horizon {} differs from grid horizon {}", spec.horizon, self.plan.horizon()));
        }
        Ok(())
    }

    fn rebuild(&mut self) {
        let p = &*self.plan;
        let mut acc = 0.0;
        for j in 0..p.n_intervals() {
            acc += self.dw[j];
            if j + 1 == p.end_idx {
                if let Some(d) = self.conditioned {
                    acc = d;
                }
            }
            self.w_all[j + 1] = acc;
        }
        let mut m = 0.0;
        for j in 0..p.aux_end {
            m += self.daux[j];
            self.aux_all[j + 1] = m;
        }
        if let Process::Ou(params) = p.process {
            let mut u = 0.0;
            for j in 0..p.end_idx {
                u = p.growth[j] * u + params.sigma * self.dv[j];
                self.u0_all[j + 1] = u;
            }
        }
        let n = p.grid.n_steps();
        for k in 0..n {
            self.w[k] = self.w_all[p.grid_idx[k]];
            self.w_ext[k] = self.w_all[p.ext_idx[k]];
            self.aux[k] = self.aux_all[p.grid_idx[k]];
        }
        self.w[n] = self.w_all[p.end_idx];
        self.w_ext[n] = 0.0;
        self.aux[n] = 0.0;
        self.rebuild_derived();
    }

    fn rebuild_derived(&mut self) {
        let p = &*self.plan;
        let c = &p.coef;
        let n = p.grid.n_steps();
        let (a, b) = (self.spec.a, self.spec.b);
        let [b_av, b_ir, b_st] = &mut self.bridges;
        let [d_av, d_ir, d_st] = &mut self.deviations;
        let end = match p.process {
            Process::Wiener => {
                let w_end = self.w_all[p.end_idx];
                let shift = a - b;
                for k in 0..n {
                    let frac = c.lead[k];
                    let base = a + (b - a) * frac;
                    let (w, ir, st) = (self.w[k], c.ir[k] * self.aux[k], c.st[k] * self.w_ext[k]);
                    self.process[k] = a + w;
                    b_av[k] = base + w - frac * w_end;
                    b_ir[k] = base + ir;
                    b_st[k] = base + st;
                    d_av[k] = frac * (w_end + shift);
                    d_ir[k] = frac * shift + w - ir;
                    d_st[k] = frac * shift + w - st;
                }
                a + w_end
            }
            Process::Ou(_) => {
                let u_end = self.u0_all[p.end_idx];
                let shift = a * c.exp_qt_end - b;
                for k in 0..n {
                    let sr = c.lead[k];
                    let base = a * c.rest[k] + b * sr;
                    let u = self.u0_all[p.grid_idx[k]];
                    let (ir, st) = (c.ir[k] * self.aux[k], c.st[k] * self.w_ext[k]);
                    self.process[k] = a * c.expo[k] + u;
                    b_av[k] = self.process[k] - sr * (shift + u_end);
                    b_ir[k] = base + ir;
                    b_st[k] = base + st;
                    d_av[k] = sr * (shift + u_end);
                    d_ir[k] = sr * shift + u - ir;
                    d_st[k] = sr * shift + u - st;
                }
                a * c.exp_qt_end + u_end
            }
        };
        self.process[n] = end;
        for kind in 0..3 {
            self.bridges[kind][n] = b;
            self.deviations[kind][n] = end - b;
        }
    }

    pub fn plan(&self) -> &Arc<Plan> {
        &self.plan
    }

    pub fn seed(&self) -> Option<SeedSpec> {
        self.seed
    }

    pub fn spec(&self) -> &BridgeSpec {
        &self.spec
    }

    pub fn conditioned_on(&self) -> Option<f64> {
        self.conditioned
    }

    pub fn times(&self) -> &[f64] {
        self.plan.grid.points()
    }

    /// Driver at the grid points.
    pub fn driver(&self) -> &[f64] {
        &self.w
    }

    /// Driver at the merged time set.
    pub fn driver_merged(&self) -> &[f64] {
        &self.w_all
    }

    /// Driver at the transformed times; the last entry (no transformed time
    /// at `T`) is 0.
    pub fn driver_extended(&self) -> &[f64] {
        &self.w_ext
    }

    /// Driver value at `T`.
    pub fn driver_end(&self) -> f64 {
        self.w_all[self.plan.end_idx]
    }

    /// `a + W` or `U^a` on the grid.
    pub fn process(&self) -> &[f64] {
        &self.process
    }

    pub fn bridge(&self, kind: BridgeKind) -> &[f64] {
        &self.bridges[kind.index()]
    }

    /// Process minus bridge on the grid.
    pub fn deviation(&self, kind: BridgeKind) -> &[f64] {
        &self.deviations[kind.index()]
    }
}
