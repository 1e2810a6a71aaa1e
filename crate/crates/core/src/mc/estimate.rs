//! Single-statistic estimators and the grid/quadrature helpers shared with
//! the verification suites.

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::ou::{ou_bridge_cov, ou_cov_with_process, ou_deviation_law, ou_expected_quad_dev, TimeChange};
use crate::path::{PathBundle, Plan, Process, SeedSpec, TimeGrid};
use crate::scalar_gauss::{folded_mean, GaussianMoment};
use crate::wiener::{
    bridge_cov, cond_deviation_law, corr_with_process, cov_with_process, deviation_law,
    expected_cond_quad_dev, expected_quad_dev, BridgeKind, BridgeSpec,
};

use super::accum::Layout;
use super::exec::{run, Exec};
use super::report::{EstimateReport, RunInfo};

/// A uniform grid of `n` steps with extra points merged in, and trapezoid
/// weights over the uniform points at step `T/n` and `2T/n`.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub grid: TimeGrid,
    pub n: usize,
    fine: Vec<(usize, f64)>,
    coarse: Vec<(usize, f64)>,
}

impl SampleGrid {
    pub fn new(horizon: f64, n: usize, extra: &[f64]) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return domain(format!("step count must be even and at least 2, got {n}"));
        }
        let uniform = TimeGrid::uniform(horizon, n)?;
        let mut pts = uniform.points().to_vec();
        for &t in extra {
            if !(t > 0.0 && t < horizon) {
                return domain(format!("time {t} outside (0, {horizon})"));
            }
            pts.push(t);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let grid = TimeGrid::from_points(pts)?;
        let pos = |t: f64| grid.points().binary_search_by(|x| x.total_cmp(&t)).expect("grid point");
        let weights = |step: usize| -> Vec<(usize, f64)> {
            let h = horizon * step as f64 / n as f64;
            (0..=n)
                .step_by(step)
                .map(|k| (pos(uniform.points()[k]), if k == 0 || k == n { h / 2.0 } else { h }))
                .collect()
        };
        let (fine, coarse) = (weights(1), weights(2));
        Ok(SampleGrid { grid, n, fine, coarse })
    }

    /// Index of a grid time.
    pub fn index(&self, t: f64) -> usize {
        self.grid.points().binary_search_by(|x| x.total_cmp(&t)).expect("time on grid")
    }

    /// Trapezoid integrals of `f(path)` on the `n` and `n/2` grids.
    pub fn integrals(&self, path: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
        let q = |w: &[(usize, f64)]| w.iter().map(|&(i, h)| h * f(path[i])).sum::<f64>();
        (q(&self.fine), q(&self.coarse))
    }

    /// Trapezoid integrals of `x·y` on the `n` and `n/2` grids.
    pub fn cross_integrals(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let q = |w: &[(usize, f64)]| w.iter().map(|&(i, h)| h * x[i] * y[i]).sum::<f64>();
        (q(&self.fine), q(&self.coarse))
    }
}

/// Richardson combination of trapezoid values on the `n` and `n/2` grids
/// (error `O(h²)`), and the estimated bias of the `n`-grid value.
pub fn refine((fine, coarse): (f64, f64)) -> (f64, f64) {
    ((4.0 * fine - coarse) / 3.0, (fine - coarse) / 3.0)
}

/// Parameters of a simulation run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub process: Process,
    pub spec: BridgeSpec,
    pub n_steps: usize,
    pub reps: u64,
    pub seed: u64,
    pub exec: Exec,
}

impl Setup {
    fn info(&self, extra: &[(&str, f64)]) -> RunInfo {
        let mut p = vec![("a", self.spec.a), ("b", self.spec.b), ("T", self.spec.horizon)];
        if let Process::Ou(pp) = self.process {
            p.push(("q", pp.q));
            p.push(("sigma", pp.sigma));
        }
        p.extend_from_slice(extra);
        RunInfo::new(self.seed, self.reps, self.n_steps, &p)
    }

    fn prefix(&self) -> &'static str {
        match self.process {
            Process::Wiener => "wiener",
            Process::Ou(_) => "ou",
        }
    }

    fn time_change(&self) -> Result<Option<TimeChange>> {
        match self.process {
            Process::Wiener => Ok(None),
            Process::Ou(p) => TimeChange::new(p, self.spec.horizon).map(Some),
        }
    }
}

/// Oracle values at `t`: deviation law, covariance and correlation of
/// bridge with process.
fn pointwise_oracles(kind: BridgeKind, t: f64, setup: &Setup, d: Option<f64>) -> Result<(GaussianMoment, f64, f64)> {
    let h = setup.spec.horizon;
    match (setup.time_change()?, d) {
        (None, None) => Ok((deviation_law(kind, t, &setup.spec)?, cov_with_process(kind, t, h)?, corr_with_process(kind, t, h)?)),
        (None, Some(d)) => {
            let law = cond_deviation_law(kind, t, setup.spec.reduced_b(), d, h)?;
            Ok((law, f64::NAN, f64::NAN))
        }
        (Some(tc), None) => {
            let b0 = setup.spec.b - setup.spec.a * (tc.params.q * h).exp();
            let cov = ou_cov_with_process(kind, t, &tc)?;
            let q = tc.params.q;
            let var_u = tc.params.sigma.powi(2) * t * crate::hyper::exprel(2.0 * q * t);
            let corr = cov / (ou_bridge_cov(t, t, &tc)? * var_u).sqrt();
            Ok((ou_deviation_law(kind, t, b0, &tc)?, cov, corr))
        }
        (Some(_), Some(_)) => Err(Error::Unsupported("endpoint conditioning is only available for the Wiener process".into())),
    }
}

fn sampler(setup: &Setup, extra: &[f64]) -> Result<(SampleGrid, Arc<Plan>)> {
    let sg = SampleGrid::new(setup.spec.horizon, setup.n_steps, extra)?;
    let plan = Arc::new(Plan::new(sg.grid.clone(), setup.process)?);
    Ok((sg, plan))
}

/// Mean, variance, absolute mean of the deviation at `t`, and covariance and
/// correlation of bridge and process, each against its closed form. With
/// `d`, the driver is conditioned on `W_T = d` (Wiener only) and only the
/// deviation statistics are reported.
pub fn estimate_pointwise(kind: BridgeKind, t: f64, d: Option<f64>, setup: &Setup) -> Result<Vec<EstimateReport>> {
    let h = setup.spec.horizon;
    if !(t > 0.0 && t < h) {
        return domain(format!("pointwise statistics need t in (0, {h}), got {t}"));
    }
    if setup.reps < 1000 {
        return domain("pointwise estimates need at least 1000 replicates");
    }
    let (law, cov_o, corr_o) = pointwise_oracles(kind, t, setup, d)?;
    let (sg, plan) = sampler(setup, &[t])?;
    let k = sg.index(t);
    let mut lay = Layout::new();
    let dev = lay.scalar(law.mean);
    let abs = lay.scalar(0.0);
    let pair = lay.pair(0.0, 0.0);
    let spec = setup.spec;
    let tot = run(setup.exec, &lay, setup.reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(setup.seed, r));
        b.set_endpoints(spec)?;
        if let Some(d) = d {
            b.condition_on_endpoint(d)?;
        }
        let x = b.deviation(kind)[k];
        dev.push(tally, x);
        abs.push(tally, x.abs());
        pair.push(tally, b.bridge(kind)[k], b.process()[k]);
        Ok(())
    })?;
    let info = setup.info(&[("t", t)]);
    let info = match d {
        Some(d) => info.with(&[("d", d)]),
        None => info,
    };
    let name = |s: &str| format!("{}.{s}.{kind}", setup.prefix());
    let s = dev.stats(&tot);
    let a = abs.stats(&tot);
    let mut out = vec![
        info.matches(name("dev_mean"), s.mean, s.se_mean, law.mean),
        info.matches(name("dev_var"), s.var, s.se_var, law.variance),
        info.matches(name("abs_dev"), a.mean, a.se_mean, folded_mean(law)?),
    ];
    if d.is_none() {
        let p = pair.stats(&tot);
        out.push(info.matches(name("cov_with_process"), p.cov, p.se_cov, cov_o));
        out.push(info.matches(name("corr_with_process"), p.corr, p.se_corr, corr_o));
    }
    Ok(out)
}

/// Expected quadratic deviation `E∫_0^T (X - X^kind)² dt`, from the
/// refined trapezoid value per replicate.
pub fn estimate_integrated(kind: BridgeKind, d: Option<f64>, setup: &Setup) -> Result<EstimateReport> {
    if setup.n_steps < 256 {
        return domain("integrated estimates need at least 256 steps");
    }
    let tc = setup.time_change()?;
    let h = setup.spec.horizon;
    let oracle = match (&tc, d) {
        (None, None) => expected_quad_dev(kind, &setup.spec),
        (None, Some(d)) => expected_cond_quad_dev(kind, setup.spec.reduced_b(), d, h),
        (Some(tc), None) => {
            let b0 = setup.spec.b - setup.spec.a * (tc.params.q * h).exp();
            ou_expected_quad_dev(kind, b0, tc)?
        }
        (Some(_), Some(_)) => {
            return Err(Error::Unsupported("endpoint conditioning is only available for the Wiener process".into()))
        }
    };
    let (sg, plan) = sampler(setup, &[])?;
    let mut lay = Layout::new();
    let est = lay.scalar(oracle);
    let bias = lay.scalar(0.0);
    let spec = setup.spec;
    let tot = run(setup.exec, &lay, setup.reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(setup.seed, r));
        b.set_endpoints(spec)?;
        if let Some(d) = d {
            b.condition_on_endpoint(d)?;
        }
        let (v, e) = refine(sg.integrals(b.deviation(kind), |x| x * x));
        est.push(tally, v);
        bias.push(tally, e);
        Ok(())
    })?;
    let info = match d {
        Some(d) => setup.info(&[("d", d)]),
        None => setup.info(&[]),
    };
    let s = est.stats(&tot);
    Ok(info
        .matches(format!("{}.quad_dev.{kind}", setup.prefix()), s.mean, s.se_mean, oracle)
        .with_bias(bias.stats(&tot).mean))
}

/// Bridge covariance `Cov(X^kind_s, X^kind_t)` against the closed form.
pub fn estimate_bridge_cov(kind: BridgeKind, s: f64, t: f64, setup: &Setup) -> Result<EstimateReport> {
    let oracle = match setup.time_change()? {
        None => bridge_cov(s, t, setup.spec.horizon)?,
        Some(tc) => ou_bridge_cov(s, t, &tc)?,
    };
    let (sg, plan) = sampler(setup, &[s, t])?;
    let (i, j) = (sg.index(s), sg.index(t));
    let mut lay = Layout::new();
    let pair = lay.pair(0.0, 0.0);
    let spec = setup.spec;
    let tot = run(setup.exec, &lay, setup.reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(setup.seed, r));
        b.set_endpoints(spec)?;
        pair.push(tally, b.bridge(kind)[i], b.bridge(kind)[j]);
        Ok(())
    })?;
    let p = pair.stats(&tot);
    Ok(setup.info(&[("s", s), ("t", t)]).matches(format!("{}.bridge_cov.{kind}", setup.prefix()), p.cov, p.se_cov, oracle))
}
