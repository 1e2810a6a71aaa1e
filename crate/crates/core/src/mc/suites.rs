//! Verification suites: each runs the Monte Carlo harness at fixed settings
//! and gates every estimate against its closed form.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::ou::{ou_bridge_cov, ou_bridge_mean, ou_cov_with_process, ou_deviation_law, ou_expected_quad_dev, ou_expected_quad_dev_printed, ou_mean_square_term, ProcessParams, TimeChange};
use crate::path::{PathBundle, Plan, Process, SeedSpec};
use crate::scalar_gauss::GaussianMoment;
use crate::wiener::{bridge_cov, cond_deviation_law, corr_with_process, cov_with_process, deviation_law, expected_abs_dev, expected_cond_quad_dev, expected_quad_dev, BridgeKind, BridgeSpec, RegionPoint};

use super::accum::{Layout, Scalar};
use super::backends::{backend_crosscheck, zero_noise_gap};
use super::estimate::{refine, SampleGrid};
use super::exec::{run, Exec};
use super::regions::{region_map_mc, sweep_region_grid, SPOT_POINTS};
use super::report::{EstimateReport, RunInfo, SuiteReport};

use BridgeKind::{Av, Ir, St};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    WienerUnconditional,
    WienerConditional,
    Ou,
    Regions,
    Backends,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["wiener-unconditional", "wiener-conditional", "ou", "regions", "backends", "all"];

    pub fn name(self) -> &'static str {
        Suite::NAMES[self as usize]
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use Suite::*;
        [WienerUnconditional, WienerConditional, Ou, Regions, Backends, All]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite {s:?} (expected one of {})", Suite::NAMES.join(", "))))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub reps: u64,
    pub seed: u64,
    pub n_steps: usize,
    /// Resolution of the region grid sweep.
    pub grid: usize,
    pub exec: Exec,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { reps: 100_000, seed: 42, n_steps: 1024, grid: 201, exec: Exec::default() }
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.reps < 1000 {
        return domain("suites need at least 1000 replicates");
    }
    if cfg.n_steps < 256 || !cfg.n_steps.is_power_of_two() {
        return domain("suites need a power-of-two step count of at least 256");
    }
    if cfg.grid < 2 {
        return domain("region grid resolution must be at least 2");
    }
    let reports = match suite {
        Suite::WienerUnconditional => wiener_unconditional(cfg)?,
        Suite::WienerConditional => wiener_conditional(cfg)?,
        Suite::Ou => ou(cfg)?,
        Suite::Regions => regions(cfg)?,
        Suite::Backends => backends(cfg)?,
        Suite::All => {
            let mut all = wiener_unconditional(cfg)?;
            all.extend(wiener_conditional(cfg)?);
            all.extend(ou(cfg)?);
            all.extend(regions(cfg)?);
            all.extend(backends(cfg)?);
            all
        }
    };
    Ok(SuiteReport::new(suite.name(), cfg.seed, cfg.reps, reports))
}

fn kinds<T>(f: impl FnMut(BridgeKind) -> T) -> [T; 3] {
    BridgeKind::ALL.map(f)
}

/// Reports for one refined integral and its bias estimate.
fn integral_report(info: &RunInfo, name: String, est: &Scalar, bias: &Scalar, tot: &super::accum::Totals, oracle: f64) -> EstimateReport {
    let s = est.stats(tot);
    info.matches(name, s.mean, s.se_mean, oracle).with_bias(bias.stats(tot).mean)
}

/// Number of times `f` fails to decrease strictly over `n` points of
/// `[from, to)`.
fn increases(from: f64, to: f64, n: usize, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut prev = f64::INFINITY;
    let mut count = 0;
    for i in 0..n {
        let v = f(from + (to - from) * i as f64 / n as f64)?;
        if !(v < prev) {
            count += 1;
        }
        prev = v;
    }
    Ok(count as f64)
}

fn wiener_unconditional(cfg: &SuiteConfig) -> Result<Vec<EstimateReport>> {
    let ts: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let sg = SampleGrid::new(1.0, cfg.n_steps, &[0.25, 0.5, 0.75].iter().chain(&ts).copied().collect::<Vec<_>>())?;
    let plan = Arc::new(Plan::new(sg.grid.clone(), Process::Wiener)?);
    let spec = BridgeSpec::new(0.0, 0.0, 1.0)?;
    let info = RunInfo::new(cfg.seed, cfg.reps, cfg.n_steps, &[("a", 0.0), ("b", 0.0), ("T", 1.0)]);

    let quad_oracle = kinds(|k| expected_quad_dev(k, &spec));
    let mid_law: [GaussianMoment; 3] = kinds(|k| deviation_law(k, 0.5, &spec).expect("interior time"));
    let mut lay = Layout::new();
    let quad = kinds(|k| lay.scalar(quad_oracle[k.index()]));
    let bias = kinds(|_| lay.scalar(0.0));
    let diffs = [(Av, Ir), (St, Ir), (Av, St)].map(|(x, y)| (x, y, lay.scalar(quad_oracle[x.index()] - quad_oracle[y.index()])));
    let corr: Vec<[_; 3]> = ts.iter().map(|_| kinds(|_| lay.pair(0.0, 0.0))).collect();
    let mid = kinds(|k| lay.scalar(mid_law[k.index()].mean));
    let mid_abs = kinds(|_| lay.scalar(0.0));
    let bcov = kinds(|_| lay.pair(0.0, 0.0));
    let ir_end = lay.scalar(0.0);
    let w_end = lay.scalar(0.0);
    let halves = lay.pair(0.0, 0.0);

    let idx_t: Vec<usize> = ts.iter().map(|&t| sg.index(t)).collect();
    let (i_mid, i_q1, i_q3) = (sg.index(0.5), sg.index(0.25), sg.index(0.75));
    let last = sg.grid.n_steps() - 1;
    let tot = run(cfg.exec, &lay, cfg.reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(cfg.seed, r));
        let mut refined = [0.0; 3];
        for k in BridgeKind::ALL {
            let i = k.index();
            let (v, e) = refine(sg.integrals(b.deviation(k), |x| x * x));
            refined[i] = v;
            quad[i].push(tally, v);
            bias[i].push(tally, e);
            for (j, &ti) in idx_t.iter().enumerate() {
                corr[j][i].push(tally, b.bridge(k)[ti], b.process()[ti]);
            }
            let x = b.deviation(k)[i_mid];
            mid[i].push(tally, x);
            mid_abs[i].push(tally, x.abs());
            bcov[i].push(tally, b.bridge(k)[i_q1], b.bridge(k)[i_q3]);
        }
        for (x, y, s) in &diffs {
            s.push(tally, refined[x.index()] - refined[y.index()]);
        }
        ir_end.push(tally, b.bridge(Ir)[last]);
        w_end.push(tally, b.driver_end());
        halves.push(tally, b.driver()[i_mid], b.driver_end() - b.driver()[i_mid]);
        Ok(())
    })?;

    let mut out = Vec::new();
    for k in BridgeKind::ALL {
        let i = k.index();
        out.push(integral_report(&info, format!("wu.quad_dev.{k}"), &quad[i], &bias[i], &tot, quad_oracle[i]));
    }
    for (x, y, s) in &diffs {
        let st = s.stats(&tot);
        let analytic = quad_oracle[x.index()] - quad_oracle[y.index()];
        let name = format!("wu.quad_dev_gap.{x}-{y}");
        out.push(if analytic == 0.0 {
            info.matches(name, st.mean, st.se_mean, 0.0)
                .with_note("equal expectations; the paired difference is gated as consistent with 0")
        } else {
            info.positive(name, st.mean, st.se_mean, analytic)
        });
    }
    for (j, &t) in ts.iter().enumerate() {
        let p = kinds(|k| corr[j][k.index()].stats(&tot));
        let at = info.with(&[("t", t)]);
        for k in BridgeKind::ALL {
            let s = &p[k.index()];
            out.push(at.matches(format!("wu.cov_with_process.{k}@t={t}"), s.cov, s.se_cov, cov_with_process(k, t, 1.0)?));
            out.push(at.matches(format!("wu.corr_with_process.{k}@t={t}"), s.corr, s.se_corr, corr_with_process(k, t, 1.0)?));
        }
        let (ir, av) = (&p[Ir.index()], &p[Av.index()]);
        let gap = ir.corr - av.corr;
        let se = ir.se_corr.hypot(av.se_corr);
        let analytic = corr_with_process(Ir, t, 1.0)? - corr_with_process(Av, t, 1.0)?;
        let name = format!("wu.corr_gap.ir-av@t={t}");
        out.push(if analytic > 0.005 { at.positive(name, gap, se, analytic) } else { at.info(name, gap, se, Some(analytic)) });
    }
    let at = info.with(&[("t", 0.5)]);
    for k in BridgeKind::ALL {
        let i = k.index();
        let s = mid[i].stats(&tot);
        out.push(at.matches(format!("wu.dev_mean.{k}@t=0.5"), s.mean, s.se_mean, mid_law[i].mean));
        out.push(at.matches(format!("wu.dev_var.{k}@t=0.5"), s.var, s.se_var, mid_law[i].variance));
        let a = mid_abs[i].stats(&tot);
        out.push(at.matches(format!("wu.abs_dev.{k}@t=0.5"), a.mean, a.se_mean, expected_abs_dev(k, 0.5, &spec)?));
    }
    let at = info.with(&[("s", 0.25), ("t", 0.75)]);
    for k in BridgeKind::ALL {
        let p = bcov[k.index()].stats(&tot);
        out.push(at.matches(format!("wu.bridge_cov.{k}@s=0.25,t=0.75"), p.cov, p.se_cov, bridge_cov(0.25, 0.75, 1.0)?));
    }
    let t_last = sg.grid.points()[last];
    let s = ir_end.stats(&tot);
    let bound = 1.1 * bridge_cov(t_last, t_last, 1.0)?.sqrt();
    out.push(info.with(&[("t", t_last)]).at_most("wu.ir_sd_at_last_interior_point", s.var.sqrt(), bound));
    out.push(info.exact("wu.bridge_var_increases_near_T", increases(0.9, 1.0, 1000, |t| bridge_cov(t, t, 1.0))?, 0.0));
    let s = w_end.stats(&tot);
    out.push(info.matches("wu.driver_var_at_T", s.var, s.se_var, 1.0));
    let p = halves.stats(&tot);
    out.push(info.matches("wu.driver_half_increment_corr", p.corr, p.se_corr, 0.0));
    Ok(out)
}

fn wiener_conditional(cfg: &SuiteConfig) -> Result<Vec<EstimateReport>> {
    let ds = [0.0, 1.0, 2.0];
    let b_end = 0.0;
    let sg = SampleGrid::new(1.0, cfg.n_steps, &[0.5])?;
    let plan = Arc::new(Plan::new(sg.grid.clone(), Process::Wiener)?);
    let info = RunInfo::new(cfg.seed, cfg.reps, cfg.n_steps, &[("a", 0.0), ("b", b_end), ("T", 1.0)]);
    let oracle: Vec<[f64; 3]> = ds.iter().map(|&d| kinds(|k| expected_cond_quad_dev(k, b_end, d, 1.0))).collect();
    let laws: Vec<[GaussianMoment; 3]> = ds
        .iter()
        .map(|&d| kinds(|k| cond_deviation_law(k, 0.5, b_end, d, 1.0).expect("interior time")))
        .collect();
    let mut lay = Layout::new();
    let quad: Vec<[Scalar; 3]> = oracle.iter().map(|o| kinds(|k| lay.scalar(o[k.index()]))).collect();
    let bias: Vec<[Scalar; 3]> = ds.iter().map(|_| kinds(|_| lay.scalar(0.0))).collect();
    let mid: Vec<[Scalar; 3]> = laws.iter().map(|l| kinds(|k| lay.scalar(l[k.index()].mean))).collect();
    let av_abs: Vec<Scalar> = ds.iter().map(|_| lay.scalar(0.0)).collect();
    let pin_miss: Vec<Scalar> = ds.iter().map(|_| lay.scalar(0.0)).collect();
    let i_mid = sg.index(0.5);
    let tot = run(cfg.exec, &lay, cfg.reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(cfg.seed, r));
        for (j, &d) in ds.iter().enumerate() {
            b.condition_on_endpoint(d)?;
            for k in BridgeKind::ALL {
                let i = k.index();
                let (v, e) = refine(sg.integrals(b.deviation(k), |x| x * x));
                quad[j][i].push(tally, v);
                bias[j][i].push(tally, e);
                mid[j][i].push(tally, b.deviation(k)[i_mid]);
            }
            av_abs[j].push(tally, sg.integrals(b.deviation(Av), |x| x * x).0.abs());
            pin_miss[j].push(tally, if b.driver_end() == d { 0.0 } else { 1.0 });
        }
        Ok(())
    })?;
    let mut out = Vec::new();
    for (j, &d) in ds.iter().enumerate() {
        let at = info.with(&[("d", d)]);
        for k in BridgeKind::ALL {
            let i = k.index();
            out.push(integral_report(&at, format!("wc.quad_dev.{k}@d={d}"), &quad[j][i], &bias[j][i], &tot, oracle[j][i]));
        }
        let at_mid = at.with(&[("t", 0.5)]);
        for k in BridgeKind::ALL {
            let i = k.index();
            let s = mid[j][i].stats(&tot);
            out.push(at_mid.matches(format!("wc.dev_mean.{k}@t=0.5,d={d}"), s.mean, s.se_mean, laws[j][i].mean));
            out.push(at_mid.matches(format!("wc.dev_var.{k}@t=0.5,d={d}"), s.var, s.se_var, laws[j][i].variance));
        }
        if d == b_end {
            let s = av_abs[j].stats(&tot);
            out.push(at.exact(format!("wc.av_integral_abs_sum@d={d}"), s.mean, 0.0));
        }
        out.push(at.exact(format!("wc.driver_end_mismatches@d={d}"), pin_miss[j].stats(&tot).mean * cfg.reps as f64, 0.0));
    }
    Ok(out)
}

/// One OU run: `b = 0` statistics, plus the `b = 2` integrals and `b = 1`
/// bridge means on the same paths when `extra` is set.
fn ou_run(cfg: &SuiteConfig, q: f64, reps: u64, extra: bool, out: &mut Vec<EstimateReport>) -> Result<()> {
    let params = ProcessParams::new(q, 1.0)?;
    let tc = TimeChange::new(params, 1.0)?;
    let mean_ts: Vec<f64> = (1..=16).map(|j| (2 * j - 1) as f64 / 32.0).collect();
    let sg = SampleGrid::new(1.0, cfg.n_steps, &[0.5])?;
    let plan = Arc::new(Plan::new(sg.grid.clone(), Process::Ou(params))?);
    let tag = format!("q={q}");
    let info = RunInfo::new(cfg.seed, reps, cfg.n_steps, &[("a", 0.0), ("b", 0.0), ("T", 1.0), ("q", q), ("sigma", 1.0)]);
    let oracle = [ou_expected_quad_dev(Av, 0.0, &tc)?, ou_expected_quad_dev(Ir, 0.0, &tc)?, ou_expected_quad_dev(St, 0.0, &tc)?];
    let oracle_b2: [f64; 3] = [ou_expected_quad_dev(Av, 2.0, &tc)?, ou_expected_quad_dev(Ir, 2.0, &tc)?, ou_expected_quad_dev(St, 2.0, &tc)?];
    let laws = [ou_deviation_law(Av, 0.5, 0.0, &tc)?, ou_deviation_law(Ir, 0.5, 0.0, &tc)?, ou_deviation_law(St, 0.5, 0.0, &tc)?];

    let mut lay = Layout::new();
    let quad = kinds(|k| lay.scalar(oracle[k.index()]));
    let bias = kinds(|_| lay.scalar(0.0));
    let pairs = [(Av, Ir), (St, Ir), (Av, St)];
    let diffs = pairs.map(|(x, y)| lay.scalar(oracle[x.index()] - oracle[y.index()]));
    let mid = kinds(|k| lay.scalar(laws[k.index()].mean));
    let cov = kinds(|_| lay.pair(0.0, 0.0));
    let quad_b2 = kinds(|k| lay.scalar(oracle_b2[k.index()]));
    let bias_b2 = kinds(|_| lay.scalar(0.0));
    let means: Vec<[Scalar; 3]> = mean_ts.iter().map(|_| kinds(|_| lay.scalar(0.0))).collect();
    let i_mid = sg.index(0.5);
    let idx_means: Vec<usize> = mean_ts.iter().map(|&t| sg.index(t)).collect();
    let spec0 = BridgeSpec::new(0.0, 0.0, 1.0)?;
    let spec1 = BridgeSpec::new(0.0, 1.0, 1.0)?;
    let spec2 = BridgeSpec::new(0.0, 2.0, 1.0)?;
    let tot = run(cfg.exec, &lay, reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(cfg.seed, r));
        b.set_endpoints(spec0)?;
        let mut refined = [0.0; 3];
        for k in BridgeKind::ALL {
            let i = k.index();
            let (v, e) = refine(sg.integrals(b.deviation(k), |x| x * x));
            refined[i] = v;
            quad[i].push(tally, v);
            bias[i].push(tally, e);
            mid[i].push(tally, b.deviation(k)[i_mid]);
            cov[i].push(tally, b.bridge(k)[i_mid], b.process()[i_mid]);
        }
        for (s, (x, y)) in diffs.iter().zip(pairs) {
            s.push(tally, refined[x.index()] - refined[y.index()]);
        }
        if extra {
            b.set_endpoints(spec2)?;
            for k in BridgeKind::ALL {
                let (v, e) = refine(sg.integrals(b.deviation(k), |x| x * x));
                quad_b2[k.index()].push(tally, v);
                bias_b2[k.index()].push(tally, e);
            }
            b.set_endpoints(spec1)?;
            for (j, &ti) in idx_means.iter().enumerate() {
                for k in BridgeKind::ALL {
                    means[j][k.index()].push(tally, b.bridge(k)[ti]);
                }
            }
        }
        Ok(())
    })?;

    for k in BridgeKind::ALL {
        let i = k.index();
        out.push(integral_report(&info, format!("ou.quad_dev.{k}@{tag}"), &quad[i], &bias[i], &tot, oracle[i]));
    }
    if q.abs() >= 2.0 {
        // adjacent gaps in the oracle ordering
        let mut order = BridgeKind::ALL;
        order.sort_by(|x, y| oracle[x.index()].total_cmp(&oracle[y.index()]));
        for w in order.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (j, sign) = pairs
                .iter()
                .enumerate()
                .find_map(|(j, &(x, y))| {
                    if (x, y) == (hi, lo) {
                        Some((j, 1.0))
                    } else if (x, y) == (lo, hi) {
                        Some((j, -1.0))
                    } else {
                        None
                    }
                })
                .expect("every pair is tracked");
            let s = diffs[j].stats(&tot);
            let analytic = oracle[hi.index()] - oracle[lo.index()];
            out.push(info.positive(format!("ou.quad_dev_gap.{hi}-{lo}@{tag}"), sign * s.mean, s.se_mean, analytic));
        }
    }
    let at = info.with(&[("t", 0.5)]);
    for k in BridgeKind::ALL {
        let i = k.index();
        let s = mid[i].stats(&tot);
        out.push(at.matches(format!("ou.dev_var.{k}@t=0.5,{tag}"), s.var, s.se_var, laws[i].variance));
        let p = cov[i].stats(&tot);
        out.push(at.matches(format!("ou.cov_with_process.{k}@t=0.5,{tag}"), p.cov, p.se_cov, ou_cov_with_process(k, 0.5, &tc)?));
    }
    if extra {
        let at = info.with(&[("b", 2.0)]);
        for k in BridgeKind::ALL {
            let i = k.index();
            out.push(integral_report(&at, format!("ou.quad_dev.{k}@{tag},b=2"), &quad_b2[i], &bias_b2[i], &tot, oracle_b2[i]));
        }
        let s = quad_b2[St.index()].stats(&tot);
        let printed = ou_expected_quad_dev_printed(St, 2.0, &tc)?;
        let z = (s.mean - printed) / s.se_mean;
        let flag = if z.abs() > 6.0 { "outside" } else { "within" };
        out.push(at.info(format!("ou.quad_dev_printed.st@{tag},b=2"), s.mean, s.se_mean, Some(printed)).with_note(format!(
            "the value without the b^2 mean term is {flag} 6 SE of the estimate (z = {z:.2}); the mean term is {:.15}",
            ou_mean_square_term(2.0, &tc)
        )));
        let at = info.with(&[("b", 1.0)]);
        for (j, &t) in mean_ts.iter().enumerate() {
            let o = ou_bridge_mean(t, 0.0, 1.0, &tc)?;
            for k in BridgeKind::ALL {
                let s = means[j][k.index()].stats(&tot);
                out.push(at.with(&[("t", t)]).matches(format!("ou.bridge_mean.{k}@t={t},{tag},b=1"), s.mean, s.se_mean, o));
            }
        }
    }
    out.push(info.exact(format!("ou.bridge_var_increases_near_T@{tag}"), increases(0.9, 1.0, 1000, |t| ou_bridge_cov(t, t, &tc))?, 0.0));
    Ok(())
}

fn ou(cfg: &SuiteConfig) -> Result<Vec<EstimateReport>> {
    let mut out = Vec::new();
    for q in [2.0, -2.0] {
        ou_run(cfg, q, cfg.reps, false, &mut out)?;
    }
    for q in [1.0, -1.0] {
        ou_run(cfg, q, cfg.reps, q > 0.0, &mut out)?;
    }
    // small rate against the Wiener closed forms
    let q = 1e-4;
    let reps = (cfg.reps / 5).max(1000);
    let params = ProcessParams::new(q, 1.0)?;
    let sg = SampleGrid::new(1.0, cfg.n_steps, &[])?;
    let plan = Arc::new(Plan::new(sg.grid.clone(), Process::Ou(params))?);
    let spec = BridgeSpec::new(0.0, 0.0, 1.0)?;
    let wiener = kinds(|k| expected_quad_dev(k, &spec));
    let mut lay = Layout::new();
    let quad = kinds(|k| lay.scalar(wiener[k.index()]));
    let bias = kinds(|_| lay.scalar(0.0));
    let tot = run(cfg.exec, &lay, reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(cfg.seed, r));
        for k in BridgeKind::ALL {
            let (v, e) = refine(sg.integrals(b.deviation(k), |x| x * x));
            quad[k.index()].push(tally, v);
            bias[k.index()].push(tally, e);
        }
        Ok(())
    })?;
    let info = RunInfo::new(cfg.seed, reps, cfg.n_steps, &[("a", 0.0), ("b", 0.0), ("T", 1.0), ("q", q), ("sigma", 1.0)]);
    for k in BridgeKind::ALL {
        let i = k.index();
        out.push(
            integral_report(&info, format!("ou.quad_dev_vs_wiener.{k}@q={q}"), &quad[i], &bias[i], &tot, wiener[i])
                .with_note("oracle is the Wiener closed form"),
        );
    }
    Ok(out)
}

fn regions(cfg: &SuiteConfig) -> Result<Vec<EstimateReport>> {
    let mut out = Vec::new();
    let sweep = sweep_region_grid(cfg.grid, 10.0);
    let info = RunInfo::new(cfg.seed, 0, 0, &[("resolution", cfg.grid as f64), ("half_width", 10.0)]);
    out.push(info.exact("regions.grid_disagreements", sweep.disagreements as f64, 0.0));
    out.push(info.exact("regions.grid_misplaced_d", sweep.misplaced_d as f64, 0.0));
    out.push(info.exact("regions.grid_all_letters_present", sweep.has_all_letters() as u8 as f64, 1.0).with_note(
        sweep.counts.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" "),
    ));
    let pts: Vec<RegionPoint> = SPOT_POINTS.iter().map(|&(b, d)| RegionPoint { b_tilde: b, d_tilde: d }).collect();
    let spots = region_map_mc(&pts, cfg.n_steps, cfg.reps, cfg.seed, cfg.exec)?;
    let info = RunInfo::new(cfg.seed, cfg.reps, cfg.n_steps, &[("a", 0.0), ("T", 1.0)]);
    for s in &spots {
        let (bb, d) = (s.point.b_tilde, s.point.d_tilde);
        let at = info.with(&[("b", bb), ("d", d)]);
        let tag = format!("b={bb},d={d}");
        for k in BridgeKind::ALL {
            let i = k.index();
            out.push(at.matches(format!("regions.value.{k}@{tag}"), s.estimates[i], s.se[i], s.oracle[i]));
        }
        out.push(
            at.exact(format!("regions.label_agrees@{tag}"), (s.mc_label == s.oracle_label) as u8 as f64, 1.0)
                .with_note(format!("oracle {}, estimate {}", s.oracle_label, s.mc_label)),
        );
        for g in 0..2 {
            out.push(at.positive(format!("regions.gap{}@{tag}", g + 1), s.gaps[g], s.gap_se[g], {
                let v = s.oracle;
                match s.oracle_label {
                    crate::wiener::RegionLabel::Ordered(o) => v[o[g + 1].index()] - v[o[g].index()],
                    crate::wiener::RegionLabel::Boundary => 0.0,
                }
            }));
        }
    }
    Ok(out)
}

fn backends(cfg: &SuiteConfig) -> Result<Vec<EstimateReport>> {
    let reps = cfg.reps.min(2000);
    let spec = BridgeSpec::new(0.0, 0.0, 1.0)?;
    let mut out = Vec::new();
    let cases = [
        ("wiener", Process::Wiener),
        ("ou@q=1", Process::Ou(ProcessParams::new(1.0, 1.0)?)),
        ("ou@q=-1", Process::Ou(ProcessParams::new(-1.0, 1.0)?)),
    ];
    for (tag, process) in cases {
        let c = backend_crosscheck(process, spec, cfg.n_steps, 3, reps, cfg.seed, cfg.exec)?;
        let mut params = vec![("a", 0.0), ("b", 0.0), ("T", 1.0)];
        if let Process::Ou(p) = process {
            params.push(("q", p.q));
            params.push(("sigma", p.sigma));
        }
        let info = RunInfo::new(cfg.seed, reps, cfg.n_steps, &params);
        for (l, &n) in c.steps.iter().enumerate() {
            out.push(info.with(&[("n", n as f64)]).info(format!("backends.{tag}.rms_error@n={n}"), c.rms[l], c.rms_se[l], None));
        }
        let worst = c.rms.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        out.push(
            info.below(format!("backends.{tag}.rms_ratio_max"), worst, 1.0).with_note(format!(
                "empirical rates {}",
                c.rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
            )),
        );
        out.push(info.exact(format!("backends.{tag}.zero_noise_gap"), zero_noise_gap(process, spec, cfg.n_steps)?, 0.0));
        let oracle = match process {
            Process::Wiener => bridge_cov(0.5, 0.5, 1.0)?,
            Process::Ou(p) => ou_bridge_cov(0.5, 0.5, &TimeChange::new(p, 1.0)?)?,
        };
        out.push(
            info.with(&[("t", 0.5)])
                .matches(format!("backends.{tag}.euler_var@t=0.5"), c.mid_var.0, c.mid_var.1, oracle)
                .with_note("Euler marginal variance; its O(h) bias is far below the sampling error at this size"),
        );
    }
    Ok(out)
}
