//! The `(b̃, d̃)` region map: exhaustive oracle sweep and Monte Carlo spot
//! checks of the ordering of the three conditional expected quadratic
//! deviations.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::Result;
use crate::path::{PathBundle, Plan, Process, SeedSpec};
use crate::wiener::{region_classify, region_values, BridgeKind, BridgeSpec, RegionLabel, RegionPoint};

use super::accum::Layout;
use super::estimate::{refine, SampleGrid};
use super::exec::{run, Exec};

/// Smallest `b̃²` at which the ordering `av < st < ir` can occur.
pub const D_THRESHOLD: f64 = 224.0 / 9.0;

/// Spot-check points: one per lettered region, then two within about 0.5
/// of a boundary curve.
pub const SPOT_POINTS: [(f64, f64); 6] = [(0.0, 0.0), (0.0, 0.7), (0.0, 2.0), (8.0, 3.0), (0.0, 1.7), (8.0, 4.6)];

/// Labels of a `resolution × resolution` grid over `[-half, half]²`.
pub fn region_grid(resolution: usize, half: f64) -> Vec<(RegionPoint, RegionLabel)> {
    let coord = |i: usize| {
        if resolution == 1 {
            0.0
        } else {
            -half + 2.0 * half * i as f64 / (resolution - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let p = RegionPoint { b_tilde: coord(i), d_tilde: coord(j) };
            out.push((p, region_classify(p)));
        }
    }
    out
}

/// Outcome of checking a grid sweep against direct comparison of the three
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSweep {
    pub points: usize,
    pub boundary: usize,
    /// Non-boundary points where the label disagrees with sorting the values.
    pub disagreements: usize,
    /// Points labeled D with `b̃² < 224/9`.
    pub misplaced_d: usize,
    pub counts: BTreeMap<String, usize>,
}

impl GridSweep {
    pub fn has_all_letters(&self) -> bool {
        ["A", "B", "C", "D"].iter().all(|l| self.counts.get(*l).copied().unwrap_or(0) > 0)
    }
}

pub fn sweep_region_grid(resolution: usize, half: f64) -> GridSweep {
    let mut s = GridSweep { points: 0, boundary: 0, disagreements: 0, misplaced_d: 0, counts: BTreeMap::new() };
    for (p, label) in region_grid(resolution, half) {
        s.points += 1;
        *s.counts.entry(label.to_string()).or_insert(0) += 1;
        let RegionLabel::Ordered(order) = label else {
            s.boundary += 1;
            continue;
        };
        let v = region_values(p);
        let sorted = order.windows(2).all(|w| v[w[0].index()] < v[w[1].index()]);
        if !sorted {
            s.disagreements += 1;
        }
        if label.letter() == Some('D') && p.b_tilde * p.b_tilde < D_THRESHOLD {
            s.misplaced_d += 1;
        }
    }
    s
}

/// Monte Carlo values at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpot {
    pub point: RegionPoint,
    pub oracle_label: RegionLabel,
    pub mc_label: RegionLabel,
    /// Estimates and oracle values in `BridgeKind::ALL` order.
    pub estimates: [f64; 3],
    pub se: [f64; 3],
    pub oracle: [f64; 3],
    /// Adjacent gaps in the oracle ordering (upper minus lower) and their
    /// standard errors.
    pub gaps: [f64; 2],
    pub gap_se: [f64; 2],
}

impl RegionSpot {
    pub fn agrees(&self, gate: f64) -> bool {
        self.mc_label == self.oracle_label && (0..2).all(|g| self.gaps[g] > gate * self.gap_se[g])
    }
}

/// Estimates the three conditional expected quadratic deviations (`T = 1`,
/// `a = 0`) at every point from one set of replicates.
///
/// The conditioned deviation is affine in `(b, d)`:
/// `dev = base + d·γ - b·t`, with `base` the path conditioned on `W_1 = 0`
/// and `γ` the noise-free path conditioned on `W_1 = 1`. The replicates
/// therefore only need the three random integrals `∫base²`, `∫base·γ`,
/// `∫base·t` per kind.
pub fn region_map_mc(points: &[RegionPoint], n_steps: usize, reps: u64, seed: u64, exec: Exec) -> Result<Vec<RegionSpot>> {
    let sg = SampleGrid::new(1.0, n_steps, &[])?;
    let plan = Arc::new(Plan::new(sg.grid.clone(), Process::Wiener)?);
    let times = sg.grid.points().to_vec();
    let mut unit = PathBundle::zeros(plan.clone());
    unit.condition_on_endpoint(1.0)?;
    let gamma: Vec<Vec<f64>> = BridgeKind::ALL.iter().map(|&k| unit.deviation(k).to_vec()).collect();
    let det: Vec<[f64; 3]> = gamma
        .iter()
        .map(|g| {
            [
                refine(sg.cross_integrals(g, g)).0,
                refine(sg.cross_integrals(&times, &times)).0,
                refine(sg.cross_integrals(g, &times)).0,
            ]
        })
        .collect();

    let mut lay = Layout::new();
    let vec = lay.vector(vec![0.0; 9]);
    let spec = BridgeSpec::new(0.0, 0.0, 1.0)?;
    let tot = run(exec, &lay, reps, || Ok(PathBundle::zeros(plan.clone())), |b, r, tally| {
        b.resample(SeedSpec::new(seed, r));
        b.set_endpoints(spec)?;
        b.condition_on_endpoint(0.0)?;
        let mut xs = [0.0; 9];
        for k in BridgeKind::ALL {
            let base = b.deviation(k);
            let i = 3 * k.index();
            xs[i] = refine(sg.cross_integrals(base, base)).0;
            xs[i + 1] = refine(sg.cross_integrals(base, &gamma[k.index()])).0;
            xs[i + 2] = refine(sg.cross_integrals(base, &times)).0;
        }
        vec.push(tally, &xs);
        Ok(())
    })?;
    let stats = vec.stats(&tot);

    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        let (bb, d) = (p.b_tilde, p.d_tilde);
        // coefficient vector of each kind's estimate over the 9 integrals
        let coef = |k: usize| {
            let mut c = [0.0; 9];
            c[3 * k] = 1.0;
            c[3 * k + 1] = 2.0 * d;
            c[3 * k + 2] = -2.0 * bb;
            c
        };
        let constant = |k: usize| d * d * det[k][0] + bb * bb * det[k][1] - 2.0 * bb * d * det[k][2];
        let mut estimates = [0.0; 3];
        let mut se = [0.0; 3];
        for k in 0..3 {
            let (e, s) = stats.linear(&coef(k));
            estimates[k] = e + constant(k);
            se[k] = s;
        }
        let oracle_label = region_classify(p);
        let mut order = BridgeKind::ALL;
        order.sort_by(|x, y| estimates[x.index()].total_cmp(&estimates[y.index()]));
        let mc_label = RegionLabel::Ordered(order);
        let mut gaps = [0.0; 2];
        let mut gap_se = [0.0; 2];
        if let RegionLabel::Ordered(o) = oracle_label {
            for g in 0..2 {
                let (lo, hi) = (o[g].index(), o[g + 1].index());
                let c: Vec<f64> = coef(hi).iter().zip(coef(lo)).map(|(x, y)| x - y).collect();
                let (diff, s) = stats.linear(&c);
                gaps[g] = diff + constant(hi) - constant(lo);
                gap_se[g] = s;
            }
        }
        out.push(RegionSpot { point: p, oracle_label, mc_label, estimates, se, oracle: region_values(p), gaps, gap_se });
    }
    Ok(out)
}
