//! Closed forms for Wiener bridges and their deviations from the driving
//! process.
//!
//! The process is `a + W_t`; all deviation quantities depend on `(a, b)` only
//! through `b - a`. Conditioning is always on the driver endpoint `W_T = d`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, finite, Error, Result};
use crate::scalar_gauss::{folded_mean, GaussianMoment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BridgeKind {
    /// Anticipative: `a + (b-a)t/T + W_t - (t/T) W_T`.
    Av,
    /// Integral representation: `a + (b-a)t/T + ∫_0^t (T-t)/(T-s) dW_s`.
    Ir,
    /// Space-time transform: `a + (b-a)t/T + ((T-t)/T) W_{tT/(T-t)}`.
    St,
}

impl BridgeKind {
    pub const ALL: [BridgeKind; 3] = [BridgeKind::Av, BridgeKind::Ir, BridgeKind::St];

    pub fn name(self) -> &'static str {
        match self {
            BridgeKind::Av => "av",
            BridgeKind::Ir => "ir",
            BridgeKind::St => "st",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BridgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BridgeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "av" => Ok(BridgeKind::Av),
            "ir" => Ok(BridgeKind::Ir),
            "st" => Ok(BridgeKind::St),
            _ => domain(format!("unknown bridge kind {s:?} (expected av, ir or st)")),
        }
    }
}

/// Start level, end level and horizon of a bridge. The construction kind is
/// passed alongside, so one spec serves all three bridges on a shared driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub a: f64,
    pub b: f64,
    pub horizon: f64,
}

impl BridgeSpec {
    pub fn new(a: f64, b: f64, horizon: f64) -> Result<Self> {
        finite("a", a)?;
        finite("b", b)?;
        check_horizon(horizon)?;
        Ok(BridgeSpec { a, b, horizon })
    }

    /// End level after moving the start to 0.
    pub fn reduced_b(&self) -> f64 {
        self.b - self.a
    }
}

pub(crate) fn check_horizon(horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return domain(format!("horizon must be positive and finite, got {horizon}"));
    }
    Ok(horizon)
}

fn check_closed(t: f64, horizon: f64) -> Result<()> {
    if !(0.0..=horizon).contains(&t) {
        return domain(format!("time {t} outside [0, {horizon}]"));
    }
    Ok(())
}

fn check_half_open(t: f64, horizon: f64) -> Result<()> {
    if !(0.0..horizon).contains(&t) {
        return domain(format!("time {t} outside [0, {horizon})"));
    }
    Ok(())
}

fn check_open(t: f64, horizon: f64) -> Result<()> {
    if !(t > 0.0 && t < horizon) {
        return domain(format!("time {t} outside (0, {horizon})"));
    }
    Ok(())
}

/// `ln((T - t)/T)`, accurate at both ends of `[0, T)`.
pub fn log_remaining(t: f64, horizon: f64) -> f64 {
    let u = t / horizon;
    if u < 0.5 {
        (-u).ln_1p()
    } else {
        ((horizon - t) / horizon).ln()
    }
}

pub fn bridge_mean(t: f64, spec: &BridgeSpec) -> Result<f64> {
    check_closed(t, spec.horizon)?;
    Ok(spec.a + spec.reduced_b() * t / spec.horizon)
}

pub fn bridge_cov(s: f64, t: f64, horizon: f64) -> Result<f64> {
    check_horizon(horizon)?;
    check_closed(s, horizon)?;
    check_closed(t, horizon)?;
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    Ok(lo * (horizon - hi) / horizon)
}

/// `Cov(W_t^br, W_t)`.
pub fn cov_with_process(kind: BridgeKind, t: f64, horizon: f64) -> Result<f64> {
    check_horizon(horizon)?;
    check_open(t, horizon)?;
    Ok(match kind {
        BridgeKind::Av | BridgeKind::St => t * (horizon - t) / horizon,
        BridgeKind::Ir => -(horizon - t) * log_remaining(t, horizon),
    })
}

/// `Corr(W_t^br, W_t)`.
pub fn corr_with_process(kind: BridgeKind, t: f64, horizon: f64) -> Result<f64> {
    check_horizon(horizon)?;
    check_open(t, horizon)?;
    Ok(match kind {
        BridgeKind::Av | BridgeKind::St => ((horizon - t) / horizon).sqrt(),
        BridgeKind::Ir => -(horizon * (horizon - t)).sqrt() / t * log_remaining(t, horizon),
    })
}

/// Variance of `W_t - W_t^ir`: `t(1 + (T-t)/T) + 2(T-t) ln((T-t)/T)`.
pub fn ir_deviation_variance(t: f64, horizon: f64) -> f64 {
    let u = t / horizon;
    if u < 0.25 {
        // T Σ_{k≥3} 2u^k / (k(k-1)), free of the cancellation in the closed form
        let mut pow = u * u * u;
        let mut sum = 0.0f64;
        let mut k = 3.0;
        loop {
            let term = 2.0 * pow / (k * (k - 1.0));
            sum += term;
            if term <= f64::EPSILON * 1e-2 * sum {
                break;
            }
            pow *= u;
            k += 1.0;
        }
        horizon * sum
    } else {
        t * (1.0 + (horizon - t) / horizon) + 2.0 * (horizon - t) * log_remaining(t, horizon)
    }
}

/// Law of `(a + W_t) - W_t^br` for `t ∈ [0, T)`.
pub fn deviation_law(kind: BridgeKind, t: f64, spec: &BridgeSpec) -> Result<GaussianMoment> {
    check_half_open(t, spec.horizon)?;
    let horizon = spec.horizon;
    let mean = -spec.reduced_b() * t / horizon;
    let variance = match kind {
        BridgeKind::Av | BridgeKind::St => t * t / horizon,
        BridgeKind::Ir => ir_deviation_variance(t, horizon),
    };
    Ok(GaussianMoment { mean, variance })
}

/// Law of `W_t - W_t^br` given `W_T = d`, start level 0, end level `b`.
pub fn cond_deviation_law(
    kind: BridgeKind,
    t: f64,
    b: f64,
    d: f64,
    horizon: f64,
) -> Result<GaussianMoment> {
    check_horizon(horizon)?;
    finite("b", b)?;
    finite("d", d)?;
    check_half_open(t, horizon)?;
    let frac = t / horizon;
    Ok(match kind {
        BridgeKind::Av => GaussianMoment { mean: (d - b) * frac, variance: 0.0 },
        BridgeKind::Ir => {
            let rest = (horizon - t) / horizon;
            let l = log_remaining(t, horizon);
            let r2 = (horizon - t) * (horizon - t) / horizon;
            GaussianMoment {
                mean: (d - b) * frac + d * rest * l,
                variance: (2.0 * t * rest + 2.0 * r2 * l - r2 * l * l).max(0.0),
            }
        }
        BridgeKind::St => {
            let late = 2.0 * t >= horizon;
            let extra = if late { 2.0 * t - horizon } else { 0.0 };
            GaussianMoment {
                mean: -b * frac + d / horizon * extra,
                variance: t * t / horizon - extra * extra / horizon,
            }
        }
    })
}

/// `E|(a + W_t) - W_t^br|` for `t ∈ (0, T)`.
pub fn expected_abs_dev(kind: BridgeKind, t: f64, spec: &BridgeSpec) -> Result<f64> {
    check_open(t, spec.horizon)?;
    folded_mean(deviation_law(kind, t, spec)?)
}

/// `E ∫_0^T ((a + W_t) - W_t^br)^2 dt`.
pub fn expected_quad_dev(kind: BridgeKind, spec: &BridgeSpec) -> f64 {
    let (b, horizon) = (spec.reduced_b(), spec.horizon);
    match kind {
        BridgeKind::Av | BridgeKind::St => horizon / 3.0 * (horizon + b * b),
        BridgeKind::Ir => horizon / 3.0 * (horizon / 2.0 + b * b),
    }
}

/// `E(∫_0^T (W_t - W_t^br)^2 dt | W_T = d)` for start level 0, end level `b`.
pub fn expected_cond_quad_dev(kind: BridgeKind, b: f64, d: f64, horizon: f64) -> f64 {
    let t = horizon;
    match kind {
        BridgeKind::Av => (d - b) * (d - b) * t / 3.0,
        BridgeKind::Ir => {
            7.0 / 54.0 * (b - d) * (b - d) * t + 11.0 / 54.0 * b * b * t - 7.0 / 54.0 * d * b * t
                + t * t / 27.0
        }
        BridgeKind::St => {
            (d - b) * (d - b) * t / 6.0 + b * b * t / 6.0 - d * b * t / 12.0 + t * t / 6.0
        }
    }
}

/// A point of the normalized plane `(b/√T, d/√T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub b_tilde: f64,
    pub d_tilde: f64,
}

/// Ordering of the three conditional expected quadratic deviations, smallest
/// first, or `Boundary` when two of them tie within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Ordered([BridgeKind; 3]),
    Boundary,
}

impl RegionLabel {
    /// Letter of the four orderings that occur in the plotted window.
    pub fn letter(&self) -> Option<char> {
        use BridgeKind::*;
        match self {
            RegionLabel::Ordered([Av, Ir, St]) => Some('A'),
            RegionLabel::Ordered([Ir, Av, St]) => Some('B'),
            RegionLabel::Ordered([Ir, St, Av]) => Some('C'),
            RegionLabel::Ordered([Av, St, Ir]) => Some('D'),
            _ => None,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self, self.letter()) {
            (_, Some(c)) => write!(f, "{c}"),
            (RegionLabel::Ordered(k), None) => write!(f, "{}<{}<{}", k[0], k[1], k[2]),
            (RegionLabel::Boundary, None) => f.write_str("boundary"),
        }
    }
}

pub const REGION_TOLERANCE: f64 = 1e-12;

/// Signed residuals of the three region inequalities. Each is a positive
/// multiple of a pairwise difference:
/// `[e_av - e_ir, e_av - e_st, e_st - e_ir]`.
pub fn region_residuals(p: RegionPoint) -> [f64; 3] {
    let (b, d) = (p.b_tilde, p.d_tilde);
    let c = 15.0 / 22.0;
    let av_ir = (d - c * b).powi(2) - (2.0 / 11.0 + c * c * b * b);
    let av_st = (d - 0.75 * b).powi(2) - (1.0 + 9.0 / 16.0 * b * b);
    let st_ir = (d - 0.375 * b).powi(2) - (9.0 / 64.0 * b * b - 3.5);
    [av_ir, av_st, st_ir]
}

pub fn region_classify(p: RegionPoint) -> RegionLabel {
    let r = region_residuals(p);
    if r.iter().any(|x| x.abs() <= REGION_TOLERANCE || !x.is_finite()) {
        return RegionLabel::Boundary;
    }
    // Rank by number of kinds each one exceeds.
    let av_gt_ir = r[0] > 0.0;
    let av_gt_st = r[1] > 0.0;
    let st_gt_ir = r[2] > 0.0;
    let mut rank = [0u8; 3];
    rank[BridgeKind::Av.index()] = av_gt_ir as u8 + av_gt_st as u8;
    rank[BridgeKind::Ir.index()] = !av_gt_ir as u8 + !st_gt_ir as u8;
    rank[BridgeKind::St.index()] = !av_gt_st as u8 + st_gt_ir as u8;
    let mut kinds = BridgeKind::ALL;
    kinds.sort_by_key(|k| rank[k.index()]);
    RegionLabel::Ordered(kinds)
}

/// The three conditional expected quadratic deviations at `T = 1`, in
/// `BridgeKind::ALL` order.
pub fn region_values(p: RegionPoint) -> [f64; 3] {
    BridgeKind::ALL.map(|k| expected_cond_quad_dev(k, p.b_tilde, p.d_tilde, 1.0))
}
