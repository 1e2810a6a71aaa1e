//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.
//!
//! Intervals live in a max-heap keyed by their error estimate; the worst one
//! is bisected until the summed estimate meets the tolerance. Endpoint
//! singularities of log type are resolved by repeated bisection toward the
//! offending end, which the heap does on its own.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let value = k * h;
    // Differences at rounding level carry no information about truncation.
    let raw = ((k - g) * h).abs();
    let floor = 50.0 * f64::EPSILON * abs * h.abs();
    let error = if raw <= floor { 0.0 } else { raw };
    Piece { a, b, value, error }
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Integrator { abs_tol, rel_tol, ..Default::default() }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]`, starting from the given
    /// subdivision. Points must be monotone.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        points: &[f64],
    ) -> Result<QuadResult> {
        if points.len() < 2 || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("integration needs two finite limits".into()));
        }
        let mut heap = BinaryHeap::new();
        let mut value = 0.0;
        let mut error = 0.0;
        for w in points.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let p = kronrod(&f, w[0], w[1]);
            value += p.value;
            error += p.error;
            heap.push(p);
        }
        let mut evaluations = 15 * heap.len();
        loop {
            let tol = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Numerical(format!(
                    "quadrature did not converge: value {value:e}, error estimate {error:e} \
                     > tolerance {tol:e} after {} intervals",
                    heap.len()
                )));
            }
            let worst = heap.pop().expect("nonempty heap");
            let mid = 0.5 * (worst.a + worst.b);
            if mid == worst.a || mid == worst.b {
                return Err(Error::Numerical(format!(
                    "quadrature interval collapsed at {mid:e}: value {value:e}, error estimate {error:e}"
                )));
            }
            let left = kronrod(&f, worst.a, mid);
            let right = kronrod(&f, mid, worst.b);
            evaluations += 30;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
        // Re-sum to shed drift from the incremental updates.
        let value = heap.iter().map(|p| p.value).sum();
        let error = heap.iter().map(|p| p.error).sum();
        if !f64::is_finite(value) {
            return Err(Error::Numerical("quadrature produced a non-finite value".into()));
        }
        Ok(QuadResult { value, abs_error: error, intervals: heap.len(), evaluations })
    }
}

/// Convenience wrapper with the default tolerances.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Integrator::default().integrate(f, a, b).map(|r| r.value)
}
