use crate::error::{domain, Result};
use crate::wiener::BridgeSpec;

use super::plan::Process;

/// Euler–Maruyama solution of the bridge SDE on `times`, driven by the
/// driver values `driver` at those times. The last value is pinned to `b`.
///
/// Wiener drift `(b - X)/(T - t)`; OU drift
/// `q(b/sinh(q(T-t)) - coth(q(T-t)) X)` with diffusion `σ`.
pub fn euler_bridge(times: &[f64], driver: &[f64], process: Process, spec: &BridgeSpec) -> Result<Vec<f64>> {
    if times.len() != driver.len() || times.len() < 2 {
        return domain("times and driver must have the same length of at least 2");
    }
    let n = times.len() - 1;
    let horizon = times[n];
    let mut x = Vec::with_capacity(n + 1);
    let mut cur = spec.a;
    x.push(cur);
    for k in 0..n {
        let (t, h) = (times[k], times[k + 1] - times[k]);
        let dw = driver[k + 1] - driver[k];
        let rest = horizon - t;
        cur += match process {
            Process::Wiener => (spec.b - cur) / rest * h + dw,
            Process::Ou(p) => {
                let y = p.q * rest;
                p.q * (spec.b / y.sinh() - cur / y.tanh()) * h + p.sigma * dw
            }
        };
        x.push(cur);
    }
    x[n] = spec.b;
    Ok(x)
}
