//! Closed forms for Ornstein–Uhlenbeck bridges.
//!
//! The process is `U^a_t = e^{qt}(a + σ∫_0^t e^{-qs} dW_s)`, solving
//! `dU = qU dt + σ dW`. Deviations depend on `(a, b)` only through
//! `b - a e^{qT}`, so the deviation functions take the end level of a bridge
//! started at 0.
//!
//! Everything is written with the helpers in [`crate::hyper`], which keeps
//! the formulas accurate for `|q|T` from about `1e-12` up to a few hundred
//! without switching to the Wiener limit.

use serde::{Deserialize, Serialize};

use crate::error::{domain, finite, Result};
use crate::hyper::{exprel, log_sinh_ratio, one_minus_exp_neg_rel, sinh_minus_id, sinh_ratio, sinhc,
    two_tanh_half_minus_id};
use crate::quadrature::Integrator;
use crate::scalar_gauss::GaussianMoment;
use crate::wiener::{check_horizon, BridgeKind};

/// Rate `q` and diffusion coefficient `σ` of the OU process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    pub q: f64,
    pub sigma: f64,
}

impl ProcessParams {
    pub fn new(q: f64, sigma: f64) -> Result<Self> {
        finite("q", q)?;
        finite("sigma", sigma)?;
        if q == 0.0 {
            return domain("q must be nonzero; q = 0 is the Wiener case");
        }
        if !(sigma > 0.0) {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        Ok(ProcessParams { q, sigma })
    }
}

/// OU parameters together with the bridge horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeChange {
    pub params: ProcessParams,
    pub horizon: f64,
}

impl TimeChange {
    pub fn new(params: ProcessParams, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        Ok(TimeChange { params, horizon })
    }

    fn q(&self) -> f64 {
        self.params.q
    }

    fn sigma2(&self) -> f64 {
        self.params.sigma * self.params.sigma
    }

    /// `sinh(qt)/sinh(qT)`.
    pub fn ratio(&self, t: f64) -> f64 {
        sinh_ratio(self.q() * t, self.q() * self.horizon)
    }

    /// `sinh(q(T-t))/sinh(qT)`.
    pub fn ratio_rest(&self, t: f64) -> f64 {
        sinh_ratio(self.q() * (self.horizon - t), self.q() * self.horizon)
    }
}

fn in_closed(t: f64, tc: &TimeChange) -> Result<()> {
    if !(0.0..=tc.horizon).contains(&t) {
        return domain(format!("time {t} outside [0, {}]", tc.horizon));
    }
    Ok(())
}

fn in_half_open(t: f64, tc: &TimeChange) -> Result<()> {
    if !(0.0..tc.horizon).contains(&t) {
        return domain(format!("time {t} outside [0, {})", tc.horizon));
    }
    Ok(())
}

fn in_open(t: f64, tc: &TimeChange) -> Result<()> {
    if !(t > 0.0 && t < tc.horizon) {
        return domain(format!("time {t} outside (0, {})", tc.horizon));
    }
    Ok(())
}

/// `κ(t) = (1 - e^{-2qt})/(2q)`.
pub fn kappa(t: f64, q: f64) -> Result<f64> {
    finite("t", t)?;
    finite("q", q)?;
    if q == 0.0 {
        return domain("kappa needs q != 0");
    }
    Ok(kappa_unchecked(t, q))
}

pub(crate) fn kappa_unchecked(t: f64, q: f64) -> f64 {
    t * one_minus_exp_neg_rel(2.0 * q * t)
}

/// `κ*_T(t) = κ(t)κ(T)/(κ(T) - κ(t))`, the time at which the space-time
/// transform reads the driver.
pub fn kappa_star(t: f64, tc: &TimeChange) -> Result<f64> {
    in_half_open(t, tc)?;
    Ok(kappa_star_unchecked(t, tc))
}

pub(crate) fn kappa_star_unchecked(t: f64, tc: &TimeChange) -> f64 {
    let q = tc.q();
    let big = tc.horizon;
    // κ(T) - κ(t) = e^{-2qt} κ(T - t)
    kappa_unchecked(t, q) * kappa_unchecked(big, q) * (2.0 * q * t).exp()
        / kappa_unchecked(big - t, q)
}

/// `(κ*_T)'(t) = e^{2qt} κ(T)^2 / κ(T - t)^2`.
pub fn kappa_star_derivative(t: f64, tc: &TimeChange) -> Result<f64> {
    in_half_open(t, tc)?;
    let q = tc.q();
    let r = kappa_unchecked(tc.horizon, q) / kappa_unchecked(tc.horizon - t, q);
    Ok((2.0 * q * t).exp() * r * r)
}

/// The unique `t* ∈ (0, T)` with `κ*_T(t*) = T`.
pub fn t_star(tc: &TimeChange) -> f64 {
    let q = tc.q();
    let big = tc.horizon;
    let kb = kappa_unchecked(big, q);
    let c = big * kb / (big + kb);
    // κ(t*) = c  ⟺  t* = -ln(1 - 2qc)/(2q)
    let y = 2.0 * q * c;
    if y == 0.0 {
        c
    } else {
        c * (-(-y).ln_1p() / y)
    }
}

/// `E U_t^br = a sinh(q(T-t))/sinh(qT) + b sinh(qt)/sinh(qT)`.
pub fn ou_bridge_mean(t: f64, a: f64, b: f64, tc: &TimeChange) -> Result<f64> {
    in_closed(t, tc)?;
    Ok(a * tc.ratio_rest(t) + b * tc.ratio(t))
}

/// `Cov(U_s^br, U_t^br) = (σ²/q) sinh(q min) sinh(q(T - max))/sinh(qT)`.
pub fn ou_bridge_cov(s: f64, t: f64, tc: &TimeChange) -> Result<f64> {
    in_closed(s, tc)?;
    in_closed(t, tc)?;
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    Ok(tc.sigma2() * lo * sinhc(tc.q() * lo) * tc.ratio_rest(hi))
}

/// The covariance as it arises from each construction. All three equal
/// [`ou_bridge_cov`]; kept separately as a cross-check.
pub fn ou_bridge_cov_by_construction(kind: BridgeKind, s: f64, t: f64, tc: &TimeChange) -> Result<f64> {
    in_half_open(s, tc)?;
    in_half_open(t, tc)?;
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    let q = tc.q();
    let big = tc.horizon;
    let s2 = tc.sigma2();
    Ok(match kind {
        BridgeKind::Av => {
            // Cov(U0_s, U0_t) - (sinh(qt)/sinh(qT)) Cov(U0_s, U0_T)
            s2 * s * sinhc(q * s) * ((q * t).exp() - (q * big).exp() * tc.ratio(t))
        }
        BridgeKind::Ir => {
            // σ²/q · sinh(q(T-s)) sinh(q(T-t)) (coth(q(T-s)) - coth(qT))
            let coth = |x: f64| 1.0 / x.tanh();
            s2 / q * (q * (big - s)).sinh() * (q * (big - t)).sinh()
                * (coth(q * (big - s)) - coth(q * big))
        }
        BridgeKind::St => {
            let kb = kappa_unchecked(big, q);
            let ks = kappa_unchecked(s, q);
            let kt = kappa_unchecked(t, q);
            s2 * (q * (s + t)).exp() * (kb - ks) / kb * (kb - kt) / kb * kappa_star_unchecked(s, tc)
        }
    })
}

/// `Cov(U_t^br, U^a_t)`; independent of `a` and `b`.
pub fn ou_cov_with_process(kind: BridgeKind, t: f64, tc: &TimeChange) -> Result<f64> {
    in_open(t, tc)?;
    let q = tc.q();
    let s2 = tc.sigma2();
    let r = tc.ratio_rest(t);
    Ok(match kind {
        BridgeKind::Av => s2 * t * sinhc(q * t) * r,
        BridgeKind::Ir => s2 * kappa_unchecked(tc.horizon - t, q) * ir_log_term(t, tc),
        BridgeKind::St => s2 * t * exprel(q * t) * r,
    })
}

/// `qt + ln(sinh(qT)/sinh(q(T-t)))`.
fn ir_log_term(t: f64, tc: &TimeChange) -> f64 {
    let q = tc.q();
    if t == 0.0 {
        return 0.0;
    }
    q * t + log_sinh_ratio(q * tc.horizon, q * (tc.horizon - t))
}

/// The two algebraic forms of each deviation variance. `printed` is the
/// direct form; `rearranged` splits off the anticipative variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceForms {
    pub printed: f64,
    pub rearranged: f64,
    /// Sum of absolute values of the terms, the scale for rounding error.
    pub scale: f64,
}

/// `Var(U^0_t - U_t^av) = σ² e^{qT} sinh²(qt)/(q sinh(qT))`.
fn av_variance(t: f64, tc: &TimeChange) -> f64 {
    let q = tc.q();
    tc.sigma2() * t * sinhc(q * t) * (q * tc.horizon).exp() * tc.ratio(t)
}

pub fn ou_variance_forms(kind: BridgeKind, t: f64, tc: &TimeChange) -> Result<VarianceForms> {
    in_half_open(t, tc)?;
    let q = tc.q();
    let big = tc.horizon;
    let s2 = tc.sigma2();
    let av = av_variance(t, tc);
    let r = tc.ratio_rest(t);
    let head = s2 * t * sinhc(q * t) * ((q * t).exp() + r);
    Ok(match kind {
        BridgeKind::Av => VarianceForms { printed: av, rearranged: av, scale: av.abs() },
        BridgeKind::Ir => {
            let tail = 2.0 * s2 * kappa_unchecked(big - t, q) * ir_log_term(t, tc);
            let lead = 2.0 * s2 * (big - t) * sinhc(q * (big - t)) * tc.ratio(t);
            VarianceForms {
                printed: head - tail,
                rearranged: lead - tail + av,
                scale: head.abs() + tail.abs() + lead.abs() + av.abs(),
            }
        }
        BridgeKind::St => {
            let tail = 2.0 * s2 * t * exprel(q * t) * r;
            // 2σ²/q · r · (cosh(qt) - 1) = σ² r q t² sinhc²(qt/2)
            let h = sinhc(0.5 * q * t);
            let corr = s2 * r * q * t * t * h * h;
            VarianceForms {
                printed: head - tail,
                rearranged: av - corr,
                scale: head.abs() + tail.abs() + av.abs() + corr.abs(),
            }
        }
    })
}

/// Law of `U^0_t - U_t^br` for a bridge from 0 to `b`, `t ∈ [0, T)`.
pub fn ou_deviation_law(kind: BridgeKind, t: f64, b: f64, tc: &TimeChange) -> Result<GaussianMoment> {
    finite("b", b)?;
    let forms = ou_variance_forms(kind, t, tc)?;
    debug_assert!(
        (forms.printed - forms.rearranged).abs() <= 1e-12 * forms.scale.max(f64::MIN_POSITIVE),
        "variance forms disagree for {kind} at t={t}: {forms:?}"
    );
    let variance = match kind {
        BridgeKind::St => forms.rearranged,
        // For q < 0 and large |q|T the closed form is a difference of nearly
        // equal terms and the variance is far below their rounding error.
        BridgeKind::Ir if forms.printed.abs() < 1e-4 * forms.scale => ir_variance_by_quadrature(t, tc)?,
        _ => forms.printed,
    };
    Ok(GaussianMoment { mean: -b * tc.ratio(t), variance: variance.max(0.0) })
}

/// `σ² ∫_0^t g(s)² ds` with the kernel of `U^0_t - U_t^ir` written without
/// cancellation: `g(s) = e^{q(t-s)} - sinh(q(T-t))/sinh(q(T-s))
/// = e^{q(T-s)} sinh(q(t-s))/sinh(q(T-s))`.
fn ir_variance_by_quadrature(t: f64, tc: &TimeChange) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let q = tc.q();
    let big = tc.horizon;
    let g2 = |s: f64| {
        let g = (q * (big - s)).exp() * sinh_ratio(q * (t - s), q * (big - s));
        g * g
    };
    let r = Integrator { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 2000 }.integrate(g2, 0.0, t)?;
    Ok(tc.sigma2() * r.value)
}

/// `(sinh(2x) - 2x)/sinh²(x)`.
fn mean_square_factor(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let s = x.sinh();
        sinh_minus_id(2.0 * x) / (s * s)
    } else {
        let s = x.sinh();
        2.0 / x.tanh() - 2.0 * x / s / s
    }
}

/// `∫_0^T b² sinh²(qt)/sinh²(qT) dt = (b²/(4q))(sinh(2qT) - 2qT)/sinh²(qT)`.
pub fn ou_mean_square_term(b: f64, tc: &TimeChange) -> f64 {
    let x = tc.q() * tc.horizon;
    b * b * tc.horizon * mean_square_factor(x) / (4.0 * x)
}

/// `∫_0^T Var(U^0_t - U_t^av) dt = σ² e^{qT}(sinh(2qT) - 2qT)/(4q² sinh(qT))`.
fn av_variance_integral(tc: &TimeChange) -> f64 {
    let x = tc.q() * tc.horizon;
    let g = if x.abs() < 1.0 {
        x.exp() * sinh_minus_id(2.0 * x) / x.sinh()
    } else {
        x.exp() * (2.0 * x.cosh() - 2.0 * x / x.sinh())
    };
    tc.sigma2() * tc.horizon * tc.horizon * g / (4.0 * x * x)
}

/// `J(x) = ∫_0^x (1 - e^{-2y}) ln(sinh(x)/sinh(y)) dy`, oriented, for any
/// real `x`. Computed as `x² ∫_0^1 (-expm1(-2xv)/x) ln(sinh x/sinh(xv)) dv`.
pub fn j_integral(x: f64) -> Result<f64> {
    finite("x", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x * x * j_normalized(x)?)
}

fn j_normalized(x: f64) -> Result<f64> {
    let f = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        2.0 * v * one_minus_exp_neg_rel(2.0 * x * v) * log_sinh_ratio(x, x * v)
    };
    // The integrand is O(v log v) at 0; bisection toward 0 handles it.
    let tol = 1e-11 / (x * x).max(1.0);
    Integrator { abs_tol: tol, rel_tol: 1e-13, max_intervals: 2000 }
        .integrate(f, 0.0, 1.0)
        .map(|r| r.value)
}

/// `x coth x - 1 - x²/3`.
fn coth_defect(x: f64) -> f64 {
    if x.abs() < 0.2 {
        // -x⁴/45 + 2x⁶/945 - x⁸/4725 + 2x¹⁰/93555 - 1382x¹²/638512875
        let y = x * x;
        y * y
            * (-1.0 / 45.0
                + y * (2.0 / 945.0 + y * (-1.0 / 4725.0 + y * (2.0 / 93555.0 + y * (-1382.0 / 638_512_875.0)))))
    } else {
        x / x.tanh() - 1.0 - x * x / 3.0
    }
}

/// `expm1(-2x)/4 + x/2 - x²/2`.
fn exp_defect(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ_{k≥3} (-2x)^k / (4 k!)
        let y = -2.0 * x;
        let mut term = y * y * y / 6.0;
        let mut sum = 0.0f64;
        let mut k = 3.0;
        while term.abs() > 1e-3 * f64::EPSILON * sum.abs() {
            sum += term;
            k += 1.0;
            term *= y / k;
        }
        sum / 4.0
    } else {
        (-2.0 * x).exp_m1() / 4.0 + x / 2.0 - x * x / 2.0
    }
}

/// `E ∫_0^T (U^0_t - U_t^br)² dt` for a bridge from 0 to `b`.
///
/// For the space-time transform this includes the squared-mean term
/// `(b²/(4q))(sinh(2qT) - 2qT)/sinh²(qT)`, which the unsimplified variant
/// [`ou_expected_quad_dev_printed`] omits.
pub fn ou_expected_quad_dev(kind: BridgeKind, b: f64, tc: &TimeChange) -> Result<f64> {
    finite("b", b)?;
    let x = tc.q() * tc.horizon;
    let scale = tc.sigma2() * tc.horizon * tc.horizon / (x * x);
    let mean = ou_mean_square_term(b, tc);
    let av = av_variance_integral(tc);
    Ok(match kind {
        BridgeKind::Av => mean + av,
        BridgeKind::Ir => {
            let terms = [av, scale * coth_defect(x), scale * x * x / 3.0, scale * exp_defect(x)];
            let jn = scale * x * x * j_normalized(x)?;
            let var = terms.iter().sum::<f64>() - jn;
            let size = terms.iter().map(|v| v.abs()).sum::<f64>() + jn.abs();
            if size <= 1e5 * var.abs() {
                mean + var
            } else {
                // q < 0 with large |q|T: the terms above grow like e^{2|q|T}
                // and cancel. Integrate the variance directly instead.
                mean + ir_variance_integral(tc)?
            }
        }
        BridgeKind::St => mean + av + scale * two_tanh_half_minus_id(x),
    })
}

/// `∫_0^T Var(U^0_t - U_t^ir) dt` as a single positive integral:
/// `(σ²/(4q²)) ∫_0^{qT} e^{2y} (sinh(2y) - 2y)/sinh²(y) dy`.
pub fn ir_variance_integral(tc: &TimeChange) -> Result<f64> {
    let x = tc.q() * tc.horizon;
    let f = |v: f64| {
        let y = x * v;
        if y == 0.0 {
            0.0
        } else {
            (2.0 * y).exp() * mean_square_factor(y)
        }
    };
    let r = Integrator { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 2000 }.integrate(f, 0.0, 1.0)?;
    Ok(tc.sigma2() * tc.horizon * tc.horizon * r.value / (4.0 * x))
}

/// The unsimplified hyperbolic closed forms evaluated term by term, with `J` by
/// quadrature. Agrees with [`ou_expected_quad_dev`] except for the
/// space-time transform with `b != 0`, where it lacks the squared-mean term.
/// Loses accuracy for small `|q|T` and overflows for large `|q|T`.
pub fn ou_expected_quad_dev_printed(kind: BridgeKind, b: f64, tc: &TimeChange) -> Result<f64> {
    finite("b", b)?;
    let q = tc.q();
    let big = tc.horizon;
    let s2 = tc.sigma2();
    let x = q * big;
    let common = s2 * x.exp() / (4.0 * q * q) * ((2.0 * x).sinh() - 2.0 * x) / x.sinh();
    let mean = b * b / (4.0 * q) * ((2.0 * x).sinh() - 2.0 * x) / (x.sinh() * x.sinh());
    Ok(match kind {
        BridgeKind::Av => mean + common,
        BridgeKind::Ir => {
            mean + common - s2 / (q * q) + big * s2 * x.cosh() / (q * x.sinh()) - s2 * big * big / 2.0
                + s2 * big / (2.0 * q)
                - s2 / (4.0 * q * q)
                + s2 / (4.0 * q * q) * (-2.0 * x).exp()
                - s2 / (q * q) * j_integral(x)?
        }
        BridgeKind::St => {
            common + 2.0 * s2 / (q * q) * (x.cosh() - 1.0) / x.sinh()
                - s2 / q * ((2.0 * x).sinh() / (2.0 * q) + big)
                + s2 * x.cosh() / (2.0 * q * q * x.sinh()) * ((2.0 * x).cosh() - 1.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_gauss::second_moment;
    use crate::wiener::{self, BridgeSpec};
    use proptest::prelude::*;
    use BridgeKind::*;

    fn tc(q: f64, sigma: f64, horizon: f64) -> TimeChange {
        TimeChange::new(ProcessParams::new(q, sigma).unwrap(), horizon).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(a.abs())
    }

    #[test]
    fn params_validation() {
        assert!(ProcessParams::new(0.0, 1.0).is_err());
        assert!(ProcessParams::new(1.0, 0.0).is_err());
        assert!(ProcessParams::new(f64::NAN, 1.0).is_err());
        assert!(kappa(1.0, 0.0).is_err());
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(0.0, 3.0).unwrap(), 0.0);
        assert!((kappa(1.0, 1e-8).unwrap() - 1.0).abs() < 1e-6);
        assert!((kappa(1.0, 1.0).unwrap() - 0.432_332_358_381_693_65).abs() < 1e-15);
    }

    #[test]
    fn kappa_star_values() {
        let c = tc(1.0, 1.0, 1.0);
        assert_eq!(kappa_star(0.0, &c).unwrap(), 0.0);
        let h = 1e-7;
        assert!((kappa_star(h, &c).unwrap() / h - 1.0).abs() < 1e-6);
        assert!((kappa_star_derivative(0.0, &c).unwrap() - 1.0).abs() < 1e-15);
        let w = tc(1e-8, 1.0, 2.0);
        assert!((kappa_star(1.0, &w).unwrap() - 2.0).abs() < 1e-5);
        assert!(kappa_star(1.0, &c).is_err());
    }

    #[test]
    fn t_star_values() {
        assert!((t_star(&tc(1e-8, 1.0, 1.0)) - 0.5).abs() < 1e-6);
        for &q in &[1.0, 2.0, -2.0, 0.3, -7.0] {
            let c = tc(q, 1.0, 1.0);
            let ts = t_star(&c);
            assert!(ts > 0.0 && ts < 1.0);
            assert!((kappa_star(ts, &c).unwrap() - 1.0).abs() < 1e-10, "q={q}");
            // bisection oracle
            let (mut lo, mut hi) = (0.0, 1.0 - 1e-12);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if kappa_star(mid, &c).unwrap() < 1.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((ts - lo).abs() < 1e-12, "q={q}");
        }
        assert!(t_star(&tc(2.0, 1.0, 1.0)) != t_star(&tc(-2.0, 1.0, 1.0)));
    }

    #[test]
    fn bridge_mean_and_cov_values() {
        let c = tc(1.3, 0.7, 2.0);
        assert!((ou_bridge_mean(0.0, 0.4, -1.0, &c).unwrap() - 0.4).abs() < 1e-15);
        assert!((ou_bridge_mean(2.0, 0.4, -1.0, &c).unwrap() + 1.0).abs() < 1e-15);
        let w = tc(1e-8, 1.0, 1.0);
        assert!((ou_bridge_mean(0.3, 1.0, 3.0, &w).unwrap() - 1.6).abs() < 1e-6);
        let c = tc(1.0, 1.0, 1.0);
        assert_eq!(ou_bridge_cov(0.0, 0.7, &c).unwrap(), 0.0);
        let v = ou_bridge_cov(0.5, 0.5, &c).unwrap();
        assert!((v - 0.5f64.sinh().powi(2) / 1.0f64.sinh()).abs() < 1e-15);
        assert!((v - 0.231_058_578_630_004_87).abs() < 1e-15);
        assert!((ou_bridge_cov(0.25, 0.75, &w).unwrap() - 0.0625).abs() < 1e-6);
    }

    #[test]
    fn covariance_by_construction_agrees() {
        for &q in &[-3.0, -0.5, 0.5, 1.0, 4.0] {
            let c = tc(q, 1.4, 1.5);
            for i in 0..15 {
                for j in i..15 {
                    let (s, t) = (0.1 * i as f64, 0.1 * j as f64);
                    let v = ou_bridge_cov(s, t, &c).unwrap();
                    for kind in BridgeKind::ALL {
                        let w = ou_bridge_cov_by_construction(kind, s, t, &c).unwrap();
                        assert!((v - w).abs() <= 1e-12 * v.abs().max(1.0), "{kind} q={q} {s} {t}");
                    }
                }
            }
        }
    }

    #[test]
    fn bridge_variance_decays_at_the_end() {
        for &q in &[-2.0, 1.0] {
            let c = tc(q, 1.0, 1.0);
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let t = 0.9 + 0.001 * i as f64;
                let v = ou_bridge_cov(t, t, &c).unwrap();
                assert!(v < prev && v >= 0.0);
                prev = v;
            }
            assert_eq!(prev, 0.0);
        }
    }

    #[test]
    fn cov_with_process_values() {
        let c = tc(1.0, 1.0, 1.0);
        assert!(ou_cov_with_process(Av, 1e-12, &c).unwrap() < 1e-11);
        let st = ou_cov_with_process(St, 0.5, &c).unwrap();
        assert!((st - 0.5f64.exp_m1() * 0.5f64.sinh() / 1.0f64.sinh()).abs() < 1e-15);
        assert!((st - 0.287_649_136_644_967_92).abs() < 1e-14);
        let w = tc(1e-8, 1.0, 1.0);
        for &t in &[0.2, 0.5, 0.9] {
            let av = ou_cov_with_process(Av, t, &w).unwrap();
            let ir = ou_cov_with_process(Ir, t, &w).unwrap();
            let st = ou_cov_with_process(St, t, &w).unwrap();
            let wav = wiener::cov_with_process(Av, t, 1.0).unwrap();
            let wir = wiener::cov_with_process(Ir, t, 1.0).unwrap();
            assert!((av - wav).abs() < 1e-5 && (st - wav).abs() < 1e-5);
            assert!((ir - wir).abs() < 1e-5);
        }
    }

    #[test]
    fn deviation_law_examples() {
        let c = tc(1.0, 1.0, 1.0);
        for kind in BridgeKind::ALL {
            let m = ou_deviation_law(kind, 0.0, 2.0, &c).unwrap();
            assert_eq!(m.mean, 0.0);
            assert!(m.variance.abs() < 1e-300);
        }
        let var = |q: f64| {
            let c = tc(q, 1.0, 1.0);
            BridgeKind::ALL.map(|k| ou_deviation_law(k, 0.5, 0.0, &c).unwrap().variance)
        };
        let [av, ir, st] = var(2.0);
        assert!(ir < st && st < av);
        let [av, ir, st] = var(-2.0);
        assert!(ir < av && av < st);
        assert!(ou_deviation_law(Ir, 1.0, 0.0, &c).is_err());
    }

    #[test]
    fn variance_forms_agree() {
        for &q in &[-5.0, -1.0, -0.5, 0.01, 0.5, 1.0, 5.0] {
            for &horizon in &[1.0, 2.0] {
                let c = tc(q, 2.0, horizon);
                for i in 0..50 {
                    let t = horizon * i as f64 / 50.0;
                    for kind in BridgeKind::ALL {
                        let f = ou_variance_forms(kind, t, &c).unwrap();
                        assert!(
                            (f.printed - f.rearranged).abs() <= 1e-12 * f.scale.max(1e-300),
                            "{kind} q={q} t={t} {f:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn helper_defects_match_direct_forms() {
        for &x in &[0.19f64, 0.2, 0.21, -0.199, 0.45, 0.5, 0.55] {
            let c = x / f64::tanh(x) - 1.0 - x * x / 3.0;
            assert!((coth_defect(x) - c).abs() < 1e-14, "{x}");
            let e = (-2.0 * x).exp_m1() / 4.0 + x / 2.0 - x * x / 2.0;
            assert!((exp_defect(x) - e).abs() < 1e-15, "{x}");
        }
        for &x in &[0.999f64, 1.001, -2.0, 0.1] {
            let s = x.sinh();
            let d = ((2.0 * x).sinh() - 2.0 * x) / (s * s);
            assert!(close(mean_square_factor(x), d, 1e-12), "{x}");
        }
    }

    #[test]
    fn expected_quad_dev_values() {
        // (e/4)(sinh 2 - 2)/sinh 1
        let c = tc(1.0, 1.0, 1.0);
        let av = ou_expected_quad_dev(Av, 0.0, &c).unwrap();
        assert!((av - std::f64::consts::E / 4.0 * (2.0f64.sinh() - 2.0) / 1.0f64.sinh()).abs() < 1e-14);
        assert!((av - 0.940_746_381_982_996_9).abs() < 1e-14);
        let ir = ou_expected_quad_dev(Ir, 0.0, &c).unwrap();
        let st = ou_expected_quad_dev(St, 0.0, &c).unwrap();
        // 30-digit quadrature of the pointwise second moments
        assert!((ir - 0.646_834_382_872_518_1).abs() < 1e-12, "{ir}");
        assert!((st - 0.864_980_696_503_016_4).abs() < 1e-12, "{st}");
        assert!(ir < st && st < av);
        let c = tc(-1.0, 1.0, 1.0);
        let v = BridgeKind::ALL.map(|k| ou_expected_quad_dev(k, 0.0, &c).unwrap());
        assert!((v[0] - 0.127_316_178_059_487_52).abs() < 1e-13);
        assert!((v[1] - 0.047_298_748_168_628_9).abs() < 1e-12);
        assert!((v[2] - 0.203_081_863_539_468).abs() < 1e-13);
        let w = tc(1e-4, 1.0, 1.0);
        assert!((ou_expected_quad_dev(Av, 0.0, &w).unwrap() - 1.0 / 3.0).abs() < 1e-4);
        assert!((ou_expected_quad_dev(Ir, 0.0, &w).unwrap() - 1.0 / 6.0).abs() < 1e-4);
    }

    #[test]
    fn j_integral_small_and_signed() {
        assert_eq!(j_integral(0.0).unwrap(), 0.0);
        // J(x) ≈ x²/2 for small x
        let x = 1e-4;
        assert!(close(j_integral(x).unwrap(), x * x / 2.0, 1e-3));
        // mpmath: J(1) = 0.311685861797734..., J(-1) = 1.28779893...
        let brute = |x: f64, n: usize| {
            let h = x / n as f64;
            (0..n)
                .map(|i| {
                    let y = (i as f64 + 0.5) * h;
                    -(-2.0 * y).exp_m1() * (x.sinh() / y.sinh()).ln()
                })
                .sum::<f64>()
                * h
        };
        for &x in &[1.0, -1.0, 2.5] {
            let j = j_integral(x).unwrap();
            assert!((j - brute(x, 200_000)).abs() < 1e-8, "{x}");
        }
    }

    #[test]
    fn variance_integral_matches_j_form() {
        for &q in &[-4.0, -1.0, -0.2, 0.3, 1.0, 6.0] {
            let c = tc(q, 1.1, 1.0);
            let direct = ir_variance_integral(&c).unwrap();
            let closed = ou_expected_quad_dev(Ir, 0.0, &c).unwrap();
            assert!(close(direct, closed, 1e-11), "q={q}: {direct} {closed}");
        }
    }

    #[test]
    fn ir_variance_quadrature_matches_closed_form_where_stable() {
        let c = tc(-1.5, 1.0, 1.0);
        for &t in &[0.2, 0.5, 0.9] {
            let f = ou_variance_forms(Ir, t, &c).unwrap();
            let v = ir_variance_by_quadrature(t, &c).unwrap();
            assert!((v - f.printed).abs() <= 1e-14 * f.scale, "t={t}");
        }
        // q=-5, T=2, t=1/10: 2.6429453415661224e-19 by 50-digit quadrature
        let c = tc(-5.0, 1.0, 2.0);
        let v = ou_deviation_law(Ir, 0.1, 0.0, &c).unwrap().variance;
        assert!(close(v, 2.642_945_341_566_122_4e-19, 1e-10), "{v}");
    }

    #[test]
    fn printed_forms_match_stable_forms() {
        for &q in &[-3.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
            for &b in &[0.0, 1.5] {
                let c = tc(q, 1.3, 1.2);
                for kind in BridgeKind::ALL {
                    let stable = ou_expected_quad_dev(kind, b, &c).unwrap();
                    let printed = ou_expected_quad_dev_printed(kind, b, &c).unwrap();
                    let missing = if kind == St { ou_mean_square_term(b, &c) } else { 0.0 };
                    assert!(close(printed + missing, stable, 1e-10), "{kind} q={q} b={b}");
                }
            }
        }
    }

    #[test]
    fn integrals_of_pointwise_laws_match_closed_forms() {
        let quad = Integrator::new(1e-14, 1e-10);
        for &q in &[-5.0, -1.0, -0.5, 0.5, 1.0, 5.0] {
            for &b in &[0.0, 1.0] {
                for &sigma in &[1.0, 2.0] {
                    for &horizon in &[1.0, 2.0] {
                        let c = tc(q, sigma, horizon);
                        for kind in BridgeKind::ALL {
                            let f = |t: f64| second_moment(ou_deviation_law(kind, t, b, &c).unwrap());
                            let v = quad.integrate(f, 0.0, horizon).expect(&format!("{kind} q={q} b={b} σ={sigma} T={horizon}")).value;
                            let e = ou_expected_quad_dev(kind, b, &c).unwrap();
                            assert!(close(v, e, 1e-8), "{kind} q={q} b={b} σ={sigma} T={horizon}: {v} {e}");
                        }
                    }
                }
            }
        }
    }

    fn wiener_counterparts(t: f64) -> Vec<f64> {
        let s = BridgeSpec::new(0.0, 0.7, 1.0).unwrap();
        let mut v = vec![
            t,
            t / (1.0 - t),
            0.5,
            wiener::bridge_mean(t, &BridgeSpec::new(0.3, 0.7, 1.0).unwrap()).unwrap(),
            wiener::bridge_cov(t, 0.8, 1.0).unwrap(),
        ];
        for k in BridgeKind::ALL {
            v.push(wiener::cov_with_process(k, t, 1.0).unwrap());
            let l = wiener::deviation_law(k, t, &s).unwrap();
            v.push(l.mean);
            v.push(l.variance);
            v.push(wiener::expected_quad_dev(k, &s));
        }
        v
    }

    fn ou_quantities(t: f64, q: f64) -> Vec<f64> {
        let c = tc(q, 1.0, 1.0);
        let mut v = vec![
            kappa(t, q).unwrap(),
            kappa_star(t, &c).unwrap(),
            t_star(&c),
            ou_bridge_mean(t, 0.3, 0.7, &c).unwrap(),
            ou_bridge_cov(t, 0.8, &c).unwrap(),
        ];
        for k in BridgeKind::ALL {
            v.push(ou_cov_with_process(k, t, &c).unwrap());
            let l = ou_deviation_law(k, t, 0.7, &c).unwrap();
            v.push(l.mean);
            v.push(l.variance);
            v.push(ou_expected_quad_dev(k, 0.7, &c).unwrap());
        }
        v
    }

    #[test]
    fn small_rate_limit_is_first_order() {
        for &t in &[0.1, 0.5, 0.75] {
            let w = wiener_counterparts(t);
            let e3 = ou_quantities(t, 1e-3);
            let e4 = ou_quantities(t, 1e-4);
            for i in 0..w.len() {
                let d3 = (e3[i] - w[i]).abs();
                let d4 = (e4[i] - w[i]).abs();
                // error constant C = d/q stays put between the two rates
                let (c3, c4) = (d3 / 1e-3, d4 / 1e-4);
                assert!(c4 <= 1.2 * c3 + 1e-8, "quantity {i} at t={t}: {c3} {c4}");
                assert!(d4 <= 1e-3 * w[i].abs().max(1e-3), "quantity {i} at t={t}");
            }
        }
    }

    proptest! {
        #[test]
        fn kappa_star_dominates_identity(q in -5.0f64..5.0, u in 0.0f64..0.999) {
            prop_assume!(q.abs() > 1e-6);
            let c = tc(q, 1.0, 1.0);
            let ks = kappa_star(u, &c).unwrap();
            prop_assert!(ks >= u * (1.0 - 1e-14));
            prop_assert!(kappa_star_derivative(u, &c).unwrap() >= 1.0 - 1e-12);
            let up = kappa_star((u + 1e-4).min(0.9999), &c).unwrap();
            prop_assert!(up >= ks);
        }

        #[test]
        fn variances_are_nonnegative_and_ordered(q in 0.05f64..6.0, u in 0.01f64..0.99) {
            for sign in [1.0, -1.0] {
                let c = tc(sign * q, 1.0, 1.0);
                let v = BridgeKind::ALL.map(|k| ou_deviation_law(k, u, 0.0, &c).unwrap().variance);
                prop_assert!(v.iter().all(|x| *x >= 0.0));
                // the integral representation deviates least
                prop_assert!(v[1] <= v[0] && v[1] <= v[2]);
                if sign > 0.0 { prop_assert!(v[2] <= v[0]); } else { prop_assert!(v[0] <= v[2]); }
            }
        }
    }
}
