//! Cancellation- and overflow-free forms of the hyperbolic expressions that
//! appear throughout the OU formulas.
//!
//! Every function here stays accurate both for arguments near zero, where the
//! naive forms cancel, and for large arguments, where `sinh` and `exp` of the
//! individual terms overflow although the ratio is moderate.

/// `sinh(y) / y`, equal to 1 at `y = 0`.
pub fn sinhc(y: f64) -> f64 {
    let y2 = y * y;
    if y.abs() < 0.1 {
        1.0 + y2 / 6.0 * (1.0 + y2 / 20.0 * (1.0 + y2 / 42.0 * (1.0 + y2 / 72.0)))
    } else {
        y.sinh() / y
    }
}

/// `(e^y - 1) / y`, equal to 1 at `y = 0`.
pub fn exprel(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        y.exp_m1() / y
    }
}

/// `(1 - e^{-y}) / y`, equal to 1 at `y = 0`.
pub fn one_minus_exp_neg_rel(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        -(-y).exp_m1() / y
    }
}

/// `sinh(y) - y`.
pub fn sinh_minus_id(y: f64) -> f64 {
    if y.abs() < 1.0 {
        // y^3/3! + y^5/5! + ...
        let y2 = y * y;
        let mut term = y * y2 / 6.0;
        let mut sum = 0.0f64;
        let mut k = 3.0;
        while term.abs() > f64::EPSILON * 1e-3 * sum.abs() {
            sum += term;
            term *= y2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        sum
    } else {
        y.sinh() - y
    }
}

/// `2 tanh(x/2) - x`.
pub fn two_tanh_half_minus_id(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // tanh u = u - u^3/3 + 2u^5/15 - 17u^7/315 + ...
        const C: [f64; 7] = [
            -1.0 / 3.0,
            2.0 / 15.0,
            -17.0 / 315.0,
            62.0 / 2835.0,
            -1382.0 / 155925.0,
            21844.0 / 6081075.0,
            -929569.0 / 638512875.0,
        ];
        let u = 0.5 * x;
        let u2 = u * u;
        let mut p = 0.0;
        for c in C.iter().rev() {
            p = p * u2 + c;
        }
        2.0 * u * u2 * p
    } else {
        2.0 * (0.5 * x).tanh() - x
    }
}

/// `sinh(a) / sinh(b)` for `a`, `b` of equal sign (or `a = 0`), `b != 0`.
pub fn sinh_ratio(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    let (a, b) = if b < 0.0 { (-a, -b) } else { (a, b) };
    if a < 0.0 {
        return a.sinh() / b.sinh();
    }
    // e^{a-b} (1 - e^{-2a}) / (1 - e^{-2b})
    (a - b).exp() * (-2.0 * a).exp_m1() / (-2.0 * b).exp_m1()
}

/// `ln(sinh(a) / sinh(b))` for nonzero `a`, `b` of equal sign.
pub fn log_sinh_ratio(a: f64, b: f64) -> f64 {
    debug_assert!(a * b > 0.0);
    let (a, b) = if b < 0.0 { (-a, -b) } else { (a, b) };
    (a - b) + (-(-2.0 * a).exp_m1()).ln() - (-(-2.0 * b).exp_m1()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn sinhc_matches_direct_away_from_zero() {
        for &y in &[0.09, 0.099_999, -0.05, 0.2, 3.0, -7.5] {
            assert!(rel(sinhc(y), y.sinh() / y) < 1e-15, "{y}");
        }
        assert_eq!(sinhc(0.0), 1.0);
    }

    #[test]
    fn series_branches_are_continuous() {
        let below = sinh_minus_id(0.999_999_999);
        let above = sinh_minus_id(1.000_000_001);
        assert!(rel(below, above) < 1e-8);
        let below = two_tanh_half_minus_id(0.499_999_999);
        let above = two_tanh_half_minus_id(0.500_000_001);
        assert!(rel(below, above) < 1e-7);
        // leading terms
        let x = 1e-3;
        assert!(rel(sinh_minus_id(x), x * x * x / 6.0) < 1e-6);
        assert!(rel(two_tanh_half_minus_id(x), -x * x * x / 12.0) < 1e-6);
    }

    #[test]
    fn sinh_ratio_handles_large_and_negative_arguments() {
        assert!(rel(sinh_ratio(0.5, 1.0), 0.5f64.sinh() / 1.0f64.sinh()) < 1e-15);
        assert!(rel(sinh_ratio(-0.5, -1.0), 0.5f64.sinh() / 1.0f64.sinh()) < 1e-15);
        // sinh(800) overflows; the ratio e^{-200} does not
        assert!(rel(sinh_ratio(600.0, 800.0), (-200.0f64).exp()) < 1e-13);
        assert_eq!(sinh_ratio(0.0, 2.0), 0.0);
        assert!(rel(sinh_ratio(1e-9, 2e-9), 0.5) < 1e-15);
    }

    #[test]
    fn log_sinh_ratio_matches_log_of_ratio() {
        for &(a, b) in &[(1.0f64, 0.3f64), (-2.0, -0.1), (40.0, 39.0), (1e-8, 3e-8)] {
            let direct = (a.sinh() / b.sinh()).ln();
            assert!((log_sinh_ratio(a, b) - direct).abs() < 1e-13, "{a} {b}");
        }
        assert!((log_sinh_ratio(900.0, 899.0) - 1.0).abs() < 1e-12);
    }
}
