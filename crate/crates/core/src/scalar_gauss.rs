//! Scalar normal laws: distribution function, density, folded mean, two-sided
//! tail and scalar-on-scalar conditioning.

use serde::{Deserialize, Serialize};

use crate::error::{domain, finite, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Mean and variance of a scalar normal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoment {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianMoment {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        finite("mean", mean)?;
        finite("variance", variance)?;
        if variance < 0.0 {
            return domain(format!("variance must be nonnegative, got {variance}"));
        }
        Ok(GaussianMoment { mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Φ(x).
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    finite("x", x)?;
    Ok(phi(x))
}

pub(crate) fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

fn positive_variance(m: &GaussianMoment) -> Result<f64> {
    if !(m.variance > 0.0) || !m.variance.is_finite() || !m.mean.is_finite() {
        return domain(format!("needs a finite law with positive variance, got {m:?}"));
    }
    Ok(m.variance.sqrt())
}

/// E|Y| for Y ~ N(μ, σ²).
pub fn folded_mean(m: GaussianMoment) -> Result<f64> {
    let s = positive_variance(&m)?;
    let z = m.mean / s;
    // 2Φ(z) - 1 = erf(z/√2)
    Ok(2.0 * s * std_normal_pdf(z) + m.mean * libm::erf(z * std::f64::consts::FRAC_1_SQRT_2))
}

/// P(|Y| > x) for Y ~ N(μ, σ²).
pub fn tail(m: GaussianMoment, x: f64) -> Result<f64> {
    let s = positive_variance(&m)?;
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("tail threshold must be positive, got {x}"));
    }
    Ok(phi(-(m.mean + x) / s) + phi((m.mean - x) / s))
}

/// E(Y²) = σ² + μ².
pub fn second_moment(m: GaussianMoment) -> f64 {
    m.variance + m.mean * m.mean
}

/// Law of X given S = s for a jointly normal pair (X, S).
pub fn condition_on_linear(
    joint_mean_x: f64,
    joint_mean_s: f64,
    var_x: f64,
    var_s: f64,
    cov_xs: f64,
    observed_s: f64,
) -> Result<GaussianMoment> {
    for (name, v) in [
        ("mean of X", joint_mean_x),
        ("mean of S", joint_mean_s),
        ("Var X", var_x),
        ("Var S", var_s),
        ("Cov(X,S)", cov_xs),
        ("observed S", observed_s),
    ] {
        finite(name, v)?;
    }
    if !(var_s > 0.0) {
        return domain(format!("conditioning variable needs positive variance, got {var_s}"));
    }
    if var_x < 0.0 {
        return domain(format!("Var X must be nonnegative, got {var_x}"));
    }
    if cov_xs * cov_xs > var_x * var_s * (1.0 + 1e-12) {
        return domain(format!(
            "covariance {cov_xs} violates Cauchy-Schwarz for variances {var_x}, {var_s}"
        ));
    }
    let beta = cov_xs / var_s;
    Ok(GaussianMoment {
        mean: joint_mean_x + (observed_s - joint_mean_s) * beta,
        variance: (var_x - cov_xs * beta).max(0.0),
    })
}
