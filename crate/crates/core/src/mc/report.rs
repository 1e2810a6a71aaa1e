use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Default gate in standard errors.
pub const GATE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NoOracle,
}

/// What the verdict tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// `|estimate - oracle| <= gate·se + 1e-9·max(1, |oracle|)`.
    Matches,
    /// `estimate > gate·se`; `oracle` is the analytic value for reference.
    Positive,
    /// `estimate == oracle` exactly.
    Exact,
    /// `estimate < oracle`.
    Below,
    /// `estimate <= oracle`.
    AtMost,
    /// Reported only.
    Info,
}

/// One statistic of a run, with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub statistic: String,
    pub params: BTreeMap<String, f64>,
    pub estimate: f64,
    pub se: f64,
    pub oracle: Option<f64>,
    pub z: Option<f64>,
    pub check: Check,
    pub verdict: Verdict,
    pub seed: u64,
    pub reps: u64,
    pub grid_n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bias: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Seed, replicate count, grid size and parameters shared by the reports
/// of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub seed: u64,
    pub reps: u64,
    pub grid_n: usize,
    pub params: BTreeMap<String, f64>,
    pub gate: f64,
}

impl RunInfo {
    pub fn new(seed: u64, reps: u64, grid_n: usize, params: &[(&str, f64)]) -> Self {
        RunInfo {
            seed,
            reps,
            grid_n,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            gate: GATE,
        }
    }

    /// A copy with extra or replaced parameters.
    pub fn with(&self, extra: &[(&str, f64)]) -> Self {
        let mut out = self.clone();
        for &(k, v) in extra {
            out.params.insert(k.to_string(), v);
        }
        out
    }

    fn report(&self, statistic: String, estimate: f64, se: f64, oracle: Option<f64>, check: Check, pass: Option<bool>) -> EstimateReport {
        let z = match oracle {
            Some(o) if se > 0.0 && matches!(check, Check::Matches) => Some((estimate - o) / se),
            _ if se > 0.0 && matches!(check, Check::Positive) => Some(estimate / se),
            _ => None,
        };
        let verdict = match pass {
            None => Verdict::NoOracle,
            Some(true) => Verdict::Pass,
            Some(false) => Verdict::Fail,
        };
        // + 0.0 turns -0.0 into 0.0 so reports print uniformly
        EstimateReport {
            statistic,
            params: self.params.clone(),
            estimate: estimate + 0.0,
            se,
            oracle: oracle.map(|o| o + 0.0),
            z,
            check,
            verdict,
            seed: self.seed,
            reps: self.reps,
            grid_n: self.grid_n,
            bias: None,
            note: None,
        }
    }

    pub fn matches(&self, stat: impl Into<String>, estimate: f64, se: f64, oracle: f64) -> EstimateReport {
        let ok = gate_pass(estimate, se, oracle, self.gate);
        self.report(stat.into(), estimate, se, Some(oracle), Check::Matches, Some(ok))
    }

    pub fn positive(&self, stat: impl Into<String>, estimate: f64, se: f64, analytic: f64) -> EstimateReport {
        let ok = estimate.is_finite() && estimate > self.gate * se;
        self.report(stat.into(), estimate, se, Some(analytic), Check::Positive, Some(ok))
    }

    pub fn exact(&self, stat: impl Into<String>, estimate: f64, expected: f64) -> EstimateReport {
        self.report(stat.into(), estimate, 0.0, Some(expected), Check::Exact, Some(estimate == expected))
    }

    pub fn below(&self, stat: impl Into<String>, estimate: f64, bound: f64) -> EstimateReport {
        self.report(stat.into(), estimate, 0.0, Some(bound), Check::Below, Some(estimate < bound))
    }

    pub fn at_most(&self, stat: impl Into<String>, estimate: f64, bound: f64) -> EstimateReport {
        self.report(stat.into(), estimate, 0.0, Some(bound), Check::AtMost, Some(estimate <= bound))
    }

    pub fn info(&self, stat: impl Into<String>, estimate: f64, se: f64, reference: Option<f64>) -> EstimateReport {
        let mut r = self.report(stat.into(), estimate, se, reference, Check::Info, None);
        if let (Some(o), true) = (reference, se > 0.0) {
            r.z = Some((estimate - o) / se);
        }
        r
    }
}

/// The gate used by [`Check::Matches`].
pub fn gate_pass(estimate: f64, se: f64, oracle: f64, gate: f64) -> bool {
    (estimate - oracle).abs() <= gate * se + 1e-9 * oracle.abs().max(1.0)
}

impl EstimateReport {
    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = Some(bias);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// The reports of one verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub reps: u64,
    pub passed: bool,
    pub checks: usize,
    pub failed: Vec<String>,
    pub reports: Vec<EstimateReport>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64, reps: u64, reports: Vec<EstimateReport>) -> Self {
        let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.statistic.clone()).collect();
        SuiteReport {
            suite: suite.to_string(),
            seed,
            reps,
            passed: failed.is_empty(),
            checks: reports.iter().filter(|r| r.verdict != Verdict::NoOracle).count(),
            failed,
            reports,
        }
    }

    pub fn find(&self, statistic: &str) -> Option<&EstimateReport> {
        self.reports.iter().find(|r| r.statistic == statistic)
    }
}
