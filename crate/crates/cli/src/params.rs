//! The flat parameter set shared by the command-line flags and the JSON
//! config file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bridgelab_core::path::Process;
use bridgelab_core::{BridgeKind, BridgeSpec, ProcessParams, RegionPoint, TimeChange};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Bridge construction: av, ir or st.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Driven process: wiener or ou.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    /// OU rate q in dU = qU dt + σ dW.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// OU diffusion coefficient σ.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Start level.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// End level.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Driver endpoint to condition on.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Horizon.
    #[arg(long = "T")]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Evaluation time.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Second evaluation time, for covariances.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Argument of a one-variable function.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Normalized end level b/√T.
    #[arg(long = "b-tilde", allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_tilde: Option<f64>,
    /// Normalized driver endpoint d/√T.
    #[arg(long = "d-tilde", allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_tilde: Option<f64>,
    /// Grid steps on [0, T].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Monte Carlo replicates.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    /// Master seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Verification suite.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Region grid resolution per axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

macro_rules! fields {
    ($m:ident) => {
        $m!(kind, process, q, sigma, a, b, d, horizon, t, s, x, b_tilde, d_tilde, steps, reps, seed, out, suite, grid)
    };
}

fn missing(flag: &str) -> anyhow::Error {
    UsageError(format!("missing required parameter --{flag}")).into()
}

impl Params {
    /// Values set here win; unset ones come from `base`.
    pub fn over(self, base: Params) -> Params {
        macro_rules! merge {
            ($($f:ident),*) => { Params { $($f: self.$f.or(base.$f)),* } };
        }
        fields!(merge)
    }

    pub fn load(path: &Path) -> Result<Params> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    pub fn kind(&self) -> Result<BridgeKind> {
        let k = self.kind.as_deref().ok_or_else(|| missing("kind"))?;
        k.parse().map_err(|_| UsageError(format!("unknown kind {k:?} (expected av, ir or st)")).into())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(1.0)
    }

    pub fn need_t(&self) -> Result<f64> {
        self.t.ok_or_else(|| missing("t"))
    }

    pub fn need_s(&self) -> Result<f64> {
        self.s.ok_or_else(|| missing("s"))
    }

    pub fn need_x(&self) -> Result<f64> {
        self.x.ok_or_else(|| missing("x"))
    }

    pub fn need_d(&self) -> Result<f64> {
        self.d.ok_or_else(|| missing("d"))
    }

    pub fn spec(&self) -> Result<BridgeSpec> {
        Ok(BridgeSpec::new(self.a.unwrap_or(0.0), self.b.unwrap_or(0.0), self.horizon())?)
    }

    pub fn ou(&self) -> Result<ProcessParams> {
        let q = self.q.ok_or_else(|| missing("q"))?;
        Ok(ProcessParams::new(q, self.sigma.unwrap_or(1.0))?)
    }

    pub fn time_change(&self) -> Result<TimeChange> {
        Ok(TimeChange::new(self.ou()?, self.horizon())?)
    }

    pub fn region_point(&self) -> Result<RegionPoint> {
        Ok(RegionPoint {
            b_tilde: self.b_tilde.ok_or_else(|| missing("b-tilde"))?,
            d_tilde: self.d_tilde.ok_or_else(|| missing("d-tilde"))?,
        })
    }

    pub fn process(&self) -> Result<Process> {
        match self.process.as_deref().unwrap_or("wiener") {
            "wiener" => Ok(Process::Wiener),
            "ou" => Ok(Process::Ou(self.ou()?)),
            other => Err(UsageError(format!("unknown process {other:?} (expected wiener or ou)")).into()),
        }
    }
}
