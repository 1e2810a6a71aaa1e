//! Run manifests: what was run, with which resolved parameters, and the
//! digests of what it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::jobs::Job;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub job: Job,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputDigest>,
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Where the manifest of a job whose main output is `out` goes.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

impl RunManifest {
    pub fn record(job: &Job, outputs: &[PathBuf], started_unix: u64) -> Result<RunManifest> {
        let outputs = outputs
            .iter()
            .map(|p| Ok(OutputDigest { path: p.clone(), sha256: digest(p)? }))
            .collect::<Result<_>>()?;
        Ok(RunManifest {
            command_line: std::env::args().collect(),
            job: job.clone(),
            seed: job.params().seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix,
            finished_unix: now_unix(),
            outputs,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

pub struct ReplayResult {
    pub path: PathBuf,
    pub expected: String,
    pub actual: String,
}

/// Re-runs the recorded job. With `out_dir` the outputs go there under
/// their original file names; otherwise they overwrite the originals.
pub fn replay(m: &RunManifest, out_dir: Option<&Path>) -> Result<Vec<ReplayResult>> {
    let mut job = m.job.clone();
    let relocate = |p: &Path| match out_dir {
        Some(dir) => dir.join(p.file_name().unwrap_or(p.as_os_str())),
        None => p.to_path_buf(),
    };
    if let Some(out) = job.params_mut().out.as_mut() {
        *out = relocate(out);
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    job.run()?;
    m.outputs
        .iter()
        .map(|o| {
            let path = relocate(&o.path);
            Ok(ReplayResult { actual: digest(&path)?, expected: o.sha256.clone(), path })
        })
        .collect()
}
