//! Runs replicates in fixed chunks, sequentially or on a rayon pool.

use crate::error::Result;

use super::accum::{Layout, Tally, Totals};

/// Replicates per chunk. Chunk boundaries are fixed, so per-chunk sums and
/// hence the totals are independent of the number of workers.
pub const CHUNK: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Exec::Parallel;
        #[cfg(not(feature = "parallel"))]
        Exec::Sequential
    }
}

/// Worker cap from `BRIDGELAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("BRIDGELAB_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Calls `body(state, replicate, tally)` for every replicate in `0..reps`.
/// `init` builds the per-chunk state (typically a path buffer).
pub fn run<S, I, F>(exec: Exec, layout: &Layout, reps: u64, init: I, body: F) -> Result<Totals>
where
    I: Fn() -> Result<S> + Sync,
    F: Fn(&mut S, u64, &mut Tally) -> Result<()> + Sync,
{
    let chunks = reps.div_ceil(CHUNK);
    let chunk = |c: u64| -> Result<Tally> {
        let mut state = init()?;
        let mut t = layout.tally();
        for r in c * CHUNK..((c + 1) * CHUNK).min(reps) {
            body(&mut state, r, &mut t)?;
            t.count();
        }
        Ok(t)
    };
    let tallies: Vec<Result<Tally>> = match exec {
        Exec::Sequential => (0..chunks).map(chunk).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = thread_cap() {
                builder = builder.num_threads(n);
            }
            let pool = builder
                .build()
                .map_err(|e| crate::Error::Numerical(format!("cannot start worker pool: {e}")))?;
            pool.install(|| (0..chunks).into_par_iter().map(chunk).collect())
        }
    };
    let mut tot = layout.totals();
    for t in tallies {
        tot.absorb(&t?);
    }
    Ok(tot)
}
