//! Replica-level parallelism with results independent of scheduling.
//!
//! Replica `i` always draws from the stream `(master_seed, tag, i)` and the
//! outputs are collected in replica order, so any reduction done by the
//! caller sees the same sequence whatever the pool size. Running inside a
//! one-thread pool gives the sequential mode.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{RngSeed, SimRng};

/// Maps `f` over replicas `0..reps`, each with its own generator, keeping replica order.
pub fn map_replicas<T, F>(reps: usize, master_seed: u64, tag: &str, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .with_min_len(16)
        .map(|i| f(i as u64, &mut RngSeed::for_replica(master_seed, tag, i as u64).rng()))
        .collect()
}

/// Fallible variant of [`map_replicas`]; the first error in replica order is returned.
pub fn try_map_replicas<T, F>(reps: usize, master_seed: u64, tag: &str, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> Result<T> + Sync + Send,
{
    map_replicas(reps, master_seed, tag, f).into_iter().collect()
}

/// Runs `f` inside a dedicated pool with `threads` workers (1 = sequential).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}
