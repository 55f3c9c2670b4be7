//! Replications on independent random streams.
//!
//! Replication `r` of a block keyed `key` always uses stream
//! `key << 32 | r`, and results come back in replication order, so no
//! statistic depends on the thread count.

use arbor::samplers::{RngStream, StreamRng};
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "ARBOR_THREADS";

fn pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_VAR).ok().and_then(|v| v.parse::<usize>().ok()) {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().expect("thread pool")
}

pub fn stream_id(key: u64, rep: u64) -> u64 {
    (key << 32) | (rep & 0xffff_ffff)
}

pub fn replicate<T, F>(seed: u64, key: u64, reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    pool().install(|| {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = RngStream::new(seed, stream_id(key, r)).rng();
                f(&mut rng)
            })
            .collect()
    })
}

/// Fallible replications; the first error in replication order wins.
pub fn try_replicate<T, E, F>(seed: u64, key: u64, reps: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(&mut StreamRng) -> Result<T, E> + Sync,
{
    replicate(seed, key, reps, f).into_iter().collect()
}
