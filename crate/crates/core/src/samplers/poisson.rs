//! The Poissonized construction of `σ`.
//!
//! `[0, 1)` is cut into intervals `I_i` of length `d_i/(n-1)` (degrees in
//! non-decreasing order), and `I_i` carries the sub-interval
//! `[l_i, r_i)` of length `max(0, d_i - 1)/(n-1)`. Points `(S_ℓ, U_ℓ)` of a
//! unit-rate Poisson process arrive in time order. A point landing in a
//! fresh interval is a record; `τ` is the first point landing in
//! `[l_i, r_i)` of an interval already hit.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::require_tree;
use crate::error::{Error, Result};
use crate::trees::DegreeStatistics;

/// One run of the Poissonized construction, up to and including `τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonRun {
    /// `(S_ℓ, U_ℓ)` for every atom generated.
    pub atoms: Vec<(f64, f64)>,
    /// `J(ℓ)`: index (in non-decreasing degree order) of the interval hit by atom `ℓ`.
    pub intervals: Vec<usize>,
    /// `M(k)`: 1-based atom indices of the records.
    pub records: Vec<u64>,
    /// `None` only when no interval has a non-empty `[l, r)` (path statistics).
    pub tau: Option<u64>,
    /// `sup(k >= 1 : τ > M(k))`, the number of records strictly before `τ`.
    pub records_before_tau: u64,
    /// `records_before_tau + 1`, which has the law of [`super::sample_sigma`].
    pub sigma: u64,
}

pub fn sample_sigma_poissonized<R: Rng + ?Sized>(stats: &DegreeStatistics, rng: &mut R) -> Result<PoissonRun> {
    require_tree(stats)?;
    let n = stats.node_count();
    if n < 2 {
        return Err(Error::InvalidStatistics("the construction needs at least two nodes".into()));
    }
    let scale = (n - 1) as f64;

    // Positive-length intervals, by integer start (in units of 1/(n-1)).
    let mut starts: Vec<u64> = Vec::new();
    let mut degree: Vec<u64> = Vec::new();
    let mut index: Vec<usize> = Vec::new();
    let mut cursor = 0u64;
    for (i, d) in stats.degrees().into_iter().enumerate() {
        if d > 0 {
            starts.push(cursor);
            degree.push(d as u64);
            index.push(i);
            cursor += d as u64;
        }
    }
    let has_repeat_zone = degree.iter().any(|&d| d >= 2);

    let mut hit = vec![false; starts.len()];
    let mut unhit = starts.len();
    let mut run = PoissonRun {
        atoms: Vec::new(),
        intervals: Vec::new(),
        records: Vec::new(),
        tau: None,
        records_before_tau: 0,
        sigma: 0,
    };
    let mut time = 0.0f64;
    loop {
        if !has_repeat_zone && unhit == 0 {
            break;
        }
        let gap: f64 = Exp1.sample(rng);
        time += gap;
        let u: f64 = rng.random();
        let x = u * scale;
        let slot = starts.partition_point(|&s| (s as f64) <= x) - 1;
        run.atoms.push((time, u));
        run.intervals.push(index[slot]);
        let ell = run.atoms.len() as u64;
        if hit[slot] {
            if x - (starts[slot] as f64) < (degree[slot] - 1) as f64 {
                run.tau = Some(ell);
                break;
            }
        } else {
            hit[slot] = true;
            unhit -= 1;
            run.records.push(ell);
        }
    }
    run.records_before_tau = run.records.len() as u64;
    run.sigma = run.records_before_tau + 1;
    Ok(run)
}
