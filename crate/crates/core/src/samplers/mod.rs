//! Random generators: size-biased degree orders, the `M` and `σ`
//! samplers, uniform trees with fixed degree statistics and conditioned
//! Bienaymé trees.
//!
//! Every sampler takes `&mut R: Rng`; reproducible streams come from
//! [`RngStream::rng`].

mod bienayme;
mod poisson;

pub use bienayme::{
    sample_conditioned_bienayme, ConditionedTreeSampler, OffspringDistribution, Tail,
    DEFAULT_MAX_ATTEMPTS,
};
pub use poisson::{sample_sigma_poissonized, PoissonRun};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trees::{DegreeStatistics, MarkedTree, PlaneTree};

/// The generator behind every [`RngStream`].
pub type StreamRng = ChaCha8Rng;

/// A `(seed, stream)` pair naming an independent, reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

pub(crate) fn require_tree(stats: &DegreeStatistics) -> Result<()> {
    if !stats.is_tree() {
        return Err(Error::InvalidStatistics(format!(
            "expected a single tree, statistics describe {} trees",
            stats.trees()
        )));
    }
    Ok(())
}

/// Incremental size-biased ordering of a degree multiset: each draw picks
/// a remaining item with probability proportional to its degree. Once only
/// leaves remain they are emitted in turn.
#[derive(Clone, Debug)]
pub struct SizeBiasing {
    degrees: Vec<usize>,
    remaining: Vec<u64>,
    weight: u64,
    zeros: u64,
}

impl SizeBiasing {
    pub fn new(stats: &DegreeStatistics) -> Result<Self> {
        require_tree(stats)?;
        let (degrees, remaining): (Vec<usize>, Vec<u64>) = stats.iter().filter(|&(c, _)| c > 0).unzip();
        Ok(Self {
            degrees,
            remaining,
            weight: stats.edge_count(),
            zeros: stats.count(0),
        })
    }

    /// Total degree still to be drawn, `|n|_1 - Σ prefix`.
    pub fn remaining_weight(&self) -> u64 {
        self.weight
    }

    pub fn next_degree<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        if self.weight == 0 {
            if self.zeros == 0 {
                return None;
            }
            self.zeros -= 1;
            return Some(0);
        }
        let mut r = rng.random_range(0..self.weight);
        for (idx, &c) in self.degrees.iter().enumerate() {
            let w = c as u64 * self.remaining[idx];
            if r < w {
                self.remaining[idx] -= 1;
                self.weight -= c as u64;
                return Some(c);
            }
            r -= w;
        }
        unreachable!("draw below total weight always lands")
    }
}

/// A full size-biased ordering `(D_1, …, D_n)`.
pub fn sample_size_biasing<R: Rng + ?Sized>(stats: &DegreeStatistics, rng: &mut R) -> Result<Vec<usize>> {
    let mut sb = SizeBiasing::new(stats)?;
    let mut out = Vec::with_capacity(stats.node_count() as usize);
    while let Some(d) = sb.next_degree(rng) {
        out.push(d);
    }
    Ok(out)
}

/// Returns `M - 1` where `M = min(i : A_i = 1)`; its law is that of the
/// mark depth of a uniform marked tree.
pub fn sample_mark_height<R: Rng + ?Sized>(stats: &DegreeStatistics, rng: &mut R) -> Result<u64> {
    let mut sb = SizeBiasing::new(stats)?;
    let n = stats.node_count();
    // s = Σ_{j<i} (D_j - 1)
    let mut s: i64 = 0;
    for i in 1..=n {
        let u: f64 = rng.random();
        let num = (1 + s) as f64;
        let den = (n + 1 - i) as f64;
        if u * den <= num {
            return Ok(i - 1);
        }
        let d = sb.next_degree(rng).expect("fewer than n draws so far");
        s += d as i64 - 1;
    }
    unreachable!("A_n always fires")
}

/// Returns `σ = inf(i : B_i = 1)`, or `n` when no `B_i` with `i < n` fires
/// (path statistics).
pub fn sample_sigma<R: Rng + ?Sized>(stats: &DegreeStatistics, rng: &mut R) -> Result<u64> {
    let mut sb = SizeBiasing::new(stats)?;
    let n = stats.node_count();
    let mut s: i64 = 0;
    for i in 1..n {
        let u: f64 = rng.random();
        if u * ((n - i) as f64) <= s as f64 {
            return Ok(i);
        }
        let d = sb.next_degree(rng).expect("fewer than n draws so far");
        s += d as i64 - 1;
    }
    Ok(n)
}

/// Uniform tree with the given degree statistics: shuffle the degree
/// multiset, then take the unique valid rotation.
pub fn sample_uniform_tree<R: Rng + ?Sized>(stats: &DegreeStatistics, rng: &mut R) -> Result<PlaneTree> {
    require_tree(stats)?;
    let mut word = stats.degrees();
    word.shuffle(rng);
    PlaneTree::from_cyclic_word(word)
}

pub fn sample_uniform_marked_tree<R: Rng + ?Sized>(stats: &DegreeStatistics, rng: &mut R) -> Result<MarkedTree> {
    let tree = sample_uniform_tree(stats, rng)?;
    let mark = rng.random_range(0..tree.len());
    MarkedTree::new(tree, mark)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(pairs: &[(usize, u64)]) -> DegreeStatistics {
        DegreeStatistics::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| RngStream::new(7, 3).rng().random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = RngStream::new(7, 3).rng().random();
        let y: u64 = RngStream::new(7, 4).rng().random();
        assert_ne!(x, y);
    }

    #[test]
    fn size_biasing_examples() {
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..50 {
            assert_eq!(sample_size_biasing(&stats(&[(0, 2), (2, 1)]), &mut rng).unwrap(), vec![2, 0, 0]);
            assert_eq!(sample_size_biasing(&stats(&[(0, 1)]), &mut rng).unwrap(), vec![0]);
        }
        assert!(sample_size_biasing(&stats(&[(0, 2)]), &mut rng).is_err());
    }

    #[test]
    fn size_biasing_first_draw_frequency() {
        let s = stats(&[(0, 2), (1, 1), (2, 1)]);
        let mut rng = RngStream::new(2, 0).rng();
        let reps = 100_000;
        let twos = (0..reps)
            .filter(|_| sample_size_biasing(&s, &mut rng).unwrap()[0] == 2)
            .count() as f64;
        let p = 2.0 / 3.0;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((twos / reps as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn deterministic_cases() {
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..200 {
            assert_eq!(sample_mark_height(&stats(&[(0, 1)]), &mut rng).unwrap(), 0);
            assert_eq!(sample_sigma(&stats(&[(0, 2), (2, 1)]), &mut rng).unwrap(), 2);
            assert_eq!(sample_uniform_tree(&stats(&[(0, 2), (2, 1)]), &mut rng).unwrap().word(), &[2, 0, 0]);
            assert_eq!(sample_uniform_tree(&stats(&[(0, 3), (3, 1)]), &mut rng).unwrap().word(), &[3, 0, 0, 0]);
            assert_eq!(sample_uniform_marked_tree(&stats(&[(0, 1)]), &mut rng).unwrap().mark_depth(), 0);
        }
        // a path never fires B_i before n
        let path = stats(&[(0, 1), (1, 4)]);
        for _ in 0..200 {
            assert_eq!(sample_sigma(&path, &mut rng).unwrap(), 5);
        }
    }
}
