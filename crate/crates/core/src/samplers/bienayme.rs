//! Offspring distributions and conditioned Bienaymé trees.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trees::PlaneTree;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

const MASS_TOLERANCE: f64 = 1e-12;

/// Closed-form masses `μ(k)` for every `k` past the explicit list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `μ(k) = coef · k^{-exponent}`
    PowerLaw { coef: f64, exponent: f64 },
    /// `μ(k) = coef · ratio^k`
    Geometric { coef: f64, ratio: f64 },
}

/// A probability law on the non-negative integers: explicit masses
/// `μ(0), …, μ(K-1)` and an optional closed-form tail for `k >= K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOffspring")]
pub struct OffspringDistribution {
    masses: Vec<f64>,
    tail: Option<Tail>,
}

#[derive(Deserialize)]
struct RawOffspring {
    masses: Vec<f64>,
    #[serde(default)]
    tail: Option<Tail>,
}

impl TryFrom<RawOffspring> for OffspringDistribution {
    type Error = Error;

    fn try_from(raw: RawOffspring) -> Result<Self> {
        Self::new(raw.masses, raw.tail)
    }
}

/// `Σ_{k >= q} k^{-s}` for `s > 1`, `q >= 1`, by Euler–Maclaurin.
pub(crate) fn hurwitz_zeta(s: f64, q: u64) -> f64 {
    const DIRECT: u64 = 30;
    // B_2j / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut sum = 0.0;
    for k in q..q + DIRECT {
        sum += (k as f64).powf(-s);
    }
    let a = (q + DIRECT) as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising product s (s+1) … (s+2j-2) times a^{-s-2j+1}
    let mut rising = s;
    let mut power = a.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= a * a;
    }
    sum
}

impl OffspringDistribution {
    pub fn new(masses: Vec<f64>, tail: Option<Tail>) -> Result<Self> {
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidDistribution("masses must be finite and non-negative".into()));
        }
        match tail {
            Some(Tail::PowerLaw { coef, exponent }) if !(coef >= 0.0 && exponent > 1.0) => {
                return Err(Error::InvalidDistribution(
                    "power-law tail needs coef >= 0 and exponent > 1".into(),
                ))
            }
            Some(Tail::Geometric { coef, ratio }) if !(coef >= 0.0 && (0.0..1.0).contains(&ratio)) => {
                return Err(Error::InvalidDistribution(
                    "geometric tail needs coef >= 0 and 0 <= ratio < 1".into(),
                ))
            }
            _ => {}
        }
        if matches!(tail, Some(Tail::PowerLaw { .. })) && masses.is_empty() {
            return Err(Error::InvalidDistribution("a power-law tail cannot start at k = 0".into()));
        }
        let mu = Self { masses, tail };
        let total = mu.masses.iter().sum::<f64>() + mu.tail_mass();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        if mu.mass(0) <= 0.0 {
            return Err(Error::InvalidDistribution("μ(0) must be positive".into()));
        }
        Ok(mu)
    }

    /// Finitely supported law from explicit masses.
    pub fn finite(masses: Vec<f64>) -> Result<Self> {
        Self::new(masses, None)
    }

    /// `μ(k) = coef · k^{-exponent}` for `k >= 1`, with `μ(0)` taking the rest.
    pub fn power_law(coef: f64, exponent: f64) -> Result<Self> {
        let rest = coef * hurwitz_zeta(exponent, 1);
        Self::new(vec![1.0 - rest], Some(Tail::PowerLaw { coef, exponent }))
    }

    /// `μ(k) = (1 - q) q^k`.
    pub fn geometric(q: f64) -> Result<Self> {
        Self::new(Vec::new(), Some(Tail::Geometric { coef: 1.0 - q, ratio: q }))
    }

    /// `μ(1) = 1 - ε`, `μ(0) = μ(2) = ε/2`.
    pub fn lazy_binary(eps: f64) -> Result<Self> {
        Self::finite(vec![eps / 2.0, 1.0 - eps, eps / 2.0])
    }

    pub fn explicit_masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail(&self) -> Option<Tail> {
        self.tail
    }

    pub fn mass(&self, k: usize) -> f64 {
        if k < self.masses.len() {
            return self.masses[k];
        }
        match self.tail {
            None => 0.0,
            Some(Tail::PowerLaw { coef, exponent }) => coef * (k as f64).powf(-exponent),
            Some(Tail::Geometric { coef, ratio }) => coef * ratio.powi(k as i32),
        }
    }

    fn tail_moment(&self, p: i32) -> f64 {
        let start = self.masses.len() as u64;
        match self.tail {
            None => 0.0,
            Some(Tail::PowerLaw { coef, exponent }) => {
                let s = exponent - p as f64;
                if s <= 1.0 {
                    f64::INFINITY
                } else {
                    coef * hurwitz_zeta(s, start.max(1))
                }
            }
            Some(Tail::Geometric { coef, ratio }) => {
                let mut sum = 0.0;
                let mut k = start;
                loop {
                    let term = coef * (k as f64).powi(p) * ratio.powi(k as i32);
                    sum += term;
                    if (term < 1e-18 * sum.max(1e-300) && k > start + 10) || k > start + 1_000_000 {
                        break;
                    }
                    k += 1;
                }
                sum
            }
        }
    }

    fn tail_mass(&self) -> f64 {
        self.tail_moment(0)
    }

    fn moment(&self, p: i32) -> f64 {
        let explicit: f64 = self
            .masses
            .iter()
            .enumerate()
            .map(|(k, m)| (k as f64).powi(p) * m)
            .sum();
        explicit + self.tail_moment(p)
    }

    /// `|μ|_1 = Σ k μ(k)`.
    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `Σ k² μ(k)`, infinite for heavy enough tails.
    pub fn second_moment(&self) -> f64 {
        self.moment(2)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// `μ(0), …, μ(len - 1)`.
    pub fn truncated(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.mass(k)).collect()
    }
}

fn rotate_to_tree(word: Vec<usize>) -> PlaneTree {
    PlaneTree::from_cyclic_word(word).expect("degree sum is n - 1")
}

/// Rejection sampler: draw `n` i.i.d. degrees from `μ`, keep the first
/// sequence summing to `n - 1`, and rotate it into a tree.
pub fn sample_conditioned_bienayme<R: Rng + ?Sized>(
    mu: &OffspringDistribution,
    n: usize,
    rng: &mut R,
    max_attempts: u64,
) -> Result<PlaneTree> {
    if n == 0 {
        return Err(Error::OutOfRange("tree size must be positive".into()));
    }
    // degrees >= n can never be accepted; lump them into one overflow outcome
    let mut weights = mu.truncated(n);
    let overflow = (1.0 - weights.iter().sum::<f64>()).max(0.0);
    weights.push(overflow);
    let alias = WeightedAliasIndex::new(weights)
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let target = n - 1;
    let mut word = Vec::with_capacity(n);
    'attempt: for _ in 0..max_attempts {
        word.clear();
        let mut sum = 0;
        for _ in 0..n {
            let d = alias.sample(rng);
            sum += d;
            if sum > target {
                continue 'attempt;
            }
            word.push(d);
        }
        if sum == target {
            return Ok(rotate_to_tree(word));
        }
    }
    Err(Error::AttemptsExhausted(max_attempts))
}

/// Exact sampler for trees of a fixed size `n` with probability
/// proportional to `∏ w_{deg(v)}`.
///
/// The weights are first tilted so that their mean is `(n-1)/n`, which
/// leaves the conditioned law unchanged. A degree sequence is then drawn
/// from `n` i.i.d. tilted variables conditioned on summing to `n - 1`, by
/// recursively splitting the sequence in halves using convolution powers
/// of the tilted law. Rotating by the cycle lemma gives the tree.
#[derive(Clone, Debug)]
pub struct ConditionedTreeSampler {
    n: usize,
    tilt: f64,
    /// length m -> convolution power (scaled by its maximum), sums 0..n-1
    tables: BTreeMap<usize, Vec<f64>>,
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl ConditionedTreeSampler {
    /// `weights[k]` is `w_k`; entries beyond `n - 1` are ignored.
    pub fn new(weights: &[f64], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("tree size must be positive".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be finite and non-negative".into()));
        }
        let logw: Vec<f64> = weights.iter().take(n).map(|w| w.ln()).collect();
        Self::from_log_weights(&logw, n)
    }

    /// Same as [`Self::new`] with `log_weights[k] = ln w_k` (`-inf` for zero).
    pub fn from_log_weights(log_weights: &[f64], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("tree size must be positive".into()));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::InvalidDistribution("log weights must be below +inf".into()));
        }
        let logw: Vec<(usize, f64)> = log_weights
            .iter()
            .take(n)
            .enumerate()
            .filter(|(_, &lw)| lw > f64::NEG_INFINITY)
            .map(|(k, &lw)| (k, lw))
            .collect();
        if logw.first().map(|&(k, _)| k) != Some(0) {
            return Err(Error::ZeroPartition(n));
        }

        // choose log t so that the tilted mean is (n-1)/n
        let target = (n - 1) as f64 / n as f64;
        let tilted_mean = |x: f64| {
            let lz = log_sum_exp(logw.iter().map(|&(k, lw)| lw + k as f64 * x));
            logw.iter()
                .map(|&(k, lw)| k as f64 * (lw + k as f64 * x - lz).exp())
                .sum::<f64>()
        };
        let (mut lo, mut hi) = (-700.0f64, 700.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tilted_mean(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        let lz = log_sum_exp(logw.iter().map(|&(k, lw)| lw + k as f64 * x));
        let mut base = vec![0.0; n];
        for &(k, lw) in &logw {
            base[k] = (lw + k as f64 * x - lz).exp();
        }

        let mut lengths = Vec::new();
        fn collect(m: usize, out: &mut Vec<usize>) {
            if out.contains(&m) {
                return;
            }
            out.push(m);
            if m > 1 {
                collect(m / 2, out);
                collect(m - m / 2, out);
            }
        }
        collect(n, &mut lengths);
        lengths.sort_unstable();

        let mut tables: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for m in lengths {
            let table = if m == 1 {
                base.clone()
            } else {
                let (a, b) = (&tables[&(m / 2)], &tables[&(m - m / 2)]);
                let mut out = vec![0.0; n];
                for (i, &fa) in a.iter().enumerate() {
                    if fa == 0.0 {
                        continue;
                    }
                    for (j, &fb) in b[..n - i].iter().enumerate() {
                        out[i + j] += fa * fb;
                    }
                }
                let max = out.iter().copied().fold(0.0, f64::max);
                if max > 0.0 {
                    out.iter_mut().for_each(|v| *v /= max);
                }
                out
            };
            tables.insert(m, table);
        }
        if tables[&n][n - 1] <= 0.0 {
            return Err(Error::ZeroPartition(n));
        }
        Ok(Self { n, tilt: x.exp(), tables })
    }

    pub fn from_offspring(mu: &OffspringDistribution, n: usize) -> Result<Self> {
        Self::new(&mu.truncated(n), n)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// The tilt `t` applied to the weights (`w_k t^k`).
    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    /// An exchangeable degree sequence of length `n` summing to `n - 1`.
    pub fn sample_degree_sequence<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        self.split(self.n, self.n - 1, rng, &mut out);
        out
    }

    fn split<R: Rng + ?Sized>(&self, m: usize, s: usize, rng: &mut R, out: &mut Vec<usize>) {
        if m == 1 {
            out.push(s);
            return;
        }
        let (a, b) = (m / 2, m - m / 2);
        let (fa, fb) = (&self.tables[&a], &self.tables[&b]);
        let total: f64 = (0..=s).map(|j| fa[j] * fb[s - j]).sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = s;
        for j in 0..=s {
            let w = fa[j] * fb[s - j];
            if u < w {
                pick = j;
                break;
            }
            u -= w;
        }
        // guard against rounding leaving u just above the last positive cell
        while fa[pick] * fb[s - pick] == 0.0 {
            pick -= 1;
        }
        self.split(a, pick, rng, out);
        self.split(b, s - pick, rng, out);
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaneTree {
        rotate_to_tree(self.sample_degree_sequence(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngStream;

    #[test]
    fn hurwitz_matches_known_values() {
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((hurwitz_zeta(2.0, 1) - zeta2).abs() < 1e-13);
        assert!((hurwitz_zeta(3.0, 1) - 1.202_056_903_159_594_2).abs() < 1e-13);
        assert!((hurwitz_zeta(2.0, 3) - (zeta2 - 1.25)).abs() < 1e-13);
    }

    #[test]
    fn validation() {
        assert!(OffspringDistribution::finite(vec![0.5, 0.0, 0.5]).is_ok());
        assert!(OffspringDistribution::finite(vec![0.5, 0.0, 0.4]).is_err());
        assert!(OffspringDistribution::finite(vec![0.0, 1.0]).is_err());
        assert!(OffspringDistribution::finite(vec![1.5, -0.5]).is_err());
        let g = OffspringDistribution::geometric(0.5).unwrap();
        assert!((g.mean() - 1.0).abs() < 1e-12);
        assert!((g.mass(3) - 1.0 / 16.0).abs() < 1e-15);
        let p = OffspringDistribution::power_law(0.15, 2.5).unwrap();
        assert!(p.second_moment().is_infinite());
        assert!(p.mean().is_finite());
    }

    #[test]
    fn json_round_trip() {
        let mu = OffspringDistribution::power_law(0.15, 2.5).unwrap();
        let s = serde_json::to_string(&mu).unwrap();
        let back: OffspringDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);
        let bad: std::result::Result<OffspringDistribution, _> = serde_json::from_str(r#"{"masses":[0.5,0.4]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn rejection_examples() {
        let mu = OffspringDistribution::finite(vec![0.5, 0.0, 0.5]).unwrap();
        let mut rng = RngStream::new(10, 0).rng();
        for _ in 0..100 {
            let t = sample_conditioned_bienayme(&mu, 3, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
            assert_eq!(t.word(), &[2, 0, 0]);
        }
        assert_eq!(
            sample_conditioned_bienayme(&mu, 4, &mut rng, 10_000),
            Err(Error::AttemptsExhausted(10_000))
        );
    }

    #[test]
    fn split_sampler_examples() {
        let mut rng = RngStream::new(11, 0).rng();
        let binary = ConditionedTreeSampler::new(&[1.0, 0.0, 1.0], 3).unwrap();
        assert_eq!(binary.sample(&mut rng).word(), &[2, 0, 0]);
        assert_eq!(ConditionedTreeSampler::new(&[1.0, 0.0, 1.0], 4).unwrap_err(), Error::ZeroPartition(4));
        assert_eq!(ConditionedTreeSampler::new(&[0.0, 1.0], 3).unwrap_err(), Error::ZeroPartition(3));
        let single = ConditionedTreeSampler::new(&[1.0, 1.0], 1).unwrap();
        assert_eq!(single.sample(&mut rng).word(), &[0]);

        let mu = OffspringDistribution::power_law(0.15, 2.5).unwrap();
        let big = ConditionedTreeSampler::from_offspring(&mu, 3000).unwrap();
        for _ in 0..5 {
            let t = big.sample(&mut rng);
            assert_eq!(t.len(), 3000);
        }
    }
}
