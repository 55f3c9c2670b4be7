//! Exact counting and exhaustive enumeration for small degree statistics.
//!
//! Everything here is big-integer or big-rational arithmetic so that the
//! identities checked against it are exact equalities.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::trees::{DegreeStatistics, PlaneTree};

/// Default node cap for anything that enumerates trees.
pub const DEFAULT_CAP: u64 = 12;

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(n)_k = n (n-1) … (n-k+1)`; zero when `k > n`.
pub fn falling_factorial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    ((n - k + 1)..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(Σ k_i)! / ∏ k_i!`.
pub fn multinomial<I: IntoIterator<Item = u64>>(parts: I) -> BigUint {
    let parts: Vec<u64> = parts.into_iter().collect();
    let total: u64 = parts.iter().sum();
    let mut out = factorial(total);
    for k in parts {
        out /= factorial(k);
    }
    out
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Number of plane forests with the given degree statistics,
/// `(a/n) · n! / ∏ n(c)!`.
pub fn count_forests(stats: &DegreeStatistics) -> BigUint {
    let n = stats.node_count();
    let m = count_marked_first_tree(stats);
    m * stats.trees() / n
}

/// Number of forests with a marked node in the first tree; equals the full multinomial.
pub fn count_marked_first_tree(stats: &DegreeStatistics) -> BigUint {
    multinomial(stats.iter().map(|(_, k)| k))
}

fn check_cap(stats: &DegreeStatistics, cap: u64) -> Result<()> {
    let size = stats.node_count();
    if size > cap {
        return Err(Error::TooLarge { size, cap });
    }
    Ok(())
}

fn require_tree(stats: &DegreeStatistics) -> Result<()> {
    if !stats.is_tree() {
        return Err(Error::InvalidStatistics(format!(
            "expected a single tree, statistics describe {} trees",
            stats.trees()
        )));
    }
    Ok(())
}

/// Lexicographic stream of every tree with the given degree statistics.
pub struct TreeEnumerator {
    degrees: Vec<usize>,
    remaining: Vec<u64>,
    choices: Vec<usize>,
    slots: i64,
    len: usize,
    started: bool,
    done: bool,
}

/// Enumerates all plane trees with degree statistics `stats`, in
/// lexicographic order of their words.
pub fn enumerate_trees(stats: &DegreeStatistics, cap: u64) -> Result<TreeEnumerator> {
    require_tree(stats)?;
    check_cap(stats, cap)?;
    let (degrees, remaining): (Vec<usize>, Vec<u64>) = stats.iter().unzip();
    Ok(TreeEnumerator {
        degrees,
        remaining,
        choices: Vec::new(),
        slots: 1,
        len: stats.node_count() as usize,
        started: false,
        done: false,
    })
}

impl TreeEnumerator {
    fn fits(&self, j: usize) -> bool {
        if self.remaining[j] == 0 {
            return false;
        }
        let after = self.slots + self.degrees[j] as i64 - 1;
        // Any prefix with a free slot can still be completed (place the
        // remaining non-leaves first), so this is the only check needed.
        if self.choices.len() + 1 == self.len {
            after == 0
        } else {
            after >= 1
        }
    }

    fn place(&mut self, j: usize) {
        self.remaining[j] -= 1;
        self.slots += self.degrees[j] as i64 - 1;
        self.choices.push(j);
    }

    fn unplace(&mut self) -> Option<usize> {
        let j = self.choices.pop()?;
        self.remaining[j] += 1;
        self.slots -= self.degrees[j] as i64 - 1;
        Some(j)
    }

    /// Places the smallest admissible choice `>= from` at the next position,
    /// then completes the word greedily.
    fn extend(&mut self, from: usize) -> bool {
        let Some(j) = (from..self.degrees.len()).find(|&j| self.fits(j)) else {
            return false;
        };
        self.place(j);
        while self.choices.len() < self.len {
            let j = (0..self.degrees.len())
                .find(|&j| self.fits(j))
                .expect("valid prefixes always extend");
            self.place(j);
        }
        true
    }

    fn current(&self) -> PlaneTree {
        let word = self.choices.iter().map(|&j| self.degrees[j]).collect();
        PlaneTree::from_word(word).expect("enumerator emits valid words")
    }
}

impl Iterator for TreeEnumerator {
    type Item = PlaneTree;

    fn next(&mut self) -> Option<PlaneTree> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.extend(0) {
                return Some(self.current());
            }
            self.done = true;
            return None;
        }
        loop {
            let Some(j) = self.unplace() else {
                self.done = true;
                return None;
            };
            if self.extend(j + 1) {
                return Some(self.current());
            }
        }
    }
}

/// Every tree degree statistics with exactly `n` nodes (one per integer
/// partition of `n - 1` into positive degrees).
pub fn degree_statistics_of_size(n: u64) -> Vec<DegreeStatistics> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut parts = Vec::new();
    partitions(n - 1, n - 1, &mut parts, &mut |p| {
        let mut pairs: Vec<(usize, u64)> = p.iter().map(|&c| (c as usize, 1)).collect();
        pairs.push((0, n - p.len() as u64));
        out.push(DegreeStatistics::tree(pairs).expect("partitions give tree statistics"));
    });
    out
}

fn partitions(rest: u64, max: u64, parts: &mut Vec<u64>, emit: &mut impl FnMut(&[u64])) {
    if rest == 0 {
        emit(parts);
        return;
    }
    for part in (1..=max.min(rest)).rev() {
        parts.push(part);
        partitions(rest - part, part, parts, emit);
        parts.pop();
    }
}

/// Every tree degree statistics with at most `max_n` nodes, by size.
pub fn all_degree_statistics(max_n: u64) -> Vec<DegreeStatistics> {
    (1..=max_n).flat_map(degree_statistics_of_size).collect()
}

/// All plane trees with `n` nodes.
pub fn enumerate_all_trees(n: u64, cap: u64) -> Result<Vec<PlaneTree>> {
    let mut out = Vec::new();
    for stats in degree_statistics_of_size(n) {
        out.extend(enumerate_trees(&stats, cap)?);
    }
    Ok(out)
}

/// Usage counts `w(d, c)` of a spinal degree sequence, checked against `n(c)`.
pub fn usage_vector(stats: &DegreeStatistics, d: &[usize]) -> Result<BTreeMap<usize, u64>> {
    let mut w = BTreeMap::new();
    for &c in d {
        *w.entry(c).or_insert(0u64) += 1;
    }
    for (&degree, &used) in &w {
        let available = stats.count(degree);
        if used > available {
            return Err(Error::UsageExceeded { degree, used, available });
        }
    }
    Ok(w)
}

/// `|𝒯_n^•(d)| = (∏ d_i) · (n-k)! / ∏ (n(c) - w(d,c))!`.
pub fn count_spine_class(stats: &DegreeStatistics, d: &[usize]) -> Result<BigUint> {
    require_tree(stats)?;
    let w = usage_vector(stats, d)?;
    let prod: BigUint = d.iter().fold(BigUint::one(), |acc, &c| acc * c);
    let rest = multinomial(stats.iter().map(|(c, k)| k - w.get(&c).copied().unwrap_or(0)));
    Ok(prod * rest)
}

/// Probability that a uniform marked tree has mark depth at least `k` and
/// spinal degrees `d`, as `|𝒯_n^•(d)| / |𝒯_n^•|`.
pub fn spine_probability(stats: &DegreeStatistics, d: &[usize]) -> Result<BigRational> {
    let count = count_spine_class(stats, d)?;
    let total = count_forests(stats) * stats.node_count();
    Ok(ratio(count, total))
}

/// The falling-factorial form `(1/(n)_k) ∏ d_i ∏_c (n(c))_{w(d,c)}`.
pub fn spine_probability_closed_form(stats: &DegreeStatistics, d: &[usize]) -> Result<BigRational> {
    require_tree(stats)?;
    let w = usage_vector(stats, d)?;
    let mut num: BigUint = d.iter().fold(BigUint::one(), |acc, &c| acc * c);
    for (&c, &used) in &w {
        num *= falling_factorial(stats.count(c), used);
    }
    let den = falling_factorial(stats.node_count(), d.len() as u64);
    Ok(ratio(num, den))
}

/// Counts of marked trees by spinal prefix, for every prefix length up to
/// `max_k`, obtained by walking every enumerated tree.
pub fn spine_class_counts_enumerated(
    stats: &DegreeStatistics,
    max_k: usize,
    cap: u64,
) -> Result<HashMap<Vec<usize>, u64>> {
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for tree in enumerate_trees(stats, cap)? {
        let parents = tree.parents();
        for v in 0..tree.len() {
            let mut path = vec![v];
            let mut cur = v;
            while let Some(p) = parents[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            let depth = path.len() - 1;
            for k in 0..=max_k.min(depth) {
                let key: Vec<usize> = path[..k].iter().map(|&u| tree.degree(u)).collect();
                *counts.entry(key).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}

/// Enumeration ratios `|𝒯_n^•(d)| / |𝒯_n^•|` for every spinal prefix up to
/// length `max_k`.
pub fn spine_probabilities_enumerated(
    stats: &DegreeStatistics,
    max_k: usize,
    cap: u64,
) -> Result<HashMap<Vec<usize>, BigRational>> {
    let total = count_forests(stats) * stats.node_count();
    Ok(spine_class_counts_enumerated(stats, max_k, cap)?
        .into_iter()
        .map(|(d, c)| (d, ratio(BigUint::from(c), total.clone())))
        .collect())
}

/// Enumeration count of the spine class `𝒯_n^•(d)`.
pub fn count_spine_class_enumerated(stats: &DegreeStatistics, d: &[usize], cap: u64) -> Result<BigUint> {
    let counts = spine_class_counts_enumerated(stats, d.len(), cap)?;
    Ok(BigUint::from(counts.get(d).copied().unwrap_or(0)))
}

/// Every spinal degree sequence of length `k` whose usage fits inside `stats`.
pub fn admissible_spines(stats: &DegreeStatistics, k: usize) -> Vec<Vec<usize>> {
    let degrees: Vec<usize> = stats.iter().map(|(c, _)| c).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    let mut used: BTreeMap<usize, u64> = BTreeMap::new();
    fn rec(
        stats: &DegreeStatistics,
        degrees: &[usize],
        k: usize,
        cur: &mut Vec<usize>,
        used: &mut BTreeMap<usize, u64>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for &c in degrees {
            let u = used.entry(c).or_insert(0);
            if *u < stats.count(c) {
                *u += 1;
                cur.push(c);
                rec(stats, degrees, k, cur, used, out);
                cur.pop();
                *used.get_mut(&c).unwrap() -= 1;
            }
        }
    }
    rec(stats, &degrees, k, &mut cur, &mut used, &mut out);
    out
}

/// An exact law on `{0, 1, …, len-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDistribution {
    masses: Vec<BigRational>,
}

impl ExactDistribution {
    /// Masses for the support `0..masses.len()`; must be non-negative and sum to one.
    pub fn new(mut masses: Vec<BigRational>) -> Result<Self> {
        while masses.len() > 1 && masses.last().is_some_and(|m| m.is_zero()) {
            masses.pop();
        }
        if masses.iter().any(|m| m < &BigRational::zero()) {
            return Err(Error::OutOfRange("negative probability mass".into()));
        }
        let total: BigRational = masses.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::OutOfRange(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { masses })
    }

    pub fn support(&self) -> Vec<u64> {
        (0..self.masses.len() as u64).collect()
    }

    pub fn masses(&self) -> &[BigRational] {
        &self.masses
    }

    pub fn mass(&self, k: usize) -> BigRational {
        self.masses.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `P(X > k)`.
    pub fn tail_above(&self, k: usize) -> BigRational {
        self.masses.iter().skip(k + 1).cloned().sum()
    }

    pub fn masses_f64(&self) -> Vec<f64> {
        self.masses.iter().map(|m| m.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// `{"support":[...],"num":[...],"den":[...]}`; integers that overflow
    /// 64 bits are written as decimal strings.
    pub fn to_json(&self) -> Value {
        let big = |x: &BigInt| match x.to_u64() {
            Some(v) => json!(v),
            None => json!(x.to_string()),
        };
        json!({
            "support": self.support(),
            "num": self.masses.iter().map(|m| big(m.numer())).collect::<Vec<_>>(),
            "den": self.masses.iter().map(|m| big(m.denom())).collect::<Vec<_>>(),
        })
    }
}

/// Law of `|V|` for a uniform marked tree, by exhaustive enumeration.
pub fn exact_mark_height_distribution(stats: &DegreeStatistics, cap: u64) -> Result<ExactDistribution> {
    let mut by_depth: Vec<u64> = Vec::new();
    let mut total = 0u64;
    for tree in enumerate_trees(stats, cap)? {
        for d in tree.depths() {
            if d >= by_depth.len() {
                by_depth.resize(d + 1, 0);
            }
            by_depth[d] += 1;
            total += 1;
        }
    }
    let den = BigInt::from(total);
    ExactDistribution::new(
        by_depth
            .into_iter()
            .map(|k| BigRational::new(BigInt::from(k), den.clone()))
            .collect(),
    )
}

/// Law of `M - 1` from the size-biased spine formula, summed over usage
/// vectors by dynamic programming.
///
/// `P(M >= k+1) = W_k / (n)_k` where `W_k` sums `∏ d_i ∏_c (n(c))_{w(d,c)}`
/// over all length-`k` sequences; appending degree `c` to a sequence with
/// usage `w` multiplies its weight by `c · (n(c) - w(c))`.
pub fn exact_m_distribution(stats: &DegreeStatistics, cap: u64) -> Result<ExactDistribution> {
    require_tree(stats)?;
    check_cap(stats, cap)?;
    let n = stats.node_count();
    // leaves contribute weight 0, so only positive degrees enter the state
    let positive: Vec<(usize, u64)> = stats.iter().filter(|&(c, _)| c > 0).collect();

    let mut layer: HashMap<Vec<u64>, BigUint> = HashMap::new();
    layer.insert(vec![0; positive.len()], BigUint::one());
    // survival[k] = P(M >= k+1)
    let mut survival = vec![BigRational::one()];
    for k in 1..=n {
        let mut next: HashMap<Vec<u64>, BigUint> = HashMap::new();
        for (w, weight) in &layer {
            for (idx, &(c, count)) in positive.iter().enumerate() {
                if w[idx] < count {
                    let mut w2 = w.clone();
                    w2[idx] += 1;
                    let gain = weight * (c as u64 * (count - w[idx]));
                    *next.entry(w2).or_insert_with(BigUint::zero) += gain;
                }
            }
        }
        let total: BigUint = next.values().sum();
        if total.is_zero() {
            break;
        }
        survival.push(ratio(total, falling_factorial(n, k)));
        layer = next;
    }
    survival.push(BigRational::zero());
    let masses = survival.windows(2).map(|p| &p[0] - &p[1]).collect();
    ExactDistribution::new(masses)
}

/// Law of `M - 1` at any size: `P(M >= k+1) = k! e_k / (n)_k`, where `e_k`
/// is the `k`-th elementary symmetric polynomial of the degree multiset.
/// This is the spine formula summed over all sequences in closed form.
pub fn mark_depth_law(stats: &DegreeStatistics) -> Result<ExactDistribution> {
    require_tree(stats)?;
    let n = stats.node_count();
    // coefficients of ∏_c (1 + c x)^{n(c)}
    let mut poly = vec![BigUint::one()];
    for (c, k) in stats.iter().filter(|&(c, _)| c > 0) {
        for _ in 0..k {
            poly.push(BigUint::zero());
            for j in (1..poly.len()).rev() {
                let lower = poly[j - 1].clone();
                poly[j] += lower * c;
            }
        }
    }
    let mut survival: Vec<BigRational> = poly
        .iter()
        .enumerate()
        .map(|(k, e)| ratio(factorial(k as u64) * e, falling_factorial(n, k as u64)))
        .collect();
    survival.push(BigRational::zero());
    ExactDistribution::new(survival.windows(2).map(|p| &p[0] - &p[1]).collect())
}

/// Exact law of `σ = inf(i : B_i = 1)` (with `σ = n` when nothing fires),
/// by dynamic programming over the usage vector of the size-biased prefix.
pub fn exact_sigma_distribution(stats: &DegreeStatistics, cap: u64) -> Result<ExactDistribution> {
    require_tree(stats)?;
    check_cap(stats, cap)?;
    let n = stats.node_count();
    let entries: Vec<(usize, u64)> = stats.iter().collect();
    let p1 = stats.edge_count();
    let mut masses = vec![BigRational::zero(); n as usize + 1];
    let mut layer: HashMap<Vec<u64>, BigRational> = HashMap::new();
    layer.insert(vec![0; entries.len()], BigRational::one());
    for i in 1..n {
        let mut next: HashMap<Vec<u64>, BigRational> = HashMap::new();
        for (w, p) in &layer {
            let used: u64 = entries.iter().zip(w).map(|(&(c, _), &k)| c as u64 * k).sum();
            let s = used as i64 - (i as i64 - 1);
            let fire = BigRational::new(BigInt::from(s), BigInt::from(n - i));
            masses[i as usize] += p * &fire;
            let stay = p * (BigRational::one() - fire);
            if stay.is_zero() {
                continue;
            }
            let rem = p1 - used;
            for (idx, &(c, count)) in entries.iter().enumerate() {
                let left = count - w[idx];
                let step = if rem > 0 {
                    if c == 0 || left == 0 {
                        continue;
                    }
                    BigRational::new(BigInt::from(c as u64 * left), BigInt::from(rem))
                } else if c == 0 && left > 0 {
                    BigRational::one()
                } else {
                    continue;
                };
                let mut w2 = w.clone();
                w2[idx] += 1;
                *next.entry(w2).or_insert_with(BigRational::zero) += &stay * step;
            }
        }
        layer = next;
    }
    masses[n as usize] += layer.values().cloned().sum::<BigRational>();
    ExactDistribution::new(masses)
}

/// The law of [`exact_sigma_distribution`] in floating point, without a
/// size cap. The state space is the set of usage vectors, so this is meant
/// for statistics with few distinct degrees.
pub fn sigma_law_f64(stats: &DegreeStatistics) -> Result<Vec<f64>> {
    require_tree(stats)?;
    let n = stats.node_count();
    let entries: Vec<(usize, u64)> = stats.iter().collect();
    let p1 = stats.edge_count();
    let mut masses = vec![0.0; n as usize + 1];
    let mut layer: HashMap<Vec<u64>, f64> = HashMap::new();
    layer.insert(vec![0; entries.len()], 1.0);
    for i in 1..n {
        let mut next: HashMap<Vec<u64>, f64> = HashMap::new();
        for (w, &p) in &layer {
            let used: u64 = entries.iter().zip(w).map(|(&(c, _), &k)| c as u64 * k).sum();
            let fire = (used as f64 - (i as f64 - 1.0)) / (n - i) as f64;
            masses[i as usize] += p * fire;
            let stay = p * (1.0 - fire);
            if stay <= 0.0 {
                continue;
            }
            let rem = p1 - used;
            for (idx, &(c, count)) in entries.iter().enumerate() {
                let left = count - w[idx];
                let step = if rem > 0 {
                    if c == 0 || left == 0 {
                        continue;
                    }
                    (c as u64 * left) as f64 / rem as f64
                } else if c == 0 && left > 0 {
                    1.0
                } else {
                    continue;
                };
                let mut w2 = w.clone();
                w2[idx] += 1;
                *next.entry(w2).or_insert(0.0) += stay * step;
            }
        }
        layer = next;
    }
    masses[n as usize] += layer.values().sum::<f64>();
    Ok(masses)
}
