//! Small statistical helpers used to compare samplers with exact laws and
//! empirical tails with bounds.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// `|p̂ - p| <= k · sqrt(p(1-p)/trials)`.
pub fn within_standard_errors(successes: u64, trials: u64, p: f64, k: f64) -> bool {
    let phat = successes as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    (phat - p).abs() <= k * se
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub pass: bool,
}

impl ChiSquareOutcome {
    fn from_statistic(statistic: f64, dof: usize, alpha: f64) -> Self {
        let p_value = if dof == 0 {
            if statistic == 0.0 { 1.0 } else { 0.0 }
        } else if statistic.is_infinite() {
            0.0
        } else {
            ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
        };
        Self { statistic, dof, p_value, pass: p_value >= alpha }
    }
}

/// Groups consecutive bins so that every group has `weight >= min`; a short
/// final group is folded into its predecessor.
fn group_bins(weights: &[f64], min: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut cur = Vec::new();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cur.push(i);
        acc += w;
        if acc >= min {
            groups.push(std::mem::take(&mut cur));
            acc = 0.0;
        }
    }
    if !cur.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(cur),
            None => groups.push(cur),
        }
    }
    groups
}

/// Pearson goodness of fit of `observed` counts against probabilities
/// `expected` (same indexing; missing entries count as zero). Bins are
/// merged until each expected count is at least 5.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], alpha: f64) -> ChiSquareOutcome {
    let len = observed.len().max(expected.len());
    let total: u64 = observed.iter().sum();
    let obs = |i: usize| observed.get(i).copied().unwrap_or(0) as f64;
    let exp = |i: usize| expected.get(i).copied().unwrap_or(0.0) * total as f64;
    let weights: Vec<f64> = (0..len).map(exp).collect();
    // mass on an impossible outcome is an outright failure
    if (0..len).any(|i| weights[i] == 0.0 && obs(i) > 0.0) {
        return ChiSquareOutcome::from_statistic(f64::INFINITY, len.saturating_sub(1), alpha);
    }
    let groups = group_bins(&weights, 5.0);
    let statistic = groups
        .iter()
        .map(|g| {
            let o: f64 = g.iter().map(|&i| obs(i)).sum();
            let e: f64 = g.iter().map(|&i| weights[i]).sum();
            if e > 0.0 { (o - e).powi(2) / e } else { 0.0 }
        })
        .sum();
    ChiSquareOutcome::from_statistic(statistic, groups.len().saturating_sub(1), alpha)
}

/// Pearson two-sample homogeneity test on count vectors over the same bins.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], alpha: f64) -> ChiSquareOutcome {
    let len = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    // the smaller sample's expected count is the binding one
    let share = na.min(nb) / total;
    let pooled: Vec<f64> = (0..len).map(|i| (get(a, i) + get(b, i)) * share).collect();
    let groups = group_bins(&pooled, 5.0);
    let mut statistic = 0.0;
    for g in &groups {
        let oa: f64 = g.iter().map(|&i| get(a, i)).sum();
        let ob: f64 = g.iter().map(|&i| get(b, i)).sum();
        let row = oa + ob;
        if row == 0.0 {
            continue;
        }
        let ea = row * na / total;
        let eb = row * nb / total;
        statistic += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    ChiSquareOutcome::from_statistic(statistic, groups.len().saturating_sub(1), alpha)
}

/// Histogram of non-negative integer samples.
pub fn histogram<I: IntoIterator<Item = u64>>(values: I) -> Vec<u64> {
    let mut out = Vec::new();
    for v in values {
        let v = v as usize;
        if v >= out.len() {
            out.resize(v + 1, 0);
        }
        out[v] += 1;
    }
    out
}
