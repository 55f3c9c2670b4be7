//! Weight sequences and simply generated trees.
//!
//! A weight sequence `w = (w_k)` gives a tree `t` the weight
//! `w(t) = ∏_v w_{deg(v)}`. This module evaluates `Φ(t) = Σ w_k t^k`,
//! `Ψ(t) = tΦ'(t)/Φ(t)`, the radius `ρ`, `ν = Ψ(ρ)`, `σ² = ρΨ'(ρ)` and the
//! tilted law `π`, computes `Z_n` by Lagrange inversion, samples from
//! `P(t) = w(t)/Z_n`, and implements the hat transformation of degree
//! statistics used for the `ν = 0` regime.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::oracle::{count_forests, degree_statistics_of_size, enumerate_all_trees, factorial, DEFAULT_CAP};
use crate::samplers::{sample_uniform_tree, ConditionedTreeSampler};
use crate::trees::{DegreeStatistics, PlaneTree};

/// Hard cap on summed terms for generator-backed sequences.
pub const SERIES_CAP: usize = 1_000_000;
const RELATIVE_STOP: f64 = 1e-14;
const OVERFLOW: f64 = 1e300;

#[derive(Clone)]
enum Source {
    List(Vec<f64>),
    /// `k -> ln w_k` (`-inf` for a zero weight), defined for `k <= cap`.
    Log { f: Arc<dyn Fn(usize) -> f64 + Send + Sync>, cap: usize },
}

/// Non-negative weights `w_0 > 0, w_1, …`, either listed or generated.
#[derive(Clone)]
pub struct WeightSequence {
    source: Source,
    rho_hint: Option<f64>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::List(w) => f.debug_struct("WeightSequence").field("weights", w).field("rho", &self.rho_hint).finish(),
            Source::Log { cap, .. } => f
                .debug_struct("WeightSequence")
                .field("generator_cap", cap)
                .field("rho", &self.rho_hint)
                .finish(),
        }
    }
}

impl WeightSequence {
    /// Finitely supported weights.
    pub fn from_list(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be finite and non-negative".into()));
        }
        if weights.first().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::InvalidDistribution("w_0 must be positive".into()));
        }
        Ok(Self { source: Source::List(weights), rho_hint: None })
    }

    /// Weights `w_k = f(k)` for `k <= cap`.
    pub fn from_fn<F: Fn(usize) -> f64 + Send + Sync + 'static>(cap: usize, f: F) -> Result<Self> {
        Self::from_log_fn(cap, move |k| f(k).ln())
    }

    /// Weights given through `ln w_k`, for sequences that overflow `f64`.
    pub fn from_log_fn<F: Fn(usize) -> f64 + Send + Sync + 'static>(cap: usize, f: F) -> Result<Self> {
        let w0 = f(0);
        if !(w0 > f64::NEG_INFINITY) || w0.is_nan() {
            return Err(Error::InvalidDistribution("w_0 must be positive".into()));
        }
        Ok(Self { source: Source::Log { f: Arc::new(f), cap }, rho_hint: None })
    }

    /// Supplies the radius of convergence (`0`, finite, or `f64::INFINITY`).
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho_hint = Some(rho);
        self
    }

    /// Largest index with a defined weight.
    pub fn cap(&self) -> usize {
        match &self.source {
            Source::List(w) => w.len() - 1,
            Source::Log { cap, .. } => *cap,
        }
    }

    pub fn log_weight(&self, k: usize) -> f64 {
        match &self.source {
            Source::List(w) => w.get(k).map_or(f64::NEG_INFINITY, |x| x.ln()),
            Source::Log { f, cap } => {
                if k > *cap {
                    f64::NEG_INFINITY
                } else {
                    f(k)
                }
            }
        }
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.log_weight(k).exp()
    }

    /// `true` for a listed sequence without a radius hint.
    pub fn is_finite_support(&self) -> bool {
        matches!(self.source, Source::List(_)) && self.rho_hint.is_none()
    }

    /// `max(k : w_k > 0)` over the defined range.
    pub fn max_degree(&self) -> usize {
        (0..=self.cap()).rev().find(|&k| self.log_weight(k) > f64::NEG_INFINITY).unwrap_or(0)
    }

    /// Radius of convergence: the hint if given, `∞` for finite support,
    /// otherwise a root-test estimate flagged as such.
    pub fn rho(&self) -> Result<RhoValue> {
        if let Some(r) = self.rho_hint {
            return Ok(RhoValue { value: r, estimated: false });
        }
        match &self.source {
            Source::List(_) => Ok(RhoValue { value: f64::INFINITY, estimated: false }),
            Source::Log { f, cap } => {
                let lo = (cap / 2).max(1);
                let growth = (lo..=*cap)
                    .map(|k| f(k) / k as f64)
                    .filter(|x| x.is_finite())
                    .fold(f64::NEG_INFINITY, f64::max);
                if growth == f64::NEG_INFINITY {
                    return Err(Error::RhoUnknown);
                }
                Ok(RhoValue { value: (-growth).exp(), estimated: true })
            }
        }
    }

    pub fn to_json(&self) -> Result<Value> {
        let Source::List(w) = &self.source else {
            return Err(Error::BadParameters("generated weight sequences have no JSON form".into()));
        };
        let rho = match self.rho_hint {
            None => Value::Null,
            Some(r) if r.is_infinite() => json!("infinity"),
            Some(r) => json!(r),
        };
        Ok(json!({ "weights": w, "rho": rho }))
    }

    /// `{"weights":[...], "rho": number | "infinity" | null}`.
    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::BadParameters(e.to_string()))?;
        let weights = v
            .get("weights")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::BadParameters("missing \"weights\" array".into()))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| Error::BadParameters("weights must be numbers".into())))
            .collect::<Result<Vec<f64>>>()?;
        let mut seq = Self::from_list(weights)?;
        match v.get("rho") {
            None | Some(Value::Null) => {}
            Some(Value::String(s)) if s == "infinity" => seq.rho_hint = Some(f64::INFINITY),
            Some(Value::Number(x)) => seq.rho_hint = x.as_f64(),
            Some(other) => return Err(Error::BadParameters(format!("bad rho {other}"))),
        }
        Ok(seq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoValue {
    pub value: f64,
    pub estimated: bool,
}

/// A summed series with an estimate of the neglected tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub tail_estimate: f64,
    pub terms: usize,
}

/// `Σ_k k^p w_k t^k`.
///
/// Listed sequences are summed exactly. Generated ones stop once ten
/// consecutive terms fall below `1e-14` of the partial sum, or at the cap,
/// where the tail is estimated by a local power-law fit; a fitted exponent
/// at most 1 means divergence.
pub fn moment_series(w: &WeightSequence, t: f64, p: i32) -> Result<SeriesSum> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::OutOfDomain(format!("t = {t} must be non-negative")));
    }
    let term = |k: usize| -> f64 {
        let lw = w.log_weight(k);
        if lw == f64::NEG_INFINITY {
            return 0.0;
        }
        if k == 0 {
            return if p == 0 { lw.exp() } else { 0.0 };
        }
        if t == 0.0 {
            return 0.0;
        }
        (lw + k as f64 * t.ln() + p as f64 * (k as f64).ln()).exp()
    };
    let last = w.cap().min(SERIES_CAP);
    let listed = matches!(w.source, Source::List(_));
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut history: Vec<(usize, f64)> = Vec::new();
    for k in 0..=last {
        let x = term(k);
        if x.is_infinite() || sum > OVERFLOW {
            return Err(Error::Diverged(format!("partial sums overflow at k = {k}")));
        }
        sum += x;
        if x > 0.0 {
            history.push((k, x));
            if history.len() > 64 {
                history.drain(..32);
            }
        }
        if !listed && k > 10 {
            if x <= RELATIVE_STOP * sum {
                quiet += 1;
                if quiet >= 10 {
                    return Ok(SeriesSum { value: sum, tail_estimate: x, terms: k + 1 });
                }
            } else {
                quiet = 0;
            }
        }
    }
    if listed || t == 0.0 {
        return Ok(SeriesSum { value: sum, tail_estimate: 0.0, terms: last + 1 });
    }
    // local power-law exponent from the last positive term and one near half its index
    let (k1, x1) = *history.last().unwrap_or(&(0, 0.0));
    if x1 == 0.0 {
        return Ok(SeriesSum { value: sum, tail_estimate: 0.0, terms: last + 1 });
    }
    let half = k1 / 2;
    let x0 = (half.max(1)..k1).map(|k| (k, term(k))).find(|&(_, x)| x > 0.0);
    let Some((k0, x0)) = x0 else {
        return Ok(SeriesSum { value: sum, tail_estimate: 0.0, terms: last + 1 });
    };
    let s = -(x1 / x0).ln() / (k1 as f64 / k0 as f64).ln();
    if s <= 1.0 + 1e-3 {
        return Err(Error::Diverged(format!("terms decay like k^-{s:.3}")));
    }
    let tail = x1 * k1 as f64 / (s - 1.0);
    Ok(SeriesSum { value: sum + tail, tail_estimate: tail, terms: last + 1 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiPsi {
    pub phi: f64,
    pub psi: f64,
    /// estimated neglected mass of the `Φ` series
    pub truncation_error: f64,
}

/// `(Φ(t), Ψ(t))`.
pub fn phi_psi(w: &WeightSequence, t: f64) -> Result<PhiPsi> {
    let s0 = moment_series(w, t, 0)?;
    if t == 0.0 {
        return Ok(PhiPsi { phi: s0.value, psi: 0.0, truncation_error: 0.0 });
    }
    let s1 = moment_series(w, t, 1)?;
    Ok(PhiPsi { phi: s0.value, psi: s1.value / s0.value, truncation_error: s0.tail_estimate })
}

/// `σ²`, which may be infinite or meaningless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variance {
    Finite(f64),
    Infinite,
    /// `ρ ∈ {0, ∞}`: there is no law `π` at the radius.
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuSigma {
    pub nu: f64,
    pub sigma2: Variance,
    pub rho: RhoValue,
}

/// `ν = Ψ(ρ)` and `σ² = ρΨ'(ρ)` (the variance of `π`).
pub fn nu_sigma(w: &WeightSequence) -> Result<NuSigma> {
    let rho = w.rho()?;
    if rho.value == 0.0 {
        return Ok(NuSigma { nu: 0.0, sigma2: Variance::NotApplicable, rho });
    }
    if rho.value.is_infinite() {
        return Ok(NuSigma { nu: w.max_degree() as f64, sigma2: Variance::NotApplicable, rho });
    }
    let s0 = match moment_series(w, rho.value, 0) {
        Ok(s) => s.value,
        Err(Error::Diverged(_)) => return nu_from_below(w, rho),
        Err(e) => return Err(e),
    };
    let s1 = match moment_series(w, rho.value, 1) {
        Ok(s) => s.value,
        Err(Error::Diverged(_)) => return Ok(NuSigma { nu: f64::INFINITY, sigma2: Variance::Infinite, rho }),
        Err(e) => return Err(e),
    };
    let nu = s1 / s0;
    let sigma2 = match moment_series(w, rho.value, 2) {
        Ok(s2) => Variance::Finite(s2.value / s0 - nu * nu),
        Err(Error::Diverged(_)) => Variance::Infinite,
        Err(e) => return Err(e),
    };
    Ok(NuSigma { nu, sigma2, rho })
}

/// `Φ(ρ) = ∞`: `ν` as the limit of `Ψ(t)` for `t ↑ ρ`.
fn nu_from_below(w: &WeightSequence, rho: RhoValue) -> Result<NuSigma> {
    let mut last = 0.0;
    for j in 2..=8 {
        let t = rho.value * (1.0 - 10f64.powi(-j));
        match phi_psi(w, t) {
            Ok(pp) => last = pp.psi,
            Err(Error::Diverged(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(NuSigma { nu: last, sigma2: Variance::NotApplicable, rho })
}

/// `π_t(k) = w_k t^k / Φ(t)` for `k < masses.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct TiltedLaw {
    pub t: f64,
    pub masses: Vec<f64>,
    pub truncation_mass: f64,
}

const TILTED_MAX_LEN: usize = 100_000;

/// The tilted law at any `t` where `Φ(t) < ∞`.
pub fn tilted_law(w: &WeightSequence, t: f64) -> Result<TiltedLaw> {
    let phi = moment_series(w, t, 0)?.value;
    let mut masses = Vec::new();
    let mut acc = 0.0;
    for k in 0..=w.cap().min(TILTED_MAX_LEN) {
        let lw = w.log_weight(k);
        let m = if lw == f64::NEG_INFINITY {
            0.0
        } else if k == 0 {
            lw.exp() / phi
        } else if t == 0.0 {
            0.0
        } else {
            (lw + k as f64 * t.ln()).exp() / phi
        };
        masses.push(m);
        acc += m;
        if acc >= 1.0 - 1e-15 {
            break;
        }
    }
    while masses.len() > 1 && masses.last() == Some(&0.0) {
        masses.pop();
    }
    Ok(TiltedLaw { t, masses, truncation_mass: (1.0 - acc).max(0.0) })
}

/// `π(k) = w_k ρ^k / Φ(ρ)`; `ρ = 0` gives `π = δ_0`.
pub fn pi_distribution(w: &WeightSequence) -> Result<TiltedLaw> {
    let rho = w.rho()?.value;
    if rho == 0.0 {
        return Ok(TiltedLaw { t: 0.0, masses: vec![1.0], truncation_mass: 0.0 });
    }
    if rho.is_infinite() {
        return Err(Error::PhiDiverges);
    }
    match tilted_law(w, rho) {
        Err(Error::Diverged(_)) => Err(Error::PhiDiverges),
        other => other,
    }
}

/// `base^exp` truncated to the first `len` coefficients.
pub fn truncated_power<T>(base: &[T], mut exp: usize, len: usize) -> Vec<T>
where
    T: Clone + Zero + One,
    for<'a> &'a T: Add<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let mul = |a: &[T], b: &[T]| -> Vec<T> {
        let mut out = vec![T::zero(); len];
        for (i, x) in a.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                out[i + j] = &out[i + j] + &(x * y);
            }
        }
        out
    };
    let mut result = vec![T::zero(); len];
    if len == 0 {
        return result;
    }
    result[0] = T::one();
    let mut square: Vec<T> = base.iter().take(len).cloned().collect();
    square.resize(len, T::zero());
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul(&result, &square);
        }
        exp >>= 1;
        if exp > 0 {
            square = mul(&square, &square);
        }
    }
    result
}

/// `Z_n = (1/n) [z^{n-1}] Φ(z)^n` in floating point.
pub fn partition_zn(w: &WeightSequence, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let base: Vec<f64> = (0..n).map(|k| w.weight(k)).collect();
    truncated_power(&base, n, n)[n - 1] / n as f64
}

/// `Z_n` with exact rational weights `w_0, w_1, …` (missing entries are zero).
pub fn partition_zn_exact(weights: &[BigRational], n: usize) -> BigRational {
    if n == 0 {
        return BigRational::zero();
    }
    let mut base: Vec<BigRational> = weights.iter().take(n).cloned().collect();
    base.resize(n, BigRational::zero());
    truncated_power(&base, n, n)[n - 1].clone() / BigRational::from_integer(BigInt::from(n))
}

/// `w(t) = ∏_v w_{deg(v)}` with exact weights.
pub fn tree_weight_exact(weights: &[BigRational], tree: &PlaneTree) -> BigRational {
    tree.word().iter().fold(BigRational::one(), |acc, &d| {
        acc * weights.get(d).cloned().unwrap_or_else(BigRational::zero)
    })
}

/// `Σ_{|t| = n} w(t)` by enumerating every tree.
pub fn partition_zn_enumerated(weights: &[BigRational], n: usize, cap: u64) -> Result<BigRational> {
    Ok(enumerate_all_trees(n as u64, cap)?
        .iter()
        .map(|t| tree_weight_exact(weights, t))
        .sum())
}

/// `ln(|𝒯_n| ∏ w_c^{n(c)})`.
fn log_class_weight(w: &WeightSequence, stats: &DegreeStatistics) -> f64 {
    let n = stats.node_count() as f64;
    let mut lw = ln_gamma(n + 1.0) - n.ln();
    for (c, k) in stats.iter() {
        lw -= ln_gamma(k as f64 + 1.0);
        let wc = w.log_weight(c);
        if wc == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        lw += k as f64 * wc;
    }
    lw
}

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Node cap for sampling by enumeration of degree statistics.
pub const ENUMERATION_SAMPLER_CAP: usize = 40;

/// Sampler for `P(t) = w(t)/Z_n` at a fixed size.
pub enum SimplyGeneratedSampler {
    /// `ρ > 0`: conditioned i.i.d. degrees under a tilt.
    Tilted(ConditionedTreeSampler),
    /// `ρ = 0`: pick degree statistics with weight `|𝒯_n| w(n)`, then a uniform tree.
    Enumerated { classes: Vec<DegreeStatistics>, alias: WeightedAliasIndex<f64> },
}

impl SimplyGeneratedSampler {
    pub fn new(w: &WeightSequence, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("tree size must be positive".into()));
        }
        let rho = w.rho()?.value;
        if rho > 0.0 {
            let logw: Vec<f64> = (0..n).map(|k| w.log_weight(k)).collect();
            return Ok(Self::Tilted(ConditionedTreeSampler::from_log_weights(&logw, n)?));
        }
        if n > ENUMERATION_SAMPLER_CAP {
            return Err(Error::TooLarge { size: n as u64, cap: ENUMERATION_SAMPLER_CAP as u64 });
        }
        let mut classes = Vec::new();
        let mut logs = Vec::new();
        for stats in degree_statistics_of_size(n as u64) {
            let lw = log_class_weight(w, &stats);
            if lw > f64::NEG_INFINITY {
                classes.push(stats);
                logs.push(lw);
            }
        }
        if classes.is_empty() {
            return Err(Error::ZeroPartition(n));
        }
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Self::Enumerated { classes, alias })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaneTree {
        match self {
            Self::Tilted(s) => s.sample(rng),
            Self::Enumerated { classes, alias } => {
                let stats = &classes[alias.sample(rng)];
                sample_uniform_tree(stats, rng).expect("classes are tree statistics")
            }
        }
    }
}

pub fn sample_simply_generated<R: Rng + ?Sized>(w: &WeightSequence, n: usize, rng: &mut R) -> Result<PlaneTree> {
    Ok(SimplyGeneratedSampler::new(w, n)?.sample(rng))
}

/// Exact law of the size-`n` tree under weights `w_k t^k`, one entry per
/// tree in enumeration order.
fn tilted_tree_law(weights: &[BigRational], t: &BigRational, n: usize, trees: &[PlaneTree]) -> Result<Vec<BigRational>> {
    let tilted: Vec<BigRational> = weights
        .iter()
        .enumerate()
        .map(|(k, w)| w * num_traits::pow(t.clone(), k))
        .collect();
    let raw: Vec<BigRational> = trees.iter().map(|tr| tree_weight_exact(&tilted, tr)).collect();
    let total: BigRational = raw.iter().cloned().sum();
    if total.is_zero() {
        return Err(Error::ZeroPartition(n));
    }
    Ok(raw.into_iter().map(|x| x / &total).collect())
}

/// Whether tilting `w_k -> w_k t^k` by `t1` and by `t2` gives the same law
/// on `n`-node trees (exact rational comparison over all trees).
pub fn tilt_invariance_check(weights: &[BigRational], t1: &BigRational, t2: &BigRational, n: usize) -> Result<bool> {
    for t in [t1, t2] {
        if *t <= BigRational::zero() {
            return Err(Error::OutOfDomain(format!("tilt {t} must be positive")));
        }
    }
    let trees = enumerate_all_trees(n as u64, DEFAULT_CAP)?;
    Ok(tilted_tree_law(weights, t1, n, &trees)? == tilted_tree_law(weights, t2, n, &trees)?)
}

fn check_hat_parameters(l: usize, m: usize) -> Result<()> {
    if l <= 2 || m <= 2 * l {
        return Err(Error::BadParameters(format!("need L > 2 and M > 2L, got L = {l}, M = {m}")));
    }
    Ok(())
}

/// The hat transformation: for each `0 < c <= L`, `m(c) = ⌊n(c)/M⌋` blocks
/// of `M` nodes of degree `c` are replaced by `c·m(c)` nodes of degree `M`
/// and `(M - c)·m(c)` leaves.
pub fn hat_transform(stats: &DegreeStatistics, l: usize, m: usize) -> Result<DegreeStatistics> {
    check_hat_parameters(l, m)?;
    let mm = m as u64;
    let mut counts: std::collections::BTreeMap<usize, u64> = stats.iter().collect();
    for c in 1..=l {
        let blocks = stats.count(c) / mm;
        if blocks == 0 {
            continue;
        }
        *counts.entry(c).or_insert(0) -= mm * blocks;
        *counts.entry(0).or_insert(0) += (mm - c as u64) * blocks;
        *counts.entry(m).or_insert(0) += c as u64 * blocks;
    }
    DegreeStatistics::new(counts)
}

/// `m(c) = ⌊n(c)/M⌋` for `c = 1..=L`.
pub fn hat_blocks(stats: &DegreeStatistics, l: usize, m: usize) -> Vec<u64> {
    (1..=l).map(|c| stats.count(c) / m as u64).collect()
}

/// `ln(w(n̂)/w(n))` evaluated directly from both statistics.
pub fn hat_log_weight_ratio_direct(w: &WeightSequence, stats: &DegreeStatistics, l: usize, m: usize) -> Result<f64> {
    let hat = hat_transform(stats, l, m)?;
    let lw = |s: &DegreeStatistics| -> f64 { s.iter().map(|(c, k)| k as f64 * w.log_weight(c)).sum() };
    Ok(lw(&hat) - lw(stats))
}

/// `ln ∏_{0<c<=L} (w_0^{M-c} w_M^c / w_c^M)^{m(c)}`.
pub fn hat_log_weight_ratio_formula(w: &WeightSequence, stats: &DegreeStatistics, l: usize, m: usize) -> Result<f64> {
    check_hat_parameters(l, m)?;
    let blocks = hat_blocks(stats, l, m);
    Ok((1..=l)
        .zip(blocks)
        .filter(|&(_, b)| b > 0)
        .map(|(c, b)| {
            b as f64
                * ((m - c) as f64 * w.log_weight(0) + c as f64 * w.log_weight(m) - m as f64 * w.log_weight(c))
        })
        .sum())
}

/// `|𝒯_n| <= ((M-1)!)^L (L+1)^n |𝒯_n̂|`, compared as exact integers.
pub fn hat_count_ratio_check(stats: &DegreeStatistics, l: usize, m: usize) -> Result<bool> {
    let hat = hat_transform(stats, l, m)?;
    let n = stats.node_count();
    let lhs = count_forests(stats);
    let factor = num_traits::pow(factorial(m as u64 - 1), l) * num_traits::pow(BigUint::from(l as u64 + 1), n as usize);
    Ok(lhs <= factor * count_forests(&hat))
}

/// `E[n_𝒯(0)/n]` for the simply generated tree of size `n`, by summing
/// over degree statistics.
pub fn expected_leaf_fraction(w: &WeightSequence, n: usize) -> Result<f64> {
    let mut logs = Vec::new();
    let mut fractions = Vec::new();
    for stats in degree_statistics_of_size(n as u64) {
        let lw = log_class_weight(w, &stats);
        if lw > f64::NEG_INFINITY {
            logs.push(lw);
            fractions.push(stats.count(0) as f64 / n as f64);
        }
    }
    if logs.is_empty() {
        return Err(Error::ZeroPartition(n));
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (lw, f) in logs.iter().zip(&fractions) {
        let p = (lw - max).exp();
        num += p * f;
        den += p;
    }
    Ok(num / den)
}
