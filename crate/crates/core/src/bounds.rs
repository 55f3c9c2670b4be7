//! Closed-form evaluators for the explicit tail inequalities.
//!
//! All bounds are clamped to `[0, 1]`. Below the validity threshold
//! `β <= 17^{3/2}` (or `ℓ < 1`) they return the trivial bound 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trees::DegreeStatistics;

/// `17^{3/2}`.
pub fn beta_min() -> f64 {
    17f64.powf(1.5)
}

/// Degree-statistics summary consumed by the bound evaluators.
///
/// `v = (|n|_2^2 - n(1)) / (n - 1)` is kept as an exact fraction
/// `v_num / v_den` and only turned into a float inside exponentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInput {
    pub p1: u64,
    pub p2sq: u64,
    pub n1: u64,
    pub n: u64,
    pub v_num: u64,
    pub v_den: u64,
    pub dmax: usize,
}

impl BoundInput {
    pub fn from_stats(stats: &DegreeStatistics) -> Self {
        let norms = stats.norms();
        let n = stats.node_count();
        Self {
            p1: norms.p1,
            p2sq: norms.p2sq,
            n1: norms.n1,
            n,
            v_num: norms.p2sq - norms.n1,
            v_den: n.saturating_sub(1).max(1),
            dmax: stats.max_degree(),
        }
    }

    pub fn v(&self) -> f64 {
        self.v_num as f64 / self.v_den as f64
    }

    /// `|n|_1 / (|n|_2^2 - n(1))^{1/2}`; infinite for paths.
    pub fn ratio(&self) -> f64 {
        self.p1 as f64 / ((self.p2sq - self.n1) as f64).sqrt()
    }

    fn require_non_path(&self) -> Result<()> {
        if self.p2sq == self.n1 {
            return Err(Error::PathDegenerate);
        }
        Ok(())
    }

    fn require_no_ones(&self) -> Result<()> {
        if self.n1 > 0 {
            return Err(Error::HasOnes);
        }
        Ok(())
    }
}

fn stretched(ratio: f64, beta: f64) -> f64 {
    let first = (-(beta.cbrt() / 3.0) * ratio).exp();
    let second = 2.0 * (-beta.powf(2.0 / 3.0) / 24.0).exp();
    (first + second).min(1.0)
}

/// The level `β |n|_1 / (|n|_2^2 - n(1))^{1/2}` whose exceedance the
/// stretched-exponential bound controls.
pub fn height_threshold(inp: &BoundInput, beta: f64) -> Result<f64> {
    inp.require_non_path()?;
    Ok(beta * inp.ratio())
}

/// Bound on `P(|V| > β |n|_1 / (|n|_2^2 - n(1))^{1/2})`.
pub fn bound_height_tail(inp: &BoundInput, beta: f64) -> Result<f64> {
    inp.require_non_path()?;
    if beta <= beta_min() {
        return Ok(1.0);
    }
    Ok(stretched(inp.ratio(), beta))
}

/// Same inequality for `P(σ > β |n|_1 / (|n|_2^2 - n(1))^{1/2})`.
pub fn bound_sigma_tail(inp: &BoundInput, beta: f64) -> Result<f64> {
    bound_height_tail(inp, beta)
}

/// Bound on `P(|V| >= ℓ)` when `n(1) = 0`: `exp(-ℓ²/(2|n|_1))`.
pub fn bound_height_tail_no_ones(inp: &BoundInput, ell: u64) -> Result<f64> {
    inp.require_no_ones()?;
    if ell == 0 {
        return Ok(1.0);
    }
    let l = ell as f64;
    Ok((-(l * l) / (2.0 * inp.p1 as f64)).exp().min(1.0))
}

/// Bound on `P(σ >= ℓ)` when `n(1) = 0`: `exp(-(ℓ-1)²/(2|n|_1))`.
pub fn bound_sigma_tail_no_ones(inp: &BoundInput, ell: u64) -> Result<f64> {
    inp.require_no_ones()?;
    if ell <= 1 {
        return Ok(1.0);
    }
    let l = (ell - 1) as f64;
    Ok((-(l * l) / (2.0 * inp.p1 as f64)).exp().min(1.0))
}

/// The level `β ((n-1)/v)^{1/2}` for the `τ` bound; infinite when `v = 0`.
pub fn tau_threshold(inp: &BoundInput, beta: f64) -> f64 {
    beta * n_minus_one_over_v(inp).sqrt()
}

/// `(n-1)/v = (n-1)² / (|n|_2^2 - n(1))`.
fn n_minus_one_over_v(inp: &BoundInput) -> f64 {
    let m = inp.v_den as f64;
    m * m / inp.v_num as f64
}

/// Bound on `P(τ > β ((n-1)/v)^{1/2})`. With `v = 0` the event is
/// `τ > ∞`, bounded by 0.
pub fn bound_tau(inp: &BoundInput, beta: f64) -> f64 {
    if inp.v_num == 0 {
        return 0.0;
    }
    if beta < beta_min() {
        return 1.0;
    }
    let x = beta.powf(2.0 / 3.0);
    let first = (-(x * n_minus_one_over_v(inp)).sqrt() / 3.0).exp();
    let second = 2.0 * (-x / 24.0).exp();
    (first + second).min(1.0)
}

/// `(n - 1, d_max, Σ_{d_i >= 2} d_i²)` for a degree list with `n` entries.
fn degree_summary(degrees: &[usize]) -> Result<(f64, f64, f64)> {
    if degrees.len() < 2 {
        return Err(Error::OutOfRange("need at least two degrees".into()));
    }
    let m = (degrees.len() - 1) as f64;
    let dmax = degrees.iter().copied().max().unwrap_or(0) as f64;
    let sq = degrees.iter().filter(|&&d| d >= 2).map(|&d| (d * d) as f64).sum();
    Ok((m, dmax, sq))
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("t = {t} must be finite and non-negative")));
    }
    Ok(())
}

/// `log g(t, d) = Σ_{d_i >= 2} (log(1 + p_i t) - p_i t)` with `p_i = d_i / (2(n-1))`.
pub fn g_log(t: f64, degrees: &[usize]) -> Result<f64> {
    check_t(t)?;
    let (m, _, _) = degree_summary(degrees)?;
    Ok(degrees
        .iter()
        .filter(|&&d| d >= 2)
        .map(|&d| {
            let x = d as f64 * t / (2.0 * m);
            x.ln_1p() - x
        })
        .sum())
}

/// `g(t, d) = ∏_{d_i >= 2} (1 + p_i t) e^{-p_i t}`.
pub fn g_eval(t: f64, degrees: &[usize]) -> Result<f64> {
    Ok(g_log(t, degrees)?.exp())
}

/// The first `terms` terms (`k = 2, …, terms + 1`) of
/// `Σ_{k >= 2} ((-1)^{k+1}/k) Σ_{d_i >= 2} (p_i t)^k`, valid for `p_max t < 1`.
pub fn g_log_series(t: f64, degrees: &[usize], terms: usize) -> Result<f64> {
    check_t(t)?;
    let (m, dmax, _) = degree_summary(degrees)?;
    if dmax * t >= 2.0 * m {
        return Err(Error::OutOfRange(format!(
            "series needs t < 2(n-1)/d_max = {}",
            2.0 * m / dmax
        )));
    }
    let mut total = 0.0;
    for &d in degrees.iter().filter(|&&d| d >= 2) {
        let x = d as f64 * t / (2.0 * m);
        let mut power = x;
        let mut sum = 0.0;
        for k in 2..terms + 2 {
            power *= x;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * power / k as f64;
        }
        total += sum;
    }
    Ok(total)
}

/// `exp(-v t² / (24(n-1)))`, valid for `0 <= t <= (n-1)/d_max`.
pub fn g_upper(t: f64, degrees: &[usize]) -> Result<f64> {
    check_t(t)?;
    let (m, dmax, sq) = degree_summary(degrees)?;
    if dmax * t > m {
        return Err(Error::OutOfRange(format!("upper bound needs t <= (n-1)/d_max = {}", m / dmax)));
    }
    let v = sq / m;
    Ok((-v * t * t / (24.0 * m)).exp())
}

/// `log(1 + x) - x + x²/2` without cancellation for small `x`.
fn log1p_cubic_remainder(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut sum = 0.0;
        let mut power = x * x;
        for k in 3..40 {
            power *= x;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * power / k as f64;
        }
        sum
    } else {
        x.ln_1p() - x + 0.5 * x * x
    }
}

/// Both sides of the two-sided estimate
/// `|log g + v t²/(8(n-1))| <= (d_max t/(6(n-1) - 3 d_max t)) · (v t²/(4(n-1)))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBand {
    pub deviation: f64,
    pub allowance: f64,
}

impl ErrorBand {
    pub fn holds(&self) -> bool {
        self.deviation <= self.allowance
    }
}

pub fn g_error_band(t: f64, degrees: &[usize]) -> Result<ErrorBand> {
    check_t(t)?;
    let (m, dmax, sq) = degree_summary(degrees)?;
    if dmax * t >= 2.0 * m {
        return Err(Error::OutOfRange(format!("needs t < 2(n-1)/d_max = {}", 2.0 * m / dmax)));
    }
    // log g + v t²/(8(n-1)) = Σ (log(1+x_i) - x_i + x_i²/2)
    let deviation = degrees
        .iter()
        .filter(|&&d| d >= 2)
        .map(|&d| log1p_cubic_remainder(d as f64 * t / (2.0 * m)))
        .sum::<f64>()
        .abs();
    let v = sq / m;
    let allowance = if sq == 0.0 {
        0.0
    } else {
        dmax * t / (6.0 * m - 3.0 * dmax * t) * (v * t * t / (4.0 * m))
    };
    Ok(ErrorBand { deviation, allowance })
}

/// `e^{-t((h/t) log(h/t) - h/t + 1)}`, an upper bound on `P(Poisson(t) > h)` for `h >= t`.
pub fn poisson_tail_bound(t: f64, h: f64) -> Result<f64> {
    if !(t > 0.0) || h < t {
        return Err(Error::OutOfRange(format!("needs h >= t > 0, got t = {t}, h = {h}")));
    }
    let r = h / t;
    Ok((-t * (r * r.ln() - r + 1.0)).exp())
}
