//! The four experiment families.

use std::time::Instant;

use arbor::bounds::{
    bound_height_tail, bound_height_tail_no_ones, bound_sigma_tail, bound_sigma_tail_no_ones, bound_tau,
    tau_threshold, BoundInput,
};
use arbor::oracle::{
    admissible_spines, all_degree_statistics, count_forests, enumerate_trees, exact_m_distribution,
    exact_mark_height_distribution, mark_depth_law, sigma_law_f64, spine_probabilities_enumerated,
    spine_probability, spine_probability_closed_form,
};
use arbor::samplers::{
    sample_mark_height, sample_sigma_poissonized, ConditionedTreeSampler, OffspringDistribution, Tail,
};
use arbor::simply_generated::{pi_distribution, SimplyGeneratedSampler};
use arbor::stats::{wilson_interval, Z95};
use arbor::{DegreeStatistics, PlaneTree};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::config::{ConcentrationClass, ExperimentConfig, ExperimentKind, Target};
use crate::error::{HarnessError, Result};
use crate::parallel::{replicate, try_replicate};
use crate::report::{mean_se, median, tail_verdict, Cell, CellFactory, ExperimentReport};

/// Node cap for every enumeration-based check.
pub const ENUMERATION_CAP: u64 = 12;
/// Largest `max_n` accepted by the equivalence suite.
pub const EQUIVALENCE_MAX_N: u64 = 10;
/// Longest spine prefix compared by the equivalence suite.
pub const SPINE_MAX_K: usize = 4;
/// Usage-vector state budget for the exact `σ` law in tail sweeps.
const SIGMA_STATE_BUDGET: f64 = 5e6;
/// Largest size for which the exact `|V|` law is attached to tail cells.
const HEIGHT_EXACT_MAX_N: u64 = 20_000;

const KEY_HEIGHT: u64 = 1;
const KEY_POISSON: u64 = 2;

/// Runs any configuration.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match (config.kind, &config.target) {
        (ExperimentKind::Equivalence, _) => equivalence(config),
        (ExperimentKind::TailSweep, Target::AllSmall) => exact_tail_battery(config),
        (ExperimentKind::TailSweep, _) => run_tail_sweep(config),
        (ExperimentKind::Convergence, _) => run_convergence(config),
        (ExperimentKind::Concentration, _) => run_concentration(config),
    }
}

/// `P(X = k)` to `P(X >= k)`, with a trailing zero.
fn survival(masses: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; masses.len() + 1];
    for k in (0..masses.len()).rev() {
        out[k] = out[k + 1] + masses[k];
    }
    out
}

/// `P(X >= k)` from a survival vector.
fn at_least(surv: &[f64], k: u64) -> f64 {
    surv.get(k as usize).copied().unwrap_or(0.0)
}

/// `P(X > x)` for integer-valued `X`.
fn greater_than(surv: &[f64], x: f64) -> f64 {
    if x < 0.0 {
        return 1.0;
    }
    if !x.is_finite() {
        return 0.0;
    }
    at_least(surv, x.floor() as u64 + 1)
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

pub fn run_equivalence_suite(max_n: u64) -> Result<ExperimentReport> {
    equivalence(&ExperimentConfig::new(ExperimentKind::Equivalence, Target::AllSmall, vec![max_n], 1, 0))
}

/// Exhaustive oracle cross-checks for every degree statistics with at most
/// `sizes[0]` nodes: the forest count formula, the `M` identity, and the
/// spine formulas for prefixes up to length 4.
fn equivalence(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let max_n = config.sizes[0];
    if max_n > EQUIVALENCE_MAX_N {
        return Err(HarnessError::Config(format!("max_n must be at most {EQUIVALENCE_MAX_N}")));
    }
    let start = Instant::now();
    let f = CellFactory { config };
    let mut cells = Vec::new();
    for s in all_degree_statistics(max_n) {
        let label = s.to_string();
        let n = s.node_count();

        let enumerated = enumerate_trees(&s, ENUMERATION_CAP)?.count();
        let formula = count_forests(&s);
        let equal = formula == BigUint::from(enumerated);
        cells.push(f.cell(
            "count",
            &label,
            n,
            0.0,
            enumerated as f64,
            formula.to_f64().unwrap_or(f64::INFINITY),
            equal,
            "exact_equal",
            config.clone(),
        ));

        let identical =
            exact_m_distribution(&s, ENUMERATION_CAP)? == exact_mark_height_distribution(&s, ENUMERATION_CAP)?;
        let indicator = if identical { 1.0 } else { 0.0 };
        cells.push(f.cell("m_identity", &label, n, 0.0, indicator, 1.0, identical, "rational_equal", config.clone()));

        let enumerated = spine_probabilities_enumerated(&s, SPINE_MAX_K, ENUMERATION_CAP)?;
        let mut checked = 0u64;
        let mut agree = 0u64;
        for k in 0..=SPINE_MAX_K {
            for d in admissible_spines(&s, k) {
                let closed = spine_probability_closed_form(&s, &d)?;
                let counted = spine_probability(&s, &d)?;
                let ok = closed == counted
                    && match enumerated.get(&d) {
                        Some(e) => *e == closed,
                        None => closed.is_zero(),
                    };
                checked += 1;
                agree += u64::from(ok);
            }
        }
        cells.push(f.cell(
            "spine",
            &label,
            n,
            SPINE_MAX_K as f64,
            agree as f64,
            checked as f64,
            agree == checked,
            "rational_equal_all_prefixes",
            config.clone(),
        ));
    }
    Ok(ExperimentReport::new(config.clone(), cells, elapsed(start)))
}

/// Exact-law tails of `|V|` and `σ` against the explicit bounds for every
/// tree degree statistics with at most `sizes[0]` nodes.
fn exact_tail_battery(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let f = CellFactory { config };
    let mut cells = Vec::new();
    for s in all_degree_statistics(config.sizes[0]) {
        let n = s.node_count();
        if n < 2 {
            continue;
        }
        let label = s.to_string();
        let inp = BoundInput::from_stats(&s);
        let height = survival(&mark_depth_law(&s)?.masses_f64());
        // σ_P = σ - 1
        let sigma = survival(&sigma_law_f64(&s)?[1..]);
        let mut push_worst = |name: &str, points: Vec<(f64, f64, f64)>| {
            let worst = points
                .into_iter()
                .max_by(|a, b| (a.1 - a.2).total_cmp(&(b.1 - b.2)))
                .expect("non-empty grid");
            let mut cell = f.cell(
                name,
                &label,
                n,
                worst.0,
                worst.1,
                worst.2,
                worst.1 <= worst.2 * (1.0 + 1e-9),
                "exact<=bound(worst grid point)",
                config.clone(),
            );
            cell.exact = Some(worst.1);
            cells.push(cell);
        };
        if inp.p2sq > inp.n1 && !config.grid.is_empty() {
            let ratio = inp.ratio();
            let mut h = Vec::new();
            let mut sg = Vec::new();
            for &beta in &config.grid {
                h.push((beta, greater_than(&height, beta * ratio), bound_height_tail(&inp, beta)?));
                sg.push((beta, greater_than(&sigma, beta * ratio), bound_sigma_tail(&inp, beta)?));
            }
            push_worst("exact_height_tail", h);
            push_worst("exact_sigma_tail", sg);
        }
        if inp.n1 == 0 {
            let h = (1..=n)
                .map(|l| Ok((l as f64, at_least(&height, l), bound_height_tail_no_ones(&inp, l)?)))
                .collect::<Result<Vec<_>>>()?;
            push_worst("exact_height_tail_no_ones", h);
            let sg = (1..=n)
                .map(|l| Ok((l as f64, at_least(&sigma, l), bound_sigma_tail_no_ones(&inp, l)?)))
                .collect::<Result<Vec<_>>>()?;
            push_worst("exact_sigma_tail_no_ones", sg);
        }
    }
    Ok(ExperimentReport::new(config.clone(), cells, elapsed(start)))
}

/// Size of the usage-vector state space of the exact `σ` law.
fn sigma_states(s: &DegreeStatistics) -> f64 {
    s.iter().map(|(_, k)| (k + 1) as f64).product()
}

#[allow(clippy::too_many_arguments)]
fn tail_cell(
    f: &CellFactory,
    name: &str,
    label: &str,
    n: u64,
    grid_value: f64,
    successes: u64,
    trials: u64,
    bound: f64,
    exact: Option<f64>,
    reproduce: ExperimentConfig,
) -> Cell {
    let p = successes as f64 / trials as f64;
    let (lo, hi, verdict, rule) = tail_verdict(successes, trials, bound, exact);
    let mut cell = f.cell(name, label, n, grid_value, p, bound, verdict, rule, reproduce);
    cell.ci_lo = lo;
    cell.ci_hi = hi;
    cell.std_error = (p * (1.0 - p) / trials as f64).sqrt();
    cell.exact = exact;
    cell
}

/// Monte Carlo tails of `|V|`, `σ` and `τ` for one degree statistics over
/// the `β` grid, plus every `ℓ` of the `n(1) = 0` bounds when they apply.
pub fn run_tail_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let Target::Statistics(s) = &config.target else {
        return Err(HarnessError::Config("tail sweeps need degree statistics".into()));
    };
    if !s.is_tree() {
        return Err(HarnessError::Config("tail sweeps need the statistics of a single tree".into()));
    }
    let inp = BoundInput::from_stats(s);
    if inp.p2sq == inp.n1 {
        return Err(arbor::Error::PathDegenerate.into());
    }
    let start = Instant::now();
    let f = CellFactory { config };
    let n = s.node_count();
    let reps = config.replications;
    let label = s.to_string();

    let heights: Vec<u64> = try_replicate(config.seed, KEY_HEIGHT, reps, |rng| sample_mark_height(s, rng))?;
    let runs: Vec<(u64, Option<u64>)> = try_replicate(config.seed, KEY_POISSON, reps, |rng| {
        sample_sigma_poissonized(s, rng).map(|r| (r.records_before_tau, r.tau))
    })?;

    let height_law =
        if n <= HEIGHT_EXACT_MAX_N { Some(survival(&mark_depth_law(s)?.masses_f64())) } else { None };
    let sigma_law =
        if sigma_states(s) <= SIGMA_STATE_BUDGET { Some(survival(&sigma_law_f64(s)?[1..])) } else { None };

    let mut cells = Vec::new();
    let ratio = inp.ratio();
    for &beta in &config.grid {
        let mut sub = config.clone();
        sub.grid = vec![beta];
        let thr = beta * ratio;
        let k = heights.iter().filter(|&&h| h as f64 > thr).count() as u64;
        let exact = height_law.as_ref().map(|l| greater_than(l, thr));
        cells.push(tail_cell(&f, "height_tail", &label, n, beta, k, reps, bound_height_tail(&inp, beta)?, exact, sub.clone()));

        let k = runs.iter().filter(|r| r.0 as f64 > thr).count() as u64;
        let exact = sigma_law.as_ref().map(|l| greater_than(l, thr));
        cells.push(tail_cell(&f, "sigma_tail", &label, n, beta, k, reps, bound_sigma_tail(&inp, beta)?, exact, sub.clone()));

        let thr = tau_threshold(&inp, beta);
        let k = runs.iter().filter(|r| r.1.is_none_or(|t| t as f64 > thr)).count() as u64;
        cells.push(tail_cell(&f, "tau_tail", &label, n, beta, k, reps, bound_tau(&inp, beta), None, sub));
    }
    if inp.n1 == 0 {
        let mut sub = config.clone();
        sub.grid = Vec::new();
        let mut h_hist = vec![0u64; n as usize + 2];
        let mut s_hist = vec![0u64; n as usize + 2];
        for &h in &heights {
            h_hist[h as usize] += 1;
        }
        for r in &runs {
            s_hist[r.0 as usize] += 1;
        }
        let tail_counts = |hist: &[u64]| -> Vec<u64> {
            let mut out = vec![0u64; hist.len() + 1];
            for k in (0..hist.len()).rev() {
                out[k] = out[k + 1] + hist[k];
            }
            out
        };
        let (h_tail, s_tail) = (tail_counts(&h_hist), tail_counts(&s_hist));
        for l in 1..=n {
            let exact = height_law.as_ref().map(|law| at_least(law, l));
            let bound = bound_height_tail_no_ones(&inp, l)?;
            cells.push(tail_cell(&f, "height_tail_no_ones", &label, n, l as f64, h_tail[l as usize], reps, bound, exact, sub.clone()));
            let exact = sigma_law.as_ref().map(|law| at_least(law, l));
            let bound = bound_sigma_tail_no_ones(&inp, l)?;
            cells.push(tail_cell(&f, "sigma_tail_no_ones", &label, n, l as f64, s_tail[l as usize], reps, bound, exact, sub.clone()));
        }
    }
    Ok(ExperimentReport::new(config.clone(), cells, elapsed(start)))
}

/// Descriptive cells (mean with a normal 95% interval, and median).
fn describe(f: &CellFactory, name: &str, label: &str, n: u64, grid_value: f64, xs: &[f64], sub: ExperimentConfig) -> [Cell; 2] {
    let (mean, se) = mean_se(xs);
    let mut c = f.cell(name, label, n, grid_value, mean, 0.0, true, "descriptive", sub.clone());
    c.std_error = se;
    c.ci_lo = mean - Z95 * se;
    c.ci_hi = mean + Z95 * se;
    let m = f.cell(&format!("{name}_median"), label, n, grid_value, median(xs), 0.0, true, "descriptive", sub);
    [c, m]
}

fn mean_depth(t: &PlaneTree) -> f64 {
    t.depths().iter().sum::<usize>() as f64 / t.len() as f64
}

fn non_path(mu: &OffspringDistribution) -> Result<()> {
    if mu.mass(0) + mu.mass(1) >= 1.0 {
        return Err(HarnessError::Hypothesis("μ(0) + μ(1) = 1 gives paths only".into()));
    }
    Ok(())
}

/// Size-ladder trends for conditioned Bienaymé trees, or the `Ĉ` estimate
/// across the lazy-binary family.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match &config.target {
        Target::Offspring(mu) => convergence_ladder(config, mu),
        Target::LazyBinaryFamily => scaling_family(config),
        _ => Err(HarnessError::Config("convergence runs need an offspring law or the lazy-binary family".into())),
    }
}

fn convergence_ladder(config: &ExperimentConfig, mu: &OffspringDistribution) -> Result<ExperimentReport> {
    non_path(mu)?;
    let start = Instant::now();
    let f = CellFactory { config };
    let label = if config.control { "control" } else { "offspring" };
    let mut cells = Vec::new();
    let mut means: [Vec<f64>; 3] = Default::default();
    for &n in &config.sizes {
        let mut sub = config.clone();
        sub.sizes = vec![n];
        let sampler = ConditionedTreeSampler::from_offspring(mu, n as usize)?;
        let sq = (n as f64).sqrt();
        let log3 = (n as f64).ln().powi(3);
        let obs: Vec<[f64; 3]> = replicate(config.seed, n, config.replications, |rng| {
            let t = sampler.sample(rng);
            [t.width() as f64 / sq, t.height() as f64 / (sq * log3), mean_depth(&t) / sq]
        });
        for (i, name) in ["wid_over_sqrt_n", "ht_over_sqrt_n_log3_n", "depth_over_sqrt_n"].into_iter().enumerate() {
            let xs: Vec<f64> = obs.iter().map(|o| o[i]).collect();
            means[i].push(mean_se(&xs).0);
            cells.extend(describe(&f, name, label, n, n as f64, &xs, sub.clone()));
        }
    }
    let steps = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|p| p[1] / p[0]).collect() };
    let last = *config.sizes.last().unwrap();
    if config.control {
        let growth = means[0].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            / means[0].iter().copied().fold(f64::INFINITY, f64::min);
        cells.push(f.cell("wid_growth_factor", label, last, 0.0, growth, 2.0, growth < 2.0, "max/min<bound", config.clone()));
    } else {
        let min_step = steps(&means[0]).into_iter().fold(f64::INFINITY, f64::min);
        cells.push(f.cell("wid_trend_increasing", label, last, 0.0, min_step, 1.0, min_step > 1.0, "min_step_ratio>bound", config.clone()));
        let max_step = steps(&means[2]).into_iter().fold(f64::NEG_INFINITY, f64::max);
        cells.push(f.cell("depth_trend_decreasing", label, last, 0.0, max_step, 1.0, max_step < 1.0, "max_step_ratio<bound", config.clone()));
    }
    let max_step = steps(&means[1]).into_iter().fold(f64::NEG_INFINITY, f64::max);
    cells.push(f.cell("ht_trend_decreasing", label, last, 0.0, max_step, 1.0, max_step < 1.0, "max_step_ratio<bound", config.clone()));
    Ok(ExperimentReport::new(config.clone(), cells, elapsed(start)))
}

/// Stream key of a family member, tied to the value of `ε` so that a
/// single-member sub-config reproduces its cell.
fn epsilon_key(eps: f64) -> u64 {
    (eps * 1e6).round() as u64
}

fn scaling_family(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.grid.is_empty() {
        return Err(HarnessError::Config("the lazy-binary family needs ε values in the grid".into()));
    }
    let start = Instant::now();
    let f = CellFactory { config };
    let n = config.sizes[0];
    let mut cells = Vec::new();
    let mut estimates = Vec::new();
    for &eps in &config.grid {
        let mut sub = config.clone();
        sub.grid = vec![eps];
        sub.sizes = vec![n];
        let mu = OffspringDistribution::lazy_binary(eps)?;
        non_path(&mu)?;
        let spread = (1.0 - mu.mass(0) - mu.mass(1)).sqrt();
        let sampler = ConditionedTreeSampler::from_offspring(&mu, n as usize)?;
        let scale = spread / (n as f64).sqrt();
        let xs: Vec<f64> =
            replicate(config.seed, epsilon_key(eps), config.replications, |rng| mean_depth(&sampler.sample(rng)) * scale);
        let [mean_cell, median_cell] = describe(&f, "c_hat", &format!("lazy_binary({eps})"), n, eps, &xs, sub);
        estimates.push(mean_cell.empirical);
        cells.push(mean_cell);
        cells.push(median_cell);
    }
    let hi = estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    cells.push(f.cell("c_hat_spread", "lazy_binary", n, 0.0, hi / lo, 2.0, hi / lo < 2.0, "max/min<bound", config.clone()));
    Ok(ExperimentReport::new(config.clone(), cells, elapsed(start)))
}

fn check_class(class: ConcentrationClass, mu: &OffspringDistribution) -> Result<()> {
    let fail = |msg: &str| Err(HarnessError::Hypothesis(msg.to_string()));
    match class {
        ConcentrationClass::Prop23 => {
            if mu.mean() > 1.0 + 1e-9 || mu.second_moment().is_finite() {
                return fail("prop2.3 needs |μ|_1 <= 1 and |μ|_2 = ∞");
            }
        }
        ConcentrationClass::Prop24 => {
            if mu.mean() >= 1.0 || !matches!(mu.tail(), Some(Tail::PowerLaw { .. })) {
                return fail("prop2.4 needs |μ|_1 < 1 and a tail with no exponential moment");
            }
        }
        ConcentrationClass::Prop25 => non_path(mu)?,
        ConcentrationClass::Thm52 => return fail("thm5.2 takes a weight sequence"),
    }
    Ok(())
}

/// Fraction of replications whose degree statistics satisfy the class
/// inequality, against the configured threshold.
pub fn run_concentration(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let class = config.class.ok_or_else(|| HarnessError::Config("concentration runs need a class".into()))?;
    let start = Instant::now();
    let f = CellFactory { config };
    let n = config.sizes[0];
    // (passes, margin) per replication
    let outcomes: Vec<(bool, f64)> = match (&config.target, class) {
        (Target::Offspring(mu), _) => {
            check_class(class, mu)?;
            let sampler = ConditionedTreeSampler::from_offspring(mu, n as usize)?;
            let factor = 4.0 * (1.0 - mu.mass(0) - mu.mass(1) - config.epsilon);
            replicate(config.seed, n, config.replications, |rng| {
                let norms = sampler.sample(rng).degree_statistics().norms();
                let (lhs, rhs) = match class {
                    ConcentrationClass::Prop25 => ((norms.p2sq - norms.n1) as f64, norms.p1 as f64 * factor),
                    _ => (norms.p2sq as f64, config.c * norms.p1 as f64),
                };
                (lhs >= rhs, lhs / rhs)
            })
        }
        (Target::Weights(_), ConcentrationClass::Thm52) => {
            let w = config.target.weights()?;
            let pi = pi_distribution(&w)?;
            let sampler = SimplyGeneratedSampler::new(&w, n as usize)?;
            replicate(config.seed, n, config.replications, |rng| {
                let stats = sampler.sample(rng).degree_statistics();
                let dev = (0..=3)
                    .map(|k| (stats.count(k) as f64 / n as f64 - pi.masses.get(k).copied().unwrap_or(0.0)).abs())
                    .fold(0.0, f64::max);
                (dev < config.epsilon, dev)
            })
        }
        _ => return Err(HarnessError::Config("class and target do not match".into())),
    };
    let label = serde_json::to_value(class)?.as_str().unwrap_or_default().to_string();
    let passes = outcomes.iter().filter(|o| o.0).count() as u64;
    let reps = config.replications;
    let frac = passes as f64 / reps as f64;
    let (lo, hi) = wilson_interval(passes, reps, Z95);
    let mut cell = f.cell("pass_fraction", &label, n, config.threshold, frac, config.threshold, frac >= config.threshold, "fraction>=bound", config.clone());
    cell.ci_lo = lo;
    cell.ci_hi = hi;
    cell.std_error = (frac * (1.0 - frac) / reps as f64).sqrt();
    let margins: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let mut cells = vec![cell];
    cells.extend(describe(&f, "margin", &label, n, config.threshold, &margins, config.clone()));
    Ok(ExperimentReport::new(config.clone(), cells, elapsed(start)))
}
