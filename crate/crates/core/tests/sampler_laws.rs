//! Samplers checked against exact laws from the enumeration oracle.
//! Seeds are fixed; every goodness-of-fit test runs at the 1% level.

use std::collections::HashMap;

use arbor::bounds::poisson_tail_bound;
use arbor::oracle::{
    all_degree_statistics, count_forests, enumerate_all_trees, enumerate_trees, exact_mark_height_distribution,
    exact_sigma_distribution,
};
use arbor::samplers::{
    sample_conditioned_bienayme, sample_mark_height, sample_sigma, sample_uniform_marked_tree, sample_uniform_tree,
    ConditionedTreeSampler, OffspringDistribution, RngStream,
};
use arbor::simply_generated::{sample_simply_generated, SimplyGeneratedSampler, WeightSequence};
use arbor::stats::{chi_square_gof, histogram, within_standard_errors};
use arbor::{DegreeStatistics, PlaneTree};
use num_traits::ToPrimitive;

const DRAWS: usize = 100_000;
const ALPHA: f64 = 0.01;

fn stats(pairs: &[(usize, u64)]) -> DegreeStatistics {
    DegreeStatistics::new(pairs.iter().copied()).unwrap()
}

/// Index of each tree in a fixed list, by word.
fn index_of(trees: &[PlaneTree]) -> HashMap<Vec<usize>, usize> {
    trees.iter().enumerate().map(|(i, t)| (t.word().to_vec(), i)).collect()
}

fn tree_counts<F: FnMut() -> PlaneTree>(trees: &[PlaneTree], draws: usize, mut draw: F) -> Vec<u64> {
    let index = index_of(trees);
    let mut counts = vec![0u64; trees.len()];
    for _ in 0..draws {
        let t = draw();
        counts[*index.get(t.word()).expect("sample outside the support")] += 1;
    }
    counts
}

fn normalized(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

#[test]
fn uniform_tree_sampler_is_uniform() {
    let mut rng = RngStream::new(0x5eed_0001, 0).rng();
    let mut checked = 0;
    for s in all_degree_statistics(9) {
        let count = count_forests(&s).to_u64().unwrap();
        if !(2..=30).contains(&count) {
            continue;
        }
        let trees: Vec<PlaneTree> = enumerate_trees(&s, 12).unwrap().collect();
        let counts = tree_counts(&trees, DRAWS, || sample_uniform_tree(&s, &mut rng).unwrap());
        let outcome = chi_square_gof(&counts, &vec![1.0 / count as f64; trees.len()], ALPHA);
        assert!(outcome.pass, "{s}: {outcome:?}");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} statistics checked");
}

#[test]
fn uniform_marked_tree_is_uniform_over_pairs() {
    let s = stats(&[(0, 3), (1, 1), (3, 1)]);
    let trees: Vec<PlaneTree> = enumerate_trees(&s, 12).unwrap().collect();
    let index = index_of(&trees);
    let n = s.node_count() as usize;
    let mut counts = vec![0u64; trees.len() * n];
    let mut rng = RngStream::new(0x5eed_0002, 0).rng();
    for _ in 0..DRAWS {
        let m = sample_uniform_marked_tree(&s, &mut rng).unwrap();
        counts[index[m.tree().word()] * n + m.mark()] += 1;
    }
    let outcome = chi_square_gof(&counts, &vec![1.0 / counts.len() as f64; counts.len()], ALPHA);
    assert!(outcome.pass, "{outcome:?}");
}

#[test]
fn mark_height_sampler_matches_exact_law_for_all_small_statistics() {
    let mut rng = RngStream::new(0x5eed_0003, 0).rng();
    let mut failures = Vec::new();
    let battery = all_degree_statistics(9);
    for s in &battery {
        let exact = exact_mark_height_distribution(s, 12).unwrap().masses_f64();
        let counts = histogram((0..DRAWS).map(|_| sample_mark_height(s, &mut rng).unwrap()));
        let outcome = chi_square_gof(&counts, &exact, ALPHA);
        if !outcome.pass {
            failures.push((s.to_string(), outcome.p_value));
        }
    }
    assert!(failures.is_empty(), "failures: {failures:?}");
    assert_eq!(battery.len(), 67);
}

#[test]
fn sigma_sampler_matches_exact_law() {
    let battery = [
        stats(&[(0, 3), (2, 2)]),
        stats(&[(0, 5), (2, 4)]),
        stats(&[(0, 4), (1, 2), (3, 1), (2, 1)]),
        stats(&[(0, 6), (3, 1), (4, 1), (1, 1)]),
        stats(&[(0, 7), (2, 6)]),
        stats(&[(0, 5), (1, 3), (2, 2), (3, 1)]),
    ];
    let mut rng = RngStream::new(0x5eed_0004, 0).rng();
    for s in &battery {
        let exact = exact_sigma_distribution(s, 14).unwrap().masses_f64();
        let counts = histogram((0..DRAWS).map(|_| sample_sigma(s, &mut rng).unwrap()));
        let outcome = chi_square_gof(&counts, &exact, ALPHA);
        assert!(outcome.pass, "{s}: {outcome:?}");
    }
}

#[test]
fn sigma_dominates_m() {
    // M = |V| + 1 is the first i with A_i = 1
    let battery = [
        stats(&[(0, 5), (2, 4)]),
        stats(&[(0, 5), (1, 3), (2, 2), (3, 1)]),
        stats(&[(0, 9), (1, 4), (4, 1), (2, 1), (3, 2)]),
    ];
    let mut rng = RngStream::new(0x5eed_0005, 0).rng();
    for s in &battery {
        let sigma = histogram((0..DRAWS).map(|_| sample_sigma(s, &mut rng).unwrap()));
        let m = histogram((0..DRAWS).map(|_| sample_mark_height(s, &mut rng).unwrap() + 1));
        let tail = |h: &[u64], l: usize| h.iter().skip(l).sum::<u64>() as f64 / DRAWS as f64;
        for l in 0..sigma.len().max(m.len()) {
            let (ps, pm) = (tail(&sigma, l), tail(&m, l));
            let se = ((ps * (1.0 - ps) + pm * (1.0 - pm)) / DRAWS as f64).sqrt();
            assert!(ps >= pm - 3.0 * se, "{s}, ℓ = {l}: P(σ ≥ ℓ) = {ps}, P(M ≥ ℓ) = {pm}");
        }
    }
}

/// `P(T_n = t) ∝ ∏ μ(deg v)` over all `n`-node trees.
fn conditioned_law(mu: &OffspringDistribution, trees: &[PlaneTree]) -> Vec<f64> {
    normalized(&trees.iter().map(|t| t.word().iter().map(|&d| mu.mass(d)).product()).collect::<Vec<f64>>())
}

#[test]
fn conditioned_bienayme_samplers_match_exact_law() {
    let mu = OffspringDistribution::finite(vec![0.4, 0.2, 0.4]).unwrap();
    let geo = OffspringDistribution::geometric(0.5).unwrap();
    let heavy = OffspringDistribution::power_law(0.3, 2.5).unwrap();
    for (case, (mu, n)) in [(&mu, 6usize), (&geo, 5), (&heavy, 6)].into_iter().enumerate() {
        let mut rng = RngStream::new(0x5eed_0016, case as u64).rng();
        let trees = enumerate_all_trees(n as u64, 12).unwrap();
        let exact = conditioned_law(mu, &trees);

        let counts = tree_counts(&trees, DRAWS, || sample_conditioned_bienayme(mu, n, &mut rng, 1_000_000).unwrap());
        let outcome = chi_square_gof(&counts, &exact, ALPHA);
        assert!(outcome.pass, "rejection, n = {n}: {outcome:?}");

        let sampler = ConditionedTreeSampler::from_offspring(mu, n).unwrap();
        let counts = tree_counts(&trees, DRAWS, || sampler.sample(&mut rng));
        let outcome = chi_square_gof(&counts, &exact, ALPHA);
        assert!(outcome.pass, "split sampler, n = {n}: {outcome:?}");
    }
}

#[test]
fn simply_generated_sampler_matches_exact_law() {
    let ln_fact_sq = |k: usize| 2.0 * statrs::function::factorial::ln_factorial(k as u64);
    let cases: Vec<(WeightSequence, usize)> = vec![
        (WeightSequence::from_list(vec![1.0, 0.0, 1.0]).unwrap(), 5),
        (WeightSequence::from_list(vec![1.0, 0.5, 2.0, 0.25]).unwrap(), 7),
        (WeightSequence::from_log_fn(60, ln_fact_sq).unwrap().with_rho(0.0), 5),
        (WeightSequence::from_log_fn(60, ln_fact_sq).unwrap().with_rho(0.0), 8),
        (
            WeightSequence::from_fn(100_000, |k| if k == 0 { 1.0 } else { (k as f64).powi(-3) })
                .unwrap()
                .with_rho(1.0),
            8,
        ),
    ];
    let mut rng = RngStream::new(0x5eed_0007, 0).rng();
    for (w, n) in &cases {
        let trees = enumerate_all_trees(*n as u64, 12).unwrap();
        let exact: Vec<f64> = normalized(
            &trees.iter().map(|t| t.word().iter().map(|&d| w.log_weight(d)).sum::<f64>()).map(f64::exp).collect::<Vec<_>>(),
        );
        let sampler = SimplyGeneratedSampler::new(w, *n).unwrap();
        let counts = tree_counts(&trees, DRAWS, || sampler.sample(&mut rng));
        let outcome = chi_square_gof(&counts, &exact, ALPHA);
        assert!(outcome.pass, "{w:?}, n = {n}: {outcome:?}");
    }

    let binary = WeightSequence::from_list(vec![1.0, 0.0, 1.0]).unwrap();
    let trees: Vec<PlaneTree> =
        enumerate_all_trees(5, 12).unwrap().into_iter().filter(|t| t.word().iter().all(|&d| d != 1 && d <= 2)).collect();
    assert_eq!(trees.len(), 2);
    let counts = tree_counts(&trees, DRAWS, || sample_simply_generated(&binary, 5, &mut rng).unwrap());
    assert!(within_standard_errors(counts[0], DRAWS as u64, 0.5, 3.0));

    let unique = WeightSequence::from_list(vec![2.0, 0.0, 1.0]).unwrap();
    for _ in 0..100 {
        assert_eq!(sample_simply_generated(&unique, 3, &mut rng).unwrap().word(), &[2, 0, 0]);
    }
    assert!(matches!(
        sample_simply_generated(&binary, 4, &mut rng),
        Err(arbor::Error::ZeroPartition(4))
    ));
}

/// `P(Poisson(t) > h)` by summing the masses up to `h`.
fn poisson_upper_tail(t: f64, h: u64) -> f64 {
    let mut mass = (-t).exp();
    let mut below = mass;
    for k in 1..=h {
        mass *= t / k as f64;
        below += mass;
    }
    // complement via the remaining terms to avoid cancellation
    let mut tail = 0.0;
    let mut term = mass;
    for k in h + 1..h + 200 {
        term *= t / k as f64;
        tail += term;
    }
    debug_assert!((below + tail - 1.0).abs() < 1e-12);
    tail
}

#[test]
fn poisson_tail_bound_dominates_exact_tail() {
    let exact = poisson_upper_tail(2.0, 6);
    assert!((exact - 0.004_534).abs() < 5e-7);
    assert!(exact <= poisson_tail_bound(2.0, 6.0).unwrap());
    let exact = poisson_upper_tail(1.0, 10);
    assert!((exact - 1.004_78e-8).abs() < 1e-12);
    let bound = poisson_tail_bound(1.0, 10.0).unwrap();
    assert!(exact <= bound && 1.1142e-8 <= bound);
    for t in [0.5f64, 1.0, 3.0, 7.5] {
        for h in (t.ceil() as u64)..40 {
            assert!(poisson_upper_tail(t, h) <= poisson_tail_bound(t, h as f64).unwrap() * (1.0 + 1e-12));
        }
    }
}
