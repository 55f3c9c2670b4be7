use arbor::bounds::{
    bound_height_tail, bound_height_tail_no_ones, bound_sigma_tail_no_ones, bound_tau, g_error_band, g_eval,
    g_log, g_log_series, g_upper, BoundInput,
};
use arbor::oracle::{count_forests, count_spine_class, count_spine_class_enumerated, mark_depth_law};
use arbor::samplers::{sample_mark_height, sample_sigma, sample_sigma_poissonized, sample_size_biasing, RngStream};
use arbor::simply_generated::{hat_count_ratio_check, hat_transform, partition_zn_enumerated, partition_zn_exact};
use arbor::{DegreeStatistics, MarkedTree, PlaneTree};
use num_rational::BigRational;
use proptest::prelude::*;

/// Turns arbitrary small integers into a valid Łukasiewicz word.
fn close_word(raw: &[usize]) -> Vec<usize> {
    let mut word = Vec::new();
    let mut open = 1i64;
    for &d in raw {
        if open == 0 {
            break;
        }
        word.push(d);
        open += d as i64 - 1;
    }
    while open > 0 {
        word.push(0);
        open -= 1;
    }
    word
}

fn tree_strategy(max_len: usize, max_degree: usize) -> impl Strategy<Value = PlaneTree> {
    prop::collection::vec(0..=max_degree, 1..max_len).prop_map(|raw| PlaneTree::from_word(close_word(&raw)).unwrap())
}

fn small_tree_strategy() -> impl Strategy<Value = PlaneTree> {
    tree_strategy(9, 3).prop_filter("at most 10 nodes", |t| t.len() <= 10)
}

fn stats_strategy(max_len: usize, max_degree: usize) -> impl Strategy<Value = DegreeStatistics> {
    tree_strategy(max_len, max_degree).prop_map(|t| t.degree_statistics())
}

/// Prefix-sum check for a word encoding a forest of `a` trees.
fn is_forest_word(word: &[usize], a: i64) -> bool {
    let mut s = 0i64;
    for (i, &d) in word.iter().enumerate() {
        s += d as i64 - 1;
        if i + 1 < word.len() && s <= -a {
            return false;
        }
    }
    s == -a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn word_round_trip(t in tree_strategy(60, 4)) {
        let again = PlaneTree::from_word(t.word().to_vec()).unwrap();
        prop_assert_eq!(&again, &t);
        prop_assert_eq!(t.to_string().parse::<PlaneTree>().unwrap(), t.clone());
        prop_assert_eq!(t.len(), 1 + t.word().iter().sum::<usize>());
    }

    #[test]
    fn shape_invariants(t in tree_strategy(60, 4)) {
        let profile = t.width_profile();
        prop_assert_eq!(profile.iter().sum::<usize>(), t.len());
        prop_assert_eq!(profile.len(), t.height() + 1);
        prop_assert!(profile.iter().all(|&w| w >= 1));
        prop_assert_eq!(t.width(), *profile.iter().max().unwrap());
        let stats = t.degree_statistics();
        prop_assert_eq!(stats.node_count() as usize, t.len());
        prop_assert_eq!(stats.edge_count() as usize + 1, t.len());
        let children = t.children();
        for (v, c) in children.iter().enumerate() {
            prop_assert_eq!(c.len(), t.degree(v));
        }
    }

    #[test]
    fn statistics_json_round_trip(s in stats_strategy(60, 5)) {
        prop_assert_eq!(DegreeStatistics::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn norms_invariants(s in stats_strategy(60, 5)) {
        let norms = s.norms();
        prop_assert!(norms.p2sq >= norms.n1);
        prop_assert_eq!(norms.p2sq == norms.n1, s.max_degree() <= 1);
        prop_assert_eq!(norms.p1 + 1, s.node_count());
    }

    #[test]
    fn cycle_lemma_counts_valid_rotations(trees in prop::collection::vec(tree_strategy(12, 3), 1..4)) {
        let word: Vec<usize> = trees.iter().flat_map(|t| t.word().to_vec()).collect();
        let a = trees.len() as i64;
        let valid = (0..word.len())
            .filter(|&r| {
                let mut w = word.clone();
                w.rotate_left(r);
                is_forest_word(&w, a)
            })
            .count();
        prop_assert_eq!(valid as i64, a);
    }

    #[test]
    fn marked_tree_spine(t in tree_strategy(40, 3), pick in any::<prop::sample::Index>()) {
        let mark = pick.index(t.len());
        let m = MarkedTree::new(t.clone(), mark).unwrap();
        let depth = m.mark_depth();
        prop_assert_eq!(m.ancestry().len(), depth + 1);
        prop_assert_eq!(m.ancestry()[0], 0);
        let d = m.spinal_degrees(depth).unwrap();
        prop_assert!(d.iter().all(|&x| x >= 1));
        prop_assert!(m.spinal_degrees(depth + 1).is_err());
    }

    #[test]
    fn size_biasing_is_a_permutation(s in stats_strategy(50, 5), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0).rng();
        let mut d = sample_size_biasing(&s, &mut rng).unwrap();
        d.sort_unstable();
        prop_assert_eq!(d, s.degrees());
    }

    #[test]
    fn stopping_times_in_range(s in stats_strategy(50, 5), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 1).rng();
        let n = s.node_count();
        prop_assert!(sample_mark_height(&s, &mut rng).unwrap() < n);
        let sigma = sample_sigma(&s, &mut rng).unwrap();
        prop_assert!((1..=n).contains(&sigma));
        if n >= 2 {
            let run = sample_sigma_poissonized(&s, &mut rng).unwrap();
            if let Some(tau) = run.tau {
                prop_assert!(run.records_before_tau < tau);
            }
            prop_assert!(run.sigma <= n);
        }
    }

    #[test]
    fn mark_depth_law_sums_to_one(s in stats_strategy(30, 4)) {
        let law = mark_depth_law(&s).unwrap();
        let total: BigRational = law.masses().iter().cloned().sum();
        prop_assert_eq!(total, BigRational::from_integer(1.into()));
        prop_assert!(law.support().iter().all(|&k| k < s.node_count()));
    }

    #[test]
    fn forest_count_matches_enumeration(t in small_tree_strategy()) {
        let s = t.degree_statistics();
        let enumerated = arbor::oracle::enumerate_trees(&s, 12).unwrap().count();
        prop_assert_eq!(count_forests(&s), num_bigint::BigUint::from(enumerated));
    }

    #[test]
    fn spine_count_matches_enumeration(t in small_tree_strategy(), pick in any::<prop::sample::Index>()) {
        let mark = pick.index(t.len());
        let m = MarkedTree::new(t.clone(), mark).unwrap();
        let k = m.mark_depth().min(3);
        let d = m.spinal_degrees(k).unwrap();
        let s = t.degree_statistics();
        prop_assert_eq!(count_spine_class(&s, &d).unwrap(), count_spine_class_enumerated(&s, &d, 12).unwrap());
    }

    #[test]
    fn bounds_are_monotone(s in stats_strategy(80, 5), b1 in 1.0f64..1e4, b2 in 1.0f64..1e4, l1 in 0u64..200, l2 in 0u64..200) {
        let inp = BoundInput::from_stats(&s);
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let (llo, lhi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        if inp.p2sq > inp.n1 {
            prop_assert!(bound_height_tail(&inp, hi).unwrap() <= bound_height_tail(&inp, lo).unwrap());
        }
        prop_assert!(bound_tau(&inp, hi) <= bound_tau(&inp, lo));
        for b in [bound_tau(&inp, lo), bound_tau(&inp, hi)] {
            prop_assert!((0.0..=1.0).contains(&b));
        }
        if inp.n1 == 0 {
            prop_assert!(bound_height_tail_no_ones(&inp, lhi).unwrap() <= bound_height_tail_no_ones(&inp, llo).unwrap());
            prop_assert!(bound_sigma_tail_no_ones(&inp, lhi).unwrap() <= bound_sigma_tail_no_ones(&inp, llo).unwrap());
        }
    }

    #[test]
    fn g_inequalities(s in stats_strategy(200, 8), frac in 0.0f64..=1.0) {
        let degrees = s.degrees();
        let m = (s.node_count() - 1) as f64;
        let dmax = s.max_degree().max(1) as f64;
        let t = frac * m / dmax;
        if s.node_count() >= 2 {
            prop_assert!(g_eval(t, &degrees).unwrap() <= g_upper(t, &degrees).unwrap() * (1.0 + 1e-12));
            prop_assert!(g_error_band(t, &degrees).unwrap().holds());
            let series = g_log_series(t, &degrees, 60).unwrap();
            prop_assert!((g_log(t, &degrees).unwrap() - series).abs() < 1e-10);
        }
    }

    #[test]
    fn hat_transform_preserves_sizes(s in stats_strategy(200, 3), l in 3usize..5, extra in 1usize..4) {
        let m = 2 * l + extra;
        let hat = hat_transform(&s, l, m).unwrap();
        prop_assert_eq!(hat.node_count(), s.node_count());
        prop_assert_eq!(hat.edge_count(), s.edge_count());
        for c in 1..=l {
            prop_assert!(hat.count(c) < m as u64);
        }
        prop_assert!(hat_count_ratio_check(&s, l, m).unwrap());
    }

    #[test]
    fn lagrange_matches_enumeration(raw in prop::collection::vec(0i64..4, 1..7), n in 1usize..8) {
        let mut weights: Vec<BigRational> = raw.iter().map(|&x| BigRational::new(x.into(), 3.into())).collect();
        weights[0] = BigRational::from_integer(1.into());
        prop_assert_eq!(partition_zn_exact(&weights, n), partition_zn_enumerated(&weights, n, 12).unwrap());
    }
}
