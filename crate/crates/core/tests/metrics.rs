mod common;

use common::rng;
use linkbench::autodiff::Tensor;
use linkbench::metrics::{average_precision, bootstrap_ci, evaluate_split, roc_auc, MetricError, RunReport};
use linkbench::data::{Edge, RngState};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Pairwise count over all positive x negative pairs, ties worth one half.
fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Precision at every distinct threshold, weighted by the recall gained.
fn curve_ap(scores: &[f64], labels: &[bool]) -> f64 {
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let positives = labels.iter().filter(|&&l| l).count() as f64;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in thresholds {
        let selected: Vec<bool> = scores.iter().zip(labels).filter(|(s, _)| **s >= t).map(|(_, l)| *l).collect();
        let tp = selected.iter().filter(|&&l| l).count() as f64;
        let precision = tp / selected.len() as f64;
        let recall = tp / positives;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ap
}

fn random_scores(r: &mut impl Rng, n: usize, levels: Option<u32>) -> (Vec<f64>, Vec<bool>) {
    loop {
        let scores: Vec<f64> = (0..n)
            .map(|_| match levels {
                Some(k) => r.random_range(0..k) as f64 / k as f64,
                None => r.random::<f64>(),
            })
            .collect();
        let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
        if labels.iter().any(|&l| l) && labels.iter().any(|&l| !l) {
            return (scores, labels);
        }
    }
}

#[test]
fn auc_examples() {
    let labels = [true, true, false, false];
    assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 1.0);
    assert_eq!(roc_auc(&[0.5; 4], &labels).unwrap(), 0.5);
    assert!(matches!(roc_auc(&[0.1, 0.2], &[true, true]), Err(MetricError::Undefined(_))));
    assert!(roc_auc(&[0.1], &[true, false]).is_err());
}

#[test]
fn ap_examples() {
    assert_eq!(average_precision(&[0.9, 0.8, 0.2], &[true, true, false]).unwrap(), 1.0);
    assert_eq!(average_precision(&[0.7, 0.3], &[true, false]).unwrap(), 1.0);
    assert_eq!(average_precision(&[0.3, 0.7], &[true, false]).unwrap(), 0.5);
    assert!(average_precision(&[0.1, 0.2], &[false, false]).is_err());
}

#[test]
fn auc_equals_pairwise_count_on_200_scores() {
    let mut r = rng(1);
    for levels in [None, Some(10)] {
        for _ in 0..20 {
            let (s, l) = random_scores(&mut r, 200, levels);
            assert_eq!(roc_auc(&s, &l).unwrap(), pairwise_auc(&s, &l));
        }
    }
}

#[test]
fn ap_matches_curve_oracle_on_200_scores() {
    let mut r = rng(2);
    for levels in [None, Some(10)] {
        for _ in 0..20 {
            let (s, l) = random_scores(&mut r, 200, levels);
            let got = average_precision(&s, &l).unwrap();
            assert!((got - curve_ap(&s, &l)).abs() < 1e-12);
        }
    }
}

#[test]
fn bootstrap_degenerate_cases() {
    let mut r = RngState::new(0);
    assert_eq!(bootstrap_ci(&[0.75; 20], 0.95, 1000, &mut r), (0.75, 0.75));
    assert_eq!(bootstrap_ci(&[0.6], 0.95, 1000, &mut r), (0.6, 0.6));
}

#[test]
fn bootstrap_width_for_tight_normal_runs() {
    let dist = Normal::new(0.9, 0.005).unwrap();
    for seed in 0..20 {
        let mut r = RngState::new(seed);
        let values: Vec<f64> = (0..50).map(|_| dist.sample(&mut r)).collect();
        let (lo, hi) = bootstrap_ci(&values, 0.95, 1000, &mut r);
        let mean = values.iter().sum::<f64>() / 50.0;
        assert!(lo <= mean && mean <= hi);
        let width = hi - lo;
        assert!((0.001..=0.006).contains(&width), "seed {seed}: width {width}");
    }
}

#[test]
fn run_report_means_are_exact() {
    let auc = vec![0.91, 0.93, 0.92, 0.95];
    let ap = vec![0.90, 0.94, 0.93, 0.92];
    let report = RunReport::from_runs("cora", "gcn", 7, auc.clone(), ap.clone(), 1000, &mut RngState::new(1));
    assert_eq!(report.mean_auc, auc.iter().sum::<f64>() / 4.0);
    assert_eq!(report.mean_ap, ap.iter().sum::<f64>() / 4.0);
    assert!(report.ci95_auc.0 <= report.mean_auc && report.mean_auc <= report.ci95_auc.1);
    assert!((report.auc_ci_halfwidth - (report.ci95_auc.1 - report.ci95_auc.0) / 2.0).abs() < 1e-15);
    assert_eq!(report.runs, 4);
}

#[test]
fn evaluate_split_on_constructed_separation() {
    // nodes 0..3 share one vector of norm 10; 4, 5 are orthogonal to it and each other
    let mut rows = vec![vec![6.0, 8.0, 0.0, 0.0]; 4];
    rows.push(vec![0.0, 0.0, 1.0, 0.0]);
    rows.push(vec![0.0, 0.0, 0.0, 1.0]);
    let z = Tensor::from_rows(&rows);
    let pos: Vec<Edge> = vec![(0, 1), (2, 3), (1, 2)];
    let neg: Vec<Edge> = vec![(0, 4), (3, 5), (4, 5)];
    assert_eq!(evaluate_split(&z, &pos, &neg).unwrap(), (1.0, 1.0));
}

#[test]
fn evaluate_split_matches_composed_oracles() {
    let mut r = rng(3);
    let n = 30;
    let z = common::random_tensor(&mut r, &[n, 4]);
    let pairs = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<Edge> {
        (0..25).map(|_| (r.random_range(0..n), r.random_range(0..n))).collect()
    };
    let (pos, neg) = (pairs(&mut r), pairs(&mut r));
    let score = |&(u, v): &Edge| {
        let dot: f64 = z.row(u).iter().zip(z.row(v)).map(|(a, b)| a * b).sum();
        1.0 / (1.0 + (-dot).exp())
    };
    let scores: Vec<f64> = pos.iter().chain(&neg).map(score).collect();
    let labels: Vec<bool> = (0..50).map(|i| i < 25).collect();
    let (auc, ap) = evaluate_split(&z, &pos, &neg).unwrap();
    assert_eq!(auc, pairwise_auc(&scores, &labels));
    assert!((ap - curve_ap(&scores, &labels)).abs() < 1e-12);
}

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..=300)
        .prop_flat_map(|n| (proptest::collection::vec(0u32..50, n), proptest::collection::vec(any::<bool>(), n)))
        .prop_filter("both classes", |(_, l)| l.iter().any(|&x| x) && l.iter().any(|&x| !x))
        .prop_map(|(s, l)| (s.into_iter().map(|v| v as f64 / 7.0).collect(), l))
}

proptest! {
    #[test]
    fn metrics_equal_definitional_oracles((s, l) in scored()) {
        prop_assert_eq!(roc_auc(&s, &l).unwrap(), pairwise_auc(&s, &l));
        prop_assert!((average_precision(&s, &l).unwrap() - curve_ap(&s, &l)).abs() < 1e-12);
    }

    #[test]
    fn metrics_invariant_under_monotone_maps((s, l) in scored()) {
        let mapped: Vec<f64> = s.iter().map(|&x| (3.0 * x).exp() - 2.0).collect();
        prop_assert_eq!(roc_auc(&s, &l).unwrap(), roc_auc(&mapped, &l).unwrap());
        prop_assert_eq!(average_precision(&s, &l).unwrap(), average_precision(&mapped, &l).unwrap());
    }

    #[test]
    fn auc_of_negated_scores_is_complement(seed in any::<u64>(), n in 2usize..=300) {
        let mut r = rng(seed);
        let labels: Vec<bool> = (0..n).map(|i| i == 0 || (i > 1 && r.random_bool(0.5))).collect();
        let scores: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let total = roc_auc(&scores, &labels).unwrap() + roc_auc(&neg, &labels).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
