mod common;

use std::path::Path;

use linkbench::autodiff::Tensor;
use linkbench::data::synthetic::{stochastic_block_model, SbmConfig};
use linkbench::data::{
    load_planetoid, normalize_adjacency, sample_negative_edges, split_edges, write_planetoid, DataError,
    DatasetName, Edge, EdgeSplit, GraphDataset, RngState, TEST_FRACTION, VAL_FRACTION,
};
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Expected {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
    num_classes: usize,
}

fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/planetoid"))
}

#[test]
fn planetoid_fixture_matches_python_reordering() {
    let expected: Expected =
        serde_json::from_str(&std::fs::read_to_string(fixture_dir().join("expected.json")).unwrap()).unwrap();
    let ds = load_planetoid(DatasetName::CiteSeer, fixture_dir()).unwrap();
    assert_eq!(ds.num_nodes, expected.features.len());
    assert_eq!(ds.features, Tensor::from_rows(&expected.features));
    assert_eq!(ds.labels, expected.labels);
    assert_eq!(ds.edges, expected.edges);
    assert_eq!(ds.num_classes, expected.num_classes);
}

#[test]
fn planetoid_loading_is_pure() {
    let a = load_planetoid(DatasetName::CiteSeer, fixture_dir()).unwrap();
    let b = load_planetoid(DatasetName::CiteSeer, fixture_dir()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn planetoid_writer_round_trips_citation_sized_graph() {
    let ds = stochastic_block_model(&SbmConfig::citation_like(400), 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_planetoid(&ds, dir.path(), "pubmed").unwrap();
    let back = load_planetoid(DatasetName::PubMed, dir.path()).unwrap();
    assert_eq!(back.features, ds.features);
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.edges, ds.edges);
}

fn path_graph(n: usize) -> GraphDataset {
    GraphDataset::new("path", Tensor::zeros(&[n, 1]), vec![0; n], (1..n).map(|i| (i - 1, i)), 1).unwrap()
}

#[test]
fn path_negatives_absent_by_brute_force() {
    let g = path_graph(5);
    let exclude = g.edge_set();
    for seed in 0..20 {
        let mut rng = RngState::new(seed);
        let neg = sample_negative_edges(5, 3, &exclude, &mut rng).unwrap();
        assert_eq!(neg.len(), 3);
        for &(u, v) in &neg {
            assert_ne!(u, v);
            assert!(!g.edges.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)));
        }
        let mut dedup = neg.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), neg.len());
    }
}

#[test]
fn split_same_seed_same_split() {
    let ds = stochastic_block_model(&SbmConfig::citation_like(300), 2).unwrap();
    let a = split_edges(&ds, VAL_FRACTION, TEST_FRACTION, 17).unwrap();
    let b = split_edges(&ds, VAL_FRACTION, TEST_FRACTION, 17).unwrap();
    assert_eq!(a, b);
    let c = split_edges(&ds, VAL_FRACTION, TEST_FRACTION, 18).unwrap();
    assert_ne!(a.test_pos, c.test_pos);
}

#[test]
fn split_sizes_use_floor() {
    let ds = stochastic_block_model(&SbmConfig::citation_like(500), 4).unwrap();
    let e = ds.num_edges();
    let s = split_edges(&ds, VAL_FRACTION, TEST_FRACTION, 0).unwrap();
    assert_eq!(s.test_pos.len(), e / 10);
    assert_eq!(s.val_pos.len(), e / 20);
    assert_eq!(s.train_pos.len(), e - e / 10 - e / 20);
}

#[test]
fn split_file_round_trip() {
    let ds = stochastic_block_model(&SbmConfig::small(), 8).unwrap();
    let s = split_edges(&ds, VAL_FRACTION, TEST_FRACTION, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("split.txt");
    s.write_to(&path).unwrap();
    assert_eq!(EdgeSplit::read_from(&path).unwrap(), s);
    std::fs::write(&path, "garbage").unwrap();
    assert!(matches!(EdgeSplit::read_from(&path), Err(DataError::Corrupt { .. })));
}

/// D̃^{-1/2}(A+I)D̃^{-1/2} computed densely.
fn dense_normalized(edges: &[Edge], n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for &(u, v) in edges {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    let d_inv_sqrt: Vec<f64> = a.iter().map(|r| 1.0 / r.iter().sum::<f64>().sqrt()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| d_inv_sqrt[i] * a[i][j] * d_inv_sqrt[j]).collect())
        .collect()
}

fn random_graph() -> impl Strategy<Value = (usize, Vec<Edge>)> {
    (1usize..=8).prop_flat_map(|n| {
        let pairs: Vec<Edge> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = pairs.len();
        (Just(n), proptest::collection::vec(any::<bool>(), m)).prop_map(move |(n, keep)| {
            let edges = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| *e).collect();
            (n, edges)
        })
    })
}

proptest! {
    #[test]
    fn normalized_adjacency_matches_dense_oracle((n, edges) in random_graph()) {
        let adj = normalize_adjacency(&edges, n);
        let dense = adj.matrix.to_dense();
        let oracle = dense_normalized(&edges, n);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(dense.get(i, j), oracle[i][j]);
                prop_assert_eq!(dense.get(i, j), dense.get(j, i));
            }
            prop_assert!(dense.get(i, i) > 0.0);
        }
        prop_assert!(adj.matrix.values().iter().all(|&v| v > 0.0 && v <= 1.0));
        let ones = Tensor::ones(&[n, 1]);
        let row_sums = adj.matrix.matmul_dense(&ones).unwrap();
        for i in 0..n {
            let s: f64 = oracle[i].iter().sum();
            prop_assert_eq!(row_sums.get(i, 0), s);
        }
    }

    #[test]
    fn split_partitions_and_negatives_are_clean(seed in 0u64..1000, graph_seed in 0u64..50) {
        let ds = stochastic_block_model(&SbmConfig::small(), graph_seed).unwrap();
        prop_assume!(ds.num_edges() >= 20);
        let s = split_edges(&ds, VAL_FRACTION, TEST_FRACTION, seed).unwrap();
        prop_assert!(s.validate(&ds).is_ok());
        let mut all: Vec<Edge> = s.all_positive().collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), total);
    }
}
