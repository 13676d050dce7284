use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DataError, Edge, EdgeSet, GraphDataset, RngState};

pub const VAL_FRACTION: f64 = 0.05;
pub const TEST_FRACTION: f64 = 0.10;

/// Held-out positives and frozen evaluation negatives for one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSplit {
    pub dataset: String,
    pub num_nodes: usize,
    pub seed: u64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub train_pos: Vec<Edge>,
    pub val_pos: Vec<Edge>,
    pub test_pos: Vec<Edge>,
    pub val_neg: Vec<Edge>,
    pub test_neg: Vec<Edge>,
}

/// Sizes of the validation and test blocks for `num_edges` edges.
pub fn split_sizes(num_edges: usize, val_frac: f64, test_frac: f64) -> (usize, usize) {
    // the epsilon keeps exact products like 0.1 * 50 from flooring to 4
    let count = |frac: f64| (frac * num_edges as f64 + 1e-9).floor() as usize;
    (count(val_frac), count(test_frac))
}

/// Randomly partitions the edges of `g` and samples one negative per
/// held-out positive. Deterministic in `seed`.
pub fn split_edges(g: &GraphDataset, val_frac: f64, test_frac: f64, seed: u64) -> Result<EdgeSplit, DataError> {
    if !(val_frac > 0.0 && test_frac > 0.0 && val_frac + test_frac < 1.0) {
        return Err(DataError::Split(format!(
            "fractions val={val_frac} test={test_frac} must be positive with sum below 1"
        )));
    }
    let (n_val, n_test) = split_sizes(g.num_edges(), val_frac, test_frac);
    if n_val == 0 || n_test == 0 {
        return Err(DataError::Split(format!(
            "{} has {} edges, too few for a {val_frac}/{test_frac} validation/test split",
            g.name,
            g.num_edges()
        )));
    }
    let mut rng = RngState::derive(seed, 0);
    let mut edges = g.edges.clone();
    edges.shuffle(&mut rng);
    let mut test_pos = edges[..n_test].to_vec();
    let mut val_pos = edges[n_test..n_test + n_val].to_vec();
    let mut train_pos = edges[n_test + n_val..].to_vec();
    test_pos.sort_unstable();
    val_pos.sort_unstable();
    train_pos.sort_unstable();

    let mut negatives = sample_negative_edges(g.num_nodes, n_val + n_test, &g.edge_set(), &mut rng)?;
    let test_neg = negatives.split_off(n_val);
    Ok(EdgeSplit {
        dataset: g.name.clone(),
        num_nodes: g.num_nodes,
        seed,
        val_frac,
        test_frac,
        train_pos,
        val_pos,
        test_pos,
        val_neg: negatives,
        test_neg,
    })
}

/// Draws `count` distinct node pairs, none a self-loop or in `exclude`.
///
/// Uses rejection sampling while non-edges are plentiful and falls back to
/// enumerating the complement when more than half of it is requested.
pub fn sample_negative_edges<R: Rng + ?Sized>(
    num_nodes: usize,
    count: usize,
    exclude: &EdgeSet,
    rng: &mut R,
) -> Result<Vec<Edge>, DataError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let total = num_nodes * num_nodes.saturating_sub(1) / 2;
    let available = total.saturating_sub(exclude.len());
    if count > available {
        return Err(DataError::Sampling(format!(
            "requested {count} non-edges but only {available} exist among {num_nodes} nodes"
        )));
    }
    if 2 * count > available {
        let mut pool: Vec<Edge> = (0..num_nodes)
            .flat_map(|u| (u + 1..num_nodes).map(move |v| (u, v)))
            .filter(|&(u, v)| !exclude.contains(u, v))
            .collect();
        let (chosen, _) = pool.partial_shuffle(rng, count);
        return Ok(chosen.to_vec());
    }
    let mut seen = EdgeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..num_nodes);
        let v = rng.random_range(0..num_nodes);
        if u == v || exclude.contains(u, v) || !seen.insert(u, v) {
            continue;
        }
        out.push(if u < v { (u, v) } else { (v, u) });
    }
    Ok(out)
}

const SECTIONS: [&str; 5] = ["train_pos", "val_pos", "test_pos", "val_neg", "test_neg"];

impl EdgeSplit {
    fn section(&self, name: &str) -> &[Edge] {
        match name {
            "train_pos" => &self.train_pos,
            "val_pos" => &self.val_pos,
            "test_pos" => &self.test_pos,
            "val_neg" => &self.val_neg,
            _ => &self.test_neg,
        }
    }

    fn section_mut(&mut self, name: &str) -> Option<&mut Vec<Edge>> {
        match name {
            "train_pos" => Some(&mut self.train_pos),
            "val_pos" => Some(&mut self.val_pos),
            "test_pos" => Some(&mut self.test_pos),
            "val_neg" => Some(&mut self.val_neg),
            "test_neg" => Some(&mut self.test_neg),
            _ => None,
        }
    }

    /// Every positive edge of the split.
    pub fn all_positive(&self) -> impl Iterator<Item = Edge> + '_ {
        self.train_pos.iter().chain(&self.val_pos).chain(&self.test_pos).copied()
    }

    /// Checks the partition and negative-sampling invariants against `g`.
    pub fn validate(&self, g: &GraphDataset) -> Result<(), DataError> {
        let fail = |m: String| Err(DataError::Split(m));
        let mut positives: Vec<Edge> = self.all_positive().collect();
        positives.sort_unstable();
        if positives != g.edges {
            return fail("positive sections do not partition the edge set".into());
        }
        if self.val_neg.len() != self.val_pos.len() || self.test_neg.len() != self.test_pos.len() {
            return fail("negative counts differ from positive counts".into());
        }
        let edges = g.edge_set();
        let mut seen = EdgeSet::new();
        for &(u, v) in self.val_neg.iter().chain(&self.test_neg) {
            if u >= v || v >= g.num_nodes {
                return fail(format!("negative ({u}, {v}) is not a canonical pair"));
            }
            if edges.contains(u, v) {
                return fail(format!("negative ({u}, {v}) is an edge"));
            }
            if !seen.insert(u, v) {
                return fail(format!("negative ({u}, {v}) repeated"));
            }
        }
        Ok(())
    }

    /// Text form: a `#` header line, then `[section] count` followed by one
    /// `u v` line per pair.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# dataset={} seed={} val_frac={} test_frac={} num_nodes={}\n",
            self.dataset, self.seed, self.val_frac, self.test_frac, self.num_nodes
        );
        for name in SECTIONS {
            let edges = self.section(name);
            writeln!(s, "[{name}] {}", edges.len()).expect("string write");
            for (u, v) in edges {
                writeln!(s, "{u} {v}").expect("string write");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or("empty split file")?;
        let header = header.strip_prefix('#').ok_or("line 1: missing '#' header")?;
        let mut split = EdgeSplit {
            dataset: String::new(),
            num_nodes: 0,
            seed: 0,
            val_frac: VAL_FRACTION,
            test_frac: TEST_FRACTION,
            train_pos: Vec::new(),
            val_pos: Vec::new(),
            test_pos: Vec::new(),
            val_neg: Vec::new(),
            test_neg: Vec::new(),
        };
        let mut have_nodes = false;
        for field in header.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or(format!("line 1: bad header field '{field}'"))?;
            let bad = |_| format!("line 1: bad value for {k}: '{v}'");
            match k {
                "dataset" => split.dataset = v.to_string(),
                "seed" => split.seed = v.parse().map_err(bad)?,
                "val_frac" => split.val_frac = v.parse().map_err(|_| format!("line 1: bad val_frac '{v}'"))?,
                "test_frac" => split.test_frac = v.parse().map_err(|_| format!("line 1: bad test_frac '{v}'"))?,
                "num_nodes" => {
                    split.num_nodes = v.parse().map_err(|_| format!("line 1: bad num_nodes '{v}'"))?;
                    have_nodes = true;
                }
                _ => return Err(format!("line 1: unknown header field '{k}'")),
            }
        }
        if !have_nodes {
            return Err("line 1: header lacks num_nodes".into());
        }

        let mut current: Option<(String, usize)> = None;
        let mut found = Vec::new();
        let close = |current: &Option<(String, usize)>, split: &EdgeSplit| -> Result<(), String> {
            if let Some((name, expected)) = current {
                let got = split.section(name).len();
                if got != *expected {
                    return Err(format!("[{name}] declares {expected} pairs but lists {got}"));
                }
            }
            Ok(())
        };
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                close(&current, &split)?;
                let (name, count) = rest.split_once(']').ok_or(format!("line {}: bad section header", i + 1))?;
                let count: usize = count.trim().parse().map_err(|_| format!("line {}: bad section count", i + 1))?;
                if split.section_mut(name).is_none() {
                    return Err(format!("line {}: unknown section '{name}'", i + 1));
                }
                if found.contains(&name.to_string()) {
                    return Err(format!("line {}: section '{name}' repeated", i + 1));
                }
                found.push(name.to_string());
                current = Some((name.to_string(), count));
                continue;
            }
            let Some((name, _)) = &current else {
                return Err(format!("line {}: pair outside any section", i + 1));
            };
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            let (Some(Ok(u)), Some(Ok(v)), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(format!("line {}: expected 'u v', got '{line}'", i + 1));
            };
            if u >= split.num_nodes || v >= split.num_nodes {
                return Err(format!("line {}: node outside 0..{}", i + 1, split.num_nodes));
            }
            let name = name.clone();
            split.section_mut(&name).expect("checked").push((u, v));
        }
        close(&current, &split)?;
        if found.len() != SECTIONS.len() {
            return Err(format!("expected sections {SECTIONS:?}, found {found:?}"));
        }
        Ok(split)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| DataError::io(path, e))
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
        Self::from_text(&text).map_err(|m| DataError::corrupt(path, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;

    fn graph(n: usize, edges: &[Edge]) -> GraphDataset {
        GraphDataset::new("g", Tensor::zeros(&[n, 1]), vec![0; n], edges.iter().copied(), 1).unwrap()
    }

    #[test]
    fn cora_sized_split_counts() {
        assert_eq!(split_sizes(5278, VAL_FRACTION, TEST_FRACTION), (263, 527));
        assert_eq!(split_sizes(100, VAL_FRACTION, TEST_FRACTION), (5, 10));
    }

    #[test]
    fn too_few_edges_is_a_split_error() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert!(matches!(split_edges(&g, 0.05, 0.1, 0), Err(DataError::Split(_))));
    }

    #[test]
    fn triangle_has_no_negatives() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let mut rng = RngState::new(0);
        let err = sample_negative_edges(3, 1, &g.edge_set(), &mut rng);
        assert!(matches!(err, Err(DataError::Sampling(_))));
        assert!(sample_negative_edges(3, 0, &g.edge_set(), &mut rng).unwrap().is_empty());
    }

    #[test]
    fn dense_request_enumerates_complement() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let mut rng = RngState::new(1);
        let mut all = sample_negative_edges(5, 6, &g.edge_set(), &mut rng).unwrap();
        all.sort_unstable();
        assert_eq!(all, vec![(0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 4)]);
    }

    #[test]
    fn text_round_trip() {
        let edges: Vec<Edge> = (0..30).map(|i| (i, i + 1)).chain((0..20).map(|i| (i, i + 5))).collect();
        let g = graph(31, &edges);
        let split = split_edges(&g, 0.05, 0.1, 9).unwrap();
        split.validate(&g).unwrap();
        let back = EdgeSplit::from_text(&split.to_text()).unwrap();
        assert_eq!(back, split);
    }

    #[test]
    fn text_rejects_count_mismatch() {
        let text = "# dataset=g seed=0 val_frac=0.05 test_frac=0.1 num_nodes=3\n[train_pos] 2\n0 1\n[val_pos] 0\n[test_pos] 0\n[val_neg] 0\n[test_neg] 0\n";
        let err = EdgeSplit::from_text(text).unwrap_err();
        assert!(err.contains("declares 2"), "{err}");
    }
}
