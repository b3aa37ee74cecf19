//! Weighted CSR graphs with optional sparse features and partial labels.
//!
//! An [`AttributedGraph`] is immutable once built. Undirected graphs store
//! both orientations of every edge, so row `i` always lists the out-neighbors
//! of `i`.

mod edgelist;
mod karate;
pub mod pickle;
mod planetoid;
mod split;
mod synth;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edgelist::{load_edge_list, parse_edge_list, write_edge_list};
pub use karate::{karate_fixture, KARATE_EDGES, KARATE_MINORITY};
pub use planetoid::load_planetoid_format;
pub use split::{make_imbalanced_split, LabeledSplit};
pub use synth::planted_partition;

/// Row-compressed sparse feature matrix (one row per node).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFeatures {
    dim: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseFeatures {
    /// Builds from per-row `(column, value)` lists. Zero values are dropped.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if c >= dim {
                    return Err(Error::invalid(format!(
                        "feature column {c} out of range {dim} in row {r}"
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::invalid(format!("non-finite feature in row {r}")));
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Ok(Self {
            dim,
            offsets,
            indices,
            values,
        })
    }

    /// One-hot identity features, `rows` rows of dimension `rows`.
    pub fn identity(rows: usize) -> Self {
        Self {
            dim: rows,
            offsets: (0..=rows).collect(),
            indices: (0..rows).collect(),
            values: vec![1.0; rows],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }
}

#[derive(Debug, Clone)]
pub struct AttributedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    features: Option<SparseFeatures>,
    labels: Vec<Option<usize>>,
    num_classes: usize,
    directed: bool,
}

impl AttributedGraph {
    /// Builds a graph from `(src, dst, weight)` triples.
    ///
    /// Duplicate entries collapse by summing weights. For undirected graphs
    /// every triple contributes to both orientations (a self-loop once).
    pub fn from_edges<I>(n: usize, edges: I, directed: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::invalid("graph must have at least one node"));
        }
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i},{j}) out of range n={n}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!(
                    "edge ({i},{j}) has non-positive or non-finite weight {w}"
                )));
            }
            *rows[i].entry(j).or_insert(0.0) += w;
            if !directed && i != j {
                *rows[j].entry(i).or_insert(0.0) += w;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for row in rows {
            for (j, w) in row {
                targets.push(j);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(Self {
            offsets,
            targets,
            weights,
            features: None,
            labels: vec![None; n],
            num_classes: 0,
            directed,
        })
    }

    /// Attaches per-node labels. `num_classes` must exceed every present label.
    pub fn with_labels(mut self, labels: Vec<Option<usize>>, num_classes: usize) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::invalid(format!(
                "label vector length {} != n {}",
                labels.len(),
                self.n()
            )));
        }
        if let Some(bad) = labels.iter().flatten().find(|&&c| c >= num_classes) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        self.labels = labels;
        self.num_classes = num_classes;
        Ok(self)
    }

    pub fn with_features(mut self, features: SparseFeatures) -> Result<Self> {
        if features.rows() != self.n() {
            return Err(Error::invalid(format!(
                "feature rows {} != n {}",
                features.rows(),
                self.n()
            )));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Stored adjacency entries; an undirected edge counts twice.
    pub fn num_entries(&self) -> usize {
        self.targets.len()
    }

    /// Undirected edge count (self-loops once). For directed graphs, the entry count.
    pub fn num_edges(&self) -> usize {
        if self.directed {
            return self.num_entries();
        }
        let loops = (0..self.n())
            .filter(|&i| self.neighbors(i).contains(&i))
            .count();
        (self.num_entries() - loops) / 2 + loops
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn edge_weights(&self, i: usize) -> &[f64] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Iterates all stored `(src, dst, weight)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .zip(self.edge_weights(i))
                .map(move |(&j, &w)| (i, j, w))
        })
    }

    /// Each edge once: all entries when directed, `i <= j` entries otherwise.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let directed = self.directed;
        self.entries().filter(move |&(i, j, _)| directed || i <= j)
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> Option<&SparseFeatures> {
        self.features.as_ref()
    }

    /// Nodes carrying label `class`, ascending.
    pub fn class_members(&self, class: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.labels[i] == Some(class))
            .collect()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            directed: self.directed,
            edges: self.edges().collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_json(doc: &GraphJson) -> Result<Self> {
        let g = Self::from_edges(doc.n, doc.edges.iter().copied(), doc.directed)?;
        let classes = doc.labels.iter().flatten().max().map_or(0, |&c| c + 1);
        g.with_labels(doc.labels.clone(), classes)
    }
}

/// JSON export shape: `{"n", "directed", "edges": [[i, j, w], ...], "labels"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub directed: bool,
    pub edges: Vec<(usize, usize, f64)>,
    pub labels: Vec<Option<usize>>,
}

/// Row-stochastic base transition probabilities, sharing the graph's sparsity
/// pattern. Isolated nodes get a self-loop with probability 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.targets[r.clone()], &self.probs[r])
    }

    /// Entry `R[i][j]`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (t, p) = self.row(i);
        t.binary_search(&j).map_or(0.0, |k| p[k])
    }

    /// Builds directly from rows of `(target, probability)`; rows are sorted by target.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut probs = Vec::new();
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if row.is_empty() || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "row {i} is not stochastic (sum {sum})"
                )));
            }
            for (j, p) in row {
                if j >= n || !(p > 0.0) {
                    return Err(Error::invalid(format!("bad entry ({i},{j},{p})")));
                }
                targets.push(j);
                probs.push(p);
            }
            offsets.push(targets.len());
        }
        Ok(Self {
            offsets,
            targets,
            probs,
        })
    }
}

pub fn build_transition(graph: &AttributedGraph) -> TransitionMatrix {
    let n = graph.n();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(graph.num_entries());
    let mut probs = Vec::with_capacity(graph.num_entries());
    offsets.push(0);
    for i in 0..n {
        let nbrs = graph.neighbors(i);
        if nbrs.is_empty() {
            targets.push(i);
            probs.push(1.0);
        } else {
            let w = graph.edge_weights(i);
            let total: f64 = w.iter().sum();
            targets.extend_from_slice(nbrs);
            probs.extend(w.iter().map(|&x| x / total));
        }
        offsets.push(targets.len());
    }
    TransitionMatrix {
        offsets,
        targets,
        probs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_rows() {
        let g = AttributedGraph::from_edges(2, [(0, 1, 1.0)], false).unwrap();
        let r = build_transition(&g);
        assert_eq!(r.row(0), (&[1][..], &[1.0][..]));
        assert_eq!(r.row(1), (&[0][..], &[1.0][..]));
    }

    #[test]
    fn weight_normalization() {
        let g = AttributedGraph::from_edges(3, [(0, 1, 1.0), (0, 2, 3.0)], true).unwrap();
        let r = build_transition(&g);
        assert_eq!(r.row(0), (&[1, 2][..], &[0.25, 0.75][..]));
    }

    #[test]
    fn isolated_node_self_loop() {
        let g = AttributedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0)], false).unwrap();
        let r = build_transition(&g);
        assert_eq!(r.row(3), (&[3][..], &[1.0][..]));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(AttributedGraph::from_edges(2, [(0, 2, 1.0)], false).is_err());
        assert!(AttributedGraph::from_edges(2, [(0, 1, 0.0)], false).is_err());
        assert!(AttributedGraph::from_edges(2, [(0, 1, -1.0)], false).is_err());
        assert!(AttributedGraph::from_edges(0, [], false).is_err());
    }

    #[test]
    fn undirected_symmetry_and_counts() {
        let g =
            AttributedGraph::from_edges(3, [(0, 1, 2.0), (1, 2, 1.0), (2, 2, 1.0)], false).unwrap();
        for (i, j, w) in g.entries() {
            let k = g.neighbors(j).binary_search(&i).unwrap();
            assert_eq!(g.edge_weights(j)[k], w);
        }
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.num_entries(), 5);
    }

    #[test]
    fn label_range_checked() {
        let g = AttributedGraph::from_edges(2, [(0, 1, 1.0)], false).unwrap();
        assert!(g.clone().with_labels(vec![Some(0), Some(2)], 2).is_err());
        assert!(g.with_labels(vec![Some(0), None], 2).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let g = AttributedGraph::from_edges(3, [(0, 1, 0.5), (1, 2, 2.0)], false)
            .unwrap()
            .with_labels(vec![Some(1), None, Some(0)], 2)
            .unwrap();
        let doc = g.to_json();
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.starts_with("{\"n\":3,\"directed\":false,\"edges\":[[0,1,0.5]"));
        let back = AttributedGraph::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.to_json(), doc);
    }

    #[test]
    fn identity_features() {
        let f = SparseFeatures::identity(3);
        assert_eq!(f.row(2).collect::<Vec<_>>(), vec![(2, 1.0)]);
        assert_eq!(f.dim(), 3);
    }
}
