//! Loader for the pickled citation datasets (`ind.<name>.{x,y,tx,ty,allx,ally,graph}`
//! plus `ind.<name>.test.index`).
//!
//! Node ids follow the usual convention: rows of `allx`/`ally` are nodes
//! `0..allx.rows`, row `k` of `tx`/`ty` is node `test.index[k]`. Nodes that
//! appear in neither (Citeseer has a few) get empty features and no label.

use std::collections::BTreeSet;
use std::path::Path;

use super::pickle::{self, CsrMatrix};
use super::{AttributedGraph, LabeledSplit, SparseFeatures};
use crate::error::{Error, Result};

fn read(dir: &Path, file: &str) -> Result<Vec<u8>> {
    let path = dir.join(file);
    std::fs::read(&path).map_err(|source| Error::Missing { path, source })
}

fn load_matrix(dir: &Path, name: &str, part: &str) -> Result<CsrMatrix> {
    let bytes = read(dir, &format!("ind.{name}.{part}"))?;
    CsrMatrix::from_value(&pickle::parse(&bytes)?)
        .map_err(|e| Error::invalid(format!("ind.{name}.{part}: {e}")))
}

fn one_hot_label(m: &CsrMatrix, row: usize) -> Option<usize> {
    m.row(row)
        .into_iter()
        .filter(|&(_, v)| v > 0.0)
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
}

pub fn load_planetoid_format(dir: &Path, name: &str) -> Result<(AttributedGraph, LabeledSplit)> {
    let y = load_matrix(dir, name, "y")?;
    let tx = load_matrix(dir, name, "tx")?;
    let ty = load_matrix(dir, name, "ty")?;
    let allx = load_matrix(dir, name, "allx")?;
    let ally = load_matrix(dir, name, "ally")?;
    // x is only the feature block of the labeled prefix of allx; check it agrees
    let x = load_matrix(dir, name, "x")?;
    let graph_bytes = read(dir, &format!("ind.{name}.graph"))?;
    let adjacency = pickle::adjacency_dict(&pickle::parse(&graph_bytes)?)?;
    let index_path = dir.join(format!("ind.{name}.test.index"));
    let index_text = std::fs::read_to_string(&index_path).map_err(|source| Error::Missing {
        path: index_path.clone(),
        source,
    })?;
    let mut test_index = Vec::new();
    for (lineno, line) in index_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        test_index.push(line.parse::<usize>().map_err(|_| Error::Parse {
            path: index_path.clone(),
            line: lineno + 1,
            msg: format!("invalid test index {line:?}"),
        })?);
    }

    let dim = allx.cols;
    let classes = ally.cols;
    if tx.cols != dim || x.cols != dim {
        return Err(Error::invalid("feature dimensions of x/tx/allx disagree"));
    }
    if ty.cols != classes || y.cols != classes {
        return Err(Error::invalid("label dimensions of y/ty/ally disagree"));
    }
    if tx.rows != test_index.len() || ty.rows != test_index.len() {
        return Err(Error::invalid(format!(
            "test.index has {} entries but tx/ty have {}/{} rows",
            test_index.len(),
            tx.rows,
            ty.rows
        )));
    }
    if allx.rows != ally.rows || y.rows > ally.rows || x.rows != y.rows {
        return Err(Error::invalid("allx/ally/x/y row counts are inconsistent"));
    }

    let n = [
        allx.rows,
        test_index.iter().max().map_or(0, |&m| m + 1),
        adjacency.iter().map(|(k, _)| k + 1).max().unwrap_or(0),
    ]
    .into_iter()
    .max()
    .unwrap_or(0);

    let mut feature_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for i in 0..allx.rows {
        feature_rows[i] = allx.row(i);
        labels[i] = one_hot_label(&ally, i);
    }
    let mut seen_test = vec![false; n];
    for (k, &node) in test_index.iter().enumerate() {
        if node < allx.rows {
            return Err(Error::invalid(format!(
                "test index {node} collides with the allx block (rows 0..{})",
                allx.rows
            )));
        }
        if std::mem::replace(&mut seen_test[node], true) {
            return Err(Error::invalid(format!("duplicate test index {node}")));
        }
        feature_rows[node] = tx.row(k);
        labels[node] = one_hot_label(&ty, k);
    }

    let mut pairs = BTreeSet::new();
    for (src, nbrs) in &adjacency {
        for &dst in nbrs {
            if dst >= n {
                return Err(Error::invalid(format!(
                    "graph neighbor {dst} of node {src} out of range n={n}"
                )));
            }
            pairs.insert((*src.min(&dst), *src.max(&dst)));
        }
    }
    let graph = AttributedGraph::from_edges(n, pairs.into_iter().map(|(i, j)| (i, j, 1.0)), false)?
        .with_labels(labels, classes)?
        .with_features(SparseFeatures::from_rows(dim, feature_rows)?)?;

    let labeled_train: Vec<usize> = (0..y.rows).collect();
    let mut test: Vec<usize> = test_index
        .iter()
        .copied()
        .filter(|&v| graph.label(v).is_some())
        .collect();
    test.sort_unstable();
    let in_test: BTreeSet<usize> = test.iter().copied().collect();
    let unlabeled_train = (y.rows..n).filter(|v| !in_test.contains(v)).collect();
    let mut per_class = vec![0usize; classes];
    for &v in &labeled_train {
        if let Some(c) = graph.label(v) {
            per_class[c] += 1;
        }
    }
    let minority_class = (0..classes).min_by_key(|&c| (per_class[c], c)).unwrap_or(0);
    let split = LabeledSplit {
        labeled_train,
        unlabeled_train,
        test,
        minority_class,
    };
    split.validate(&graph)?;
    Ok((graph, split))
}
