use rand::Rng;

use super::AttributedGraph;
use crate::error::{Error, Result};

/// Planted-partition random graph: classes of the given sizes, edges inside
/// a class with probability `p_in`, across classes with `p_out`.
///
/// Every node is labeled with its block index. No features are attached;
/// models fall back to one-hot node identities.
pub fn planted_partition<R: Rng>(
    n_per_class: &[usize],
    p_in: f64,
    p_out: f64,
    rng: &mut R,
) -> Result<AttributedGraph> {
    if n_per_class.is_empty() {
        return Err(Error::invalid("planted partition needs at least one class"));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out >= p_in {
        return Err(Error::invalid(format!(
            "need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    let labels: Vec<usize> = n_per_class
        .iter()
        .enumerate()
        .flat_map(|(c, &size)| std::iter::repeat_n(c, size))
        .collect();
    let n = labels.len();
    if n == 0 {
        return Err(Error::invalid("planted partition has no nodes"));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    AttributedGraph::from_edges(n, edges, false)?
        .with_labels(labels.into_iter().map(Some).collect(), n_per_class.len())
}
