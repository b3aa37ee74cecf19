use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AttributedGraph;
use crate::error::{Error, Result};

/// Partition of nodes into labeled training, unlabeled training and test sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSplit {
    pub labeled_train: Vec<usize>,
    pub unlabeled_train: Vec<usize>,
    pub test: Vec<usize>,
    pub minority_class: usize,
}

impl LabeledSplit {
    pub fn validate(&self, graph: &AttributedGraph) -> Result<()> {
        let n = graph.n();
        let mut owner = vec![0u8; n];
        for (tag, set) in [
            (1u8, &self.labeled_train),
            (2, &self.unlabeled_train),
            (3, &self.test),
        ] {
            for &v in set {
                if v >= n {
                    return Err(Error::invalid(format!("split node {v} out of range n={n}")));
                }
                if owner[v] != 0 {
                    return Err(Error::invalid(format!(
                        "node {v} appears in two split sets"
                    )));
                }
                owner[v] = tag;
            }
        }
        if let Some(&v) = self
            .labeled_train
            .iter()
            .find(|&&v| graph.label(v).is_none())
        {
            return Err(Error::invalid(format!(
                "labeled training node {v} has no label"
            )));
        }
        if let Some(&v) = self.test.iter().find(|&&v| graph.label(v).is_none()) {
            return Err(Error::invalid(format!("test node {v} has no label")));
        }
        Ok(())
    }

    /// Labels visible to training: graph labels restricted to `labeled_train`.
    pub fn known_labels(&self, graph: &AttributedGraph) -> Vec<Option<usize>> {
        let mut known = vec![None; graph.n()];
        for &v in &self.labeled_train {
            known[v] = graph.label(v);
        }
        known
    }

    /// Nodes whose labels are hidden from training (unlabeled training and test).
    pub fn unlabeled_pool(&self) -> Vec<usize> {
        let mut pool = self.unlabeled_train.clone();
        pool.extend_from_slice(&self.test);
        pool.sort_unstable();
        pool
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (
            self.labeled_train.len(),
            self.unlabeled_train.len(),
            self.test.len(),
        )
    }
}

/// Splits `total` across buckets proportionally to `weights` (largest remainder).
fn proportional(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut alloc: Vec<usize> = weights.iter().map(|&w| total * w / sum).collect();
    let mut rema: Vec<(usize, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| ((total * w) % sum, i))
        .collect();
    rema.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = total - alloc.iter().sum::<usize>();
    for &(_, i) in rema.iter().take(short) {
        alloc[i] += 1;
    }
    alloc
}

/// Builds an imbalanced semi-supervised split.
///
/// `n_min` labeled nodes come from `minority_class`; `n_maj` labeled nodes
/// are drawn from the remaining classes, allocated proportionally to class
/// size. `n_test` labeled nodes are then drawn from what is left, and all
/// other nodes become unlabeled training nodes.
pub fn make_imbalanced_split<R: Rng>(
    graph: &AttributedGraph,
    minority_class: usize,
    n_min: usize,
    n_maj: usize,
    n_test: usize,
    rng: &mut R,
) -> Result<LabeledSplit> {
    let classes = graph.num_classes();
    if minority_class >= classes {
        return Err(Error::invalid(format!(
            "minority class {minority_class} out of range for {classes} classes"
        )));
    }
    let mut chosen = vec![false; graph.n()];
    let mut labeled = Vec::with_capacity(n_min + n_maj);

    let mut minority = graph.class_members(minority_class);
    if minority.len() < n_min {
        return Err(Error::Size {
            class: minority_class.to_string(),
            needed: n_min,
            available: minority.len(),
        });
    }
    minority.shuffle(rng);
    labeled.extend_from_slice(&minority[..n_min]);

    let others: Vec<usize> = (0..classes).filter(|&c| c != minority_class).collect();
    let members: Vec<Vec<usize>> = others.iter().map(|&c| graph.class_members(c)).collect();
    let available: usize = members.iter().map(Vec::len).sum();
    if available < n_maj {
        return Err(Error::Size {
            class: format!("majority (all classes except {minority_class})"),
            needed: n_maj,
            available,
        });
    }
    let alloc = proportional(n_maj, &members.iter().map(Vec::len).collect::<Vec<_>>());
    for (mut m, take) in members.into_iter().zip(alloc) {
        m.shuffle(rng);
        labeled.extend_from_slice(&m[..take]);
    }
    for &v in &labeled {
        chosen[v] = true;
    }

    let mut rest: Vec<usize> = (0..graph.n())
        .filter(|&v| !chosen[v] && graph.label(v).is_some())
        .collect();
    if rest.len() < n_test {
        return Err(Error::Size {
            class: "test (labeled remainder)".into(),
            needed: n_test,
            available: rest.len(),
        });
    }
    rest.shuffle(rng);
    let mut test = rest[..n_test].to_vec();
    for &v in &test {
        chosen[v] = true;
    }
    let unlabeled_train = (0..graph.n()).filter(|&v| !chosen[v]).collect();
    labeled.sort_unstable();
    test.sort_unstable();
    Ok(LabeledSplit {
        labeled_train: labeled,
        unlabeled_train,
        test,
        minority_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::planted_partition;
    use crate::rng::Streams;

    fn seven_class_graph() -> AttributedGraph {
        // 2708 nodes across 7 classes, shaped like the Cora class histogram
        let sizes = [351, 217, 418, 818, 426, 298, 180];
        planted_partition(&sizes, 0.002, 0.0, &mut Streams::new(1).stream("g")).unwrap()
    }

    #[test]
    fn cora_shaped_sizes() {
        let g = seven_class_graph();
        assert_eq!(g.n(), 2708);
        let s =
            make_imbalanced_split(&g, 6, 20, 120, 1000, &mut Streams::new(3).stream("s")).unwrap();
        assert_eq!(s.sizes(), (140, 1568, 1000));
        s.validate(&g).unwrap();
        let min = s
            .labeled_train
            .iter()
            .filter(|&&v| g.label(v) == Some(6))
            .count();
        assert_eq!(min, 20);
    }

    #[test]
    fn majority_is_stratified() {
        let g = seven_class_graph();
        let s = make_imbalanced_split(&g, 6, 20, 120, 0, &mut Streams::new(3).stream("s")).unwrap();
        let count = |c| {
            s.labeled_train
                .iter()
                .filter(|&&v| g.label(v) == Some(c))
                .count()
        };
        // 120 * 818 / 2528 = 38.8
        assert!((38..=39).contains(&count(3)));
        assert!((10..=11).contains(&count(1)));
    }

    #[test]
    fn empty_minority() {
        let g = seven_class_graph();
        let s = make_imbalanced_split(&g, 0, 0, 120, 10, &mut Streams::new(3).stream("s")).unwrap();
        assert_eq!(s.labeled_train.len(), 120);
        assert!(s.labeled_train.iter().all(|&v| g.label(v) != Some(0)));
    }

    #[test]
    fn deterministic() {
        let g = seven_class_graph();
        let a = make_imbalanced_split(&g, 2, 20, 120, 500, &mut Streams::new(9).stream("s"));
        let b = make_imbalanced_split(&g, 2, 20, 120, 500, &mut Streams::new(9).stream("s"));
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn size_error_names_class() {
        let g = seven_class_graph();
        match make_imbalanced_split(&g, 6, 181, 0, 0, &mut Streams::new(1).stream("s")) {
            Err(Error::Size { class, .. }) => assert_eq!(class, "6"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn largest_remainder() {
        assert_eq!(proportional(10, &[1, 1, 1]), vec![4, 3, 3]);
        assert_eq!(proportional(0, &[5, 5]), vec![0, 0]);
        assert_eq!(proportional(7, &[0, 7]), vec![0, 7]);
    }
}
