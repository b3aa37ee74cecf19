//! Context sampling with label jumps, skip-gram pair extraction, negative
//! sampling and class-balanced batch selection.

use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, LabeledSplit, TransitionMatrix};
use crate::walk::{step, VisitState, VisitingFunction, WalkPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextConfig {
    /// Probability of jumping to another node with the same label.
    pub jump_prob: f64,
    pub walk_length: usize,
    pub window: usize,
    pub visiting: VisitingFunction,
}

impl Default for ContextConfig {
    fn default() -> Self {
        Self {
            jump_prob: 0.2,
            walk_length: 10,
            window: 5,
            visiting: VisitingFunction::Exponential { alpha: 0.7 },
        }
    }
}

impl ContextConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.jump_prob) {
            return Err(Error::invalid(format!(
                "jump probability must lie in [0, 1), got {}",
                self.jump_prob
            )));
        }
        if self.walk_length == 0 || self.window == 0 {
            return Err(Error::invalid("walk length and window must be at least 1"));
        }
        self.visiting.validate()
    }
}

/// Training-visible labels with per-class member lists for jump targets.
#[derive(Debug, Clone)]
pub struct LabelIndex {
    labels: Vec<Option<usize>>,
    members: Vec<Vec<usize>>,
}

impl LabelIndex {
    pub fn new(labels: Vec<Option<usize>>) -> Self {
        let classes = labels.iter().flatten().max().map_or(0, |&c| c + 1);
        let mut members = vec![Vec::new(); classes];
        for (v, l) in labels.iter().enumerate() {
            if let Some(c) = l {
                members[*c].push(v);
            }
        }
        Self { labels, members }
    }

    pub fn from_split(graph: &AttributedGraph, split: &LabeledSplit) -> Self {
        Self::new(split.known_labels(graph))
    }

    pub fn label(&self, v: usize) -> Option<usize> {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }
}

/// One walk of `cfg.walk_length` steps from `start`.
///
/// At a labeled node the walker jumps with probability `jump_prob` to a
/// uniformly chosen other node of the same class; otherwise it takes a
/// reweighted step. Jump targets are recorded as visits. Counts start fresh
/// for every call.
pub fn sample_context_path<R: Rng + ?Sized>(
    r: &TransitionMatrix,
    labels: &LabelIndex,
    start: usize,
    cfg: &ContextConfig,
    rng: &mut R,
) -> WalkPath {
    let mut state = VisitState::new(r.n(), start);
    let mut path = Vec::with_capacity(cfg.walk_length + 1);
    path.push(start);
    let mut scratch = Vec::new();
    for _ in 0..cfg.walk_length {
        let cur = state.current();
        let jump = match labels.label(cur) {
            Some(c) if cfg.jump_prob > 0.0 && rng.gen::<f64>() < cfg.jump_prob => {
                let same = labels.members(c);
                (same.len() >= 2).then(|| {
                    let k = rng.gen_range(0..same.len() - 1);
                    let pos = same.binary_search(&cur).expect("labeled node is a member");
                    same[if k >= pos { k + 1 } else { k }]
                })
            }
            _ => None,
        };
        let next = match jump {
            Some(target) => {
                state.record_visit(target);
                target
            }
            None => step(r, &mut state, &cfg.visiting, &mut scratch, rng),
        };
        path.push(next);
    }
    WalkPath(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeContextPair {
    pub center: usize,
    pub context: usize,
}

/// Skip-gram pairs: `(path[i], path[j])` for `0 < |i - j| <= window`,
/// skipping pairs whose two ids coincide.
pub fn extract_pairs(path: &[usize], window: usize) -> Vec<NodeContextPair> {
    let mut out = Vec::new();
    for (i, &center) in path.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(path.len() - 1);
        for (j, &context) in path.iter().enumerate().take(hi + 1).skip(lo) {
            if j != i && context != center {
                out.push(NodeContextPair { center, context });
            }
        }
    }
    out
}

/// Degree-based negative sampling distribution `P_n(v) ∝ deg(v)^exponent`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    probs: Vec<f64>,
    dist: WeightedIndex<f64>,
    pub k: usize,
}

impl NegativeSampler {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

pub fn build_negative_sampler(
    graph: &AttributedGraph,
    exponent: f64,
    k: usize,
) -> Result<NegativeSampler> {
    if !(exponent >= 0.0 && exponent.is_finite()) {
        return Err(Error::invalid(format!(
            "negative exponent must be >= 0, got {exponent}"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("need at least one negative per pair"));
    }
    let weights: Vec<f64> = (0..graph.n())
        .map(|v| (graph.degree(v).max(1) as f64).powf(exponent))
        .collect();
    let total: f64 = weights.iter().sum();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(NegativeSampler {
        probs: weights.iter().map(|w| w / total).collect(),
        dist,
        k,
    })
}

/// `k` draws from `P_n`, redrawing any that hit `center`.
pub fn sample_negatives<R: Rng + ?Sized>(
    sampler: &NegativeSampler,
    center: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::invalid("need at least one negative"));
    }
    let n = sampler.probs.len();
    if n < 2 || sampler.probs[center] >= 1.0 {
        return Err(Error::invalid("negative sampling needs at least two nodes"));
    }
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let v = sampler.dist.sample(rng);
        if v != center {
            out.push(v);
        }
    }
    Ok(out)
}

/// Start nodes for one training iteration.
///
/// With `m` the size of the smallest labeled class, the batch holds all `m`
/// nodes of that class, `m` uniformly drawn labeled nodes of every other
/// class, and up to `batch_size - classes * m` distinct nodes whose labels
/// are hidden from training.
pub fn balanced_batch<R: Rng + ?Sized>(
    split: &LabeledSplit,
    labels: &[Option<usize>],
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let classes = split
        .labeled_train
        .iter()
        .filter_map(|&v| labels[v])
        .max()
        .map_or(0, |c| c + 1);
    let mut per_class = vec![Vec::new(); classes];
    for &v in &split.labeled_train {
        let c =
            labels[v].ok_or_else(|| Error::invalid(format!("labeled node {v} has no label")))?;
        per_class[c].push(v);
    }
    per_class.retain(|m| !m.is_empty());
    let m = per_class.iter().map(Vec::len).min().unwrap_or(0);
    let labeled_total = m * per_class.len();
    if batch_size < labeled_total {
        return Err(Error::Size {
            class: "batch".into(),
            needed: labeled_total,
            available: batch_size,
        });
    }
    let mut batch = Vec::with_capacity(batch_size);
    for members in &per_class {
        if members.len() == m {
            batch.extend_from_slice(members);
        } else {
            batch.extend(
                index::sample(rng, members.len(), m)
                    .into_iter()
                    .map(|i| members[i]),
            );
        }
    }
    let pool = split.unlabeled_pool();
    let fill = (batch_size - labeled_total).min(pool.len());
    batch.extend(
        index::sample(rng, pool.len(), fill)
            .into_iter()
            .map(|i| pool[i]),
    );
    Ok(batch)
}

/// Labeled-only batch with `m` nodes per class (the supervised phase).
pub fn balanced_labeled_batch<R: Rng + ?Sized>(
    split: &LabeledSplit,
    labels: &[Option<usize>],
    rng: &mut R,
) -> Result<Vec<usize>> {
    let labeled = LabeledSplit {
        labeled_train: split.labeled_train.clone(),
        unlabeled_train: Vec::new(),
        test: Vec::new(),
        minority_class: split.minority_class,
    };
    let mut batch = balanced_batch(&labeled, labels, split.labeled_train.len(), rng)?;
    batch.shuffle(rng);
    Ok(batch)
}

/// Word2vec-style corpus: one path per line, ids separated by spaces.
pub fn write_corpus<'a>(paths: impl IntoIterator<Item = &'a WalkPath>) -> String {
    let mut out = String::new();
    for p in paths {
        let line: Vec<String> = p.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
