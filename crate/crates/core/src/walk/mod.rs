//! Reweighted random walks.
//!
//! The next step from node `i` goes to neighbor `j` with probability
//! proportional to `R[i][j] * f(S_j)`, where `S_j` counts earlier visits to
//! `j` and `f` is the [`VisitingFunction`]. A constant `f` is the plain
//! random walk, `f(s) = s + 1` is the vertex-reinforced walk and
//! `f(s) = alpha^s` the vertex-diminished walk.
//!
//! The start node counts as visited at `t = 0`, so `sum(S) = t + 1`.

pub mod dynamics;

use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VisitingFunction {
    Constant,
    Linear,
    Exponential { alpha: f64 },
}

impl VisitingFunction {
    pub fn exponential(alpha: f64) -> Result<Self> {
        let f = VisitingFunction::Exponential { alpha };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            VisitingFunction::Exponential { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::invalid(format!(
                    "exponential visiting function needs 0 < alpha < 1, got {alpha}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, count: u64) -> f64 {
        match *self {
            VisitingFunction::Constant => 1.0,
            VisitingFunction::Linear => count as f64 + 1.0,
            VisitingFunction::Exponential { alpha } => alpha.powf(count as f64),
        }
    }

    /// `ln f(count)`; finite for every count even when `f` itself underflows.
    pub fn log_evaluate(&self, count: u64) -> f64 {
        match *self {
            VisitingFunction::Constant => 0.0,
            VisitingFunction::Linear => (count as f64 + 1.0).ln(),
            VisitingFunction::Exponential { alpha } => count as f64 * alpha.ln(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VisitingFunction::Constant => "constant",
            VisitingFunction::Linear => "linear",
            VisitingFunction::Exponential { .. } => "exponential",
        }
    }
}

/// Visit counts `S`, step `t` and current position of one walker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitState {
    counts: Vec<u64>,
    step: usize,
    current: usize,
}

impl VisitState {
    /// Fresh state at `start`, with the start already counted once.
    pub fn new(n: usize, start: usize) -> Self {
        let mut counts = vec![0; n];
        counts[start] = 1;
        Self {
            counts,
            step: 0,
            current: start,
        }
    }

    pub fn from_counts(counts: Vec<u64>, current: usize) -> Self {
        let total: u64 = counts.iter().sum();
        Self {
            step: total.saturating_sub(1) as usize,
            counts,
            current,
        }
    }

    pub fn record_visit(&mut self, node: usize) {
        self.counts[node] += 1;
        self.step += 1;
        self.current = node;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }
}

/// Node sequence of one walk: the start followed by one node per step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkPath(pub Vec<usize>);

impl Deref for WalkPath {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Unnormalized step weights from `state.current()` written into `out`;
/// returns their sum.
///
/// Non-constant visiting functions are evaluated in log space and shifted by
/// the maximum log-weight, so the largest term is exactly `R[i][j]`.
pub(crate) fn step_weights(
    r: &TransitionMatrix,
    counts: &[u64],
    current: usize,
    f: &VisitingFunction,
    out: &mut Vec<f64>,
) -> f64 {
    let (targets, probs) = r.row(current);
    out.clear();
    match f {
        VisitingFunction::Constant => out.extend_from_slice(probs),
        _ => {
            let max = targets
                .iter()
                .map(|&j| f.log_evaluate(counts[j]))
                .fold(f64::NEG_INFINITY, f64::max);
            out.extend(
                targets
                    .iter()
                    .zip(probs)
                    .map(|(&j, &p)| p * (f.log_evaluate(counts[j]) - max).exp()),
            );
        }
    }
    out.iter().sum()
}

/// Inverse-CDF draw over unnormalized weights.
pub(crate) fn pick<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // rounding can leave u == total; fall back to the last positive weight
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Next-step distribution `(neighbor, probability)` from the current node.
pub fn step_distribution(
    r: &TransitionMatrix,
    state: &VisitState,
    f: &VisitingFunction,
) -> Vec<(usize, f64)> {
    let (targets, probs) = r.row(state.current);
    if matches!(f, VisitingFunction::Constant) {
        return targets.iter().copied().zip(probs.iter().copied()).collect();
    }
    let mut w = Vec::with_capacity(targets.len());
    let total = step_weights(r, &state.counts, state.current, f, &mut w);
    targets
        .iter()
        .zip(w)
        .map(|(&j, x)| (j, x / total))
        .collect()
}

/// Draws one step, records it in `state` and returns the new node.
pub fn step<R: Rng + ?Sized>(
    r: &TransitionMatrix,
    state: &mut VisitState,
    f: &VisitingFunction,
    scratch: &mut Vec<f64>,
    rng: &mut R,
) -> usize {
    let total = step_weights(r, &state.counts, state.current, f, scratch);
    let k = pick(scratch, total, rng);
    let next = r.row(state.current).0[k];
    state.record_visit(next);
    next
}

/// Continues the walk held in `state` for `length` steps, appending to `path`.
pub fn walk_from_state<R: Rng + ?Sized>(
    r: &TransitionMatrix,
    f: &VisitingFunction,
    state: &mut VisitState,
    length: usize,
    path: &mut Vec<usize>,
    rng: &mut R,
) {
    let mut scratch = Vec::new();
    for _ in 0..length {
        path.push(step(r, state, f, &mut scratch, rng));
    }
}

/// A fresh walk of `length` steps from `start`.
pub fn walk<R: Rng + ?Sized>(
    r: &TransitionMatrix,
    f: &VisitingFunction,
    start: usize,
    length: usize,
    rng: &mut R,
) -> WalkPath {
    let mut state = VisitState::new(r.n(), start);
    let mut path = Vec::with_capacity(length + 1);
    path.push(start);
    walk_from_state(r, f, &mut state, length, &mut path, rng);
    WalkPath(path)
}

/// Fraction of path nodes sharing the start node's label. Unlabeled nodes
/// count as mismatches.
pub fn path_class_purity(path: &[usize], labels: &[Option<usize>]) -> Result<f64> {
    let start = *path
        .first()
        .ok_or_else(|| Error::invalid("empty walk path"))?;
    let class =
        labels[start].ok_or_else(|| Error::invalid(format!("start node {start} is unlabeled")))?;
    let same = path.iter().filter(|&&v| labels[v] == Some(class)).count();
    Ok(same as f64 / path.len() as f64)
}
