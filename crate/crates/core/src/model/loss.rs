//! Skip-gram negative-sampling loss over node-context pairs and softmax
//! cross-entropy over the concatenated feature/embedding heads, with their
//! analytic gradients and SGD steps.

use std::collections::BTreeMap;

use super::params::{Activation, Dense, ModelParams};
use crate::error::{Error, Result};
use crate::graph::SparseFeatures;
use crate::sampling::NodeContextPair;

/// `ln(sigmoid(z))` without overflow for large `|z|`.
pub fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-sum_pairs [ln s(w_c . e_i) + sum_k ln s(-w_n . e_i)]`, with `negatives[p]`
/// holding the negatives drawn for pair `p`.
pub fn unsup_loss(
    params: &ModelParams,
    pairs: &[NodeContextPair],
    negatives: &[Vec<usize>],
) -> f64 {
    pairs
        .iter()
        .zip(negatives)
        .map(|(p, negs)| {
            let e = params.embedding(p.center);
            let pos = -log_sigmoid(dot(params.context_vec(p.context), e));
            let neg: f64 = negs
                .iter()
                .map(|&v| -log_sigmoid(-dot(params.context_vec(v), e)))
                .sum();
            pos + neg
        })
        .sum()
}

/// Sparse gradient of the context loss: only touched rows are present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnsupGrads {
    pub embeddings: BTreeMap<usize, Vec<f64>>,
    pub context: BTreeMap<usize, Vec<f64>>,
}

fn add_scaled(map: &mut BTreeMap<usize, Vec<f64>>, row: usize, dim: usize, s: f64, v: &[f64]) {
    let acc = map.entry(row).or_insert_with(|| vec![0.0; dim]);
    for (a, x) in acc.iter_mut().zip(v) {
        *a += s * x;
    }
}

/// Gradient of one pair's loss, evaluated at the current parameters.
fn pair_gradient(
    params: &ModelParams,
    pair: &NodeContextPair,
    negs: &[usize],
    grads: &mut UnsupGrads,
) -> f64 {
    let d = params.dim;
    let e = params.embedding(pair.center);
    let wc = params.context_vec(pair.context);
    let z = dot(wc, e);
    let mut loss = -log_sigmoid(z);
    let g = sigmoid(z) - 1.0;
    add_scaled(&mut grads.embeddings, pair.center, d, g, wc);
    add_scaled(&mut grads.context, pair.context, d, g, e);
    for &v in negs {
        let wn = params.context_vec(v);
        let z = dot(wn, e);
        loss -= log_sigmoid(-z);
        let g = sigmoid(z);
        add_scaled(&mut grads.embeddings, pair.center, d, g, wn);
        add_scaled(&mut grads.context, v, d, g, e);
    }
    loss
}

/// Loss and full gradient of [`unsup_loss`] at the current parameters.
pub fn unsup_gradients(
    params: &ModelParams,
    pairs: &[NodeContextPair],
    negatives: &[Vec<usize>],
) -> (f64, UnsupGrads) {
    let mut grads = UnsupGrads::default();
    let loss = pairs
        .iter()
        .zip(negatives)
        .map(|(p, negs)| pair_gradient(params, p, negs, &mut grads))
        .sum();
    (loss, grads)
}

fn finite_rows(map: &BTreeMap<usize, Vec<f64>>) -> bool {
    map.values().flatten().all(|x| x.is_finite())
}

/// One SGD sweep over `pairs`: each pair's gradient is taken at the current
/// parameters and applied with step `lr * lambda` before the next pair.
/// Only the rows of centers, contexts and negatives change. Returns the
/// summed loss seen along the sweep.
pub fn unsup_grad_step(
    params: &mut ModelParams,
    pairs: &[NodeContextPair],
    negatives: &[Vec<usize>],
    lr: f64,
    lambda: f64,
) -> Result<f64> {
    if pairs.len() != negatives.len() {
        return Err(Error::invalid("each pair needs its own negative list"));
    }
    let scale = lr * lambda;
    let d = params.dim;
    let mut total = 0.0;
    let mut e = vec![0.0; d];
    let mut ge = vec![0.0; d];
    let mut coef = Vec::new();
    for (idx, (pair, negs)) in pairs.iter().zip(negatives).enumerate() {
        e.copy_from_slice(params.embedding(pair.center));
        ge.iter_mut().for_each(|x| *x = 0.0);
        coef.clear();
        let targets = std::iter::once((pair.context, 1.0)).chain(negs.iter().map(|&v| (v, 0.0)));
        for (v, label) in targets {
            let w = params.context_vec(v);
            let z = dot(w, &e);
            total -= if label > 0.0 {
                log_sigmoid(z)
            } else {
                log_sigmoid(-z)
            };
            let g = sigmoid(z) - label;
            for (a, x) in ge.iter_mut().zip(w) {
                *a += g * x;
            }
            coef.push((v, g));
        }
        if !ge.iter().all(|x| x.is_finite()) || !coef.iter().all(|(_, g)| g.is_finite()) {
            return Err(Error::NonFinite {
                phase: "unsupervised",
                iteration: 0,
                msg: format!(
                    "non-finite gradient at pair {idx} ({} -> {})",
                    pair.center, pair.context
                ),
            });
        }
        if scale == 0.0 {
            continue;
        }
        for &(v, g) in &coef {
            for (p, x) in params.context_mut(v).iter_mut().zip(&e) {
                *p -= scale * g * x;
            }
        }
        for (p, x) in params.embedding_mut(pair.center).iter_mut().zip(&ge) {
            *p -= scale * x;
        }
    }
    Ok(total)
}

/// Intermediate values of one supervised forward pass.
struct Forward {
    feature_acts: Vec<Activation>,
    feature_pre: Vec<Vec<f64>>,
    embed_acts: Vec<Activation>,
    embed_pre: Vec<Vec<f64>>,
    joint: Activation,
    logits: Vec<f64>,
}

fn dense_act(v: &[f64]) -> Activation {
    v.iter().copied().enumerate().collect()
}

fn relu(v: &[f64]) -> Activation {
    v.iter().map(|&x| x.max(0.0)).enumerate().collect()
}

fn run_head(layers: &[Dense], input: Activation) -> (Vec<Activation>, Vec<Vec<f64>>) {
    let mut acts = vec![input];
    let mut pre = Vec::with_capacity(layers.len());
    for l in layers {
        let z = l.forward(acts.last().unwrap());
        acts.push(relu(&z));
        pre.push(z);
    }
    (acts, pre)
}

fn forward(params: &ModelParams, x: &[(usize, f64)], e: &[f64]) -> Forward {
    let (feature_acts, feature_pre) = run_head(&params.feature_head, x.to_vec());
    let (embed_acts, embed_pre) = run_head(&params.embedding_head, dense_act(e));
    let offset = params.feature_head_width();
    let mut joint = feature_acts.last().unwrap().clone();
    joint.extend(
        embed_acts
            .last()
            .unwrap()
            .iter()
            .map(|&(j, v)| (j + offset, v)),
    );
    let logits = params.out.forward(&joint);
    Forward {
        feature_acts,
        feature_pre,
        embed_acts,
        embed_pre,
        joint,
        logits,
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|x| x / total).collect()
}

fn cross_entropy(logits: &[f64], class: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[class]
}

/// Class probabilities for a node with input features `x` and embedding `e`.
pub fn predict(params: &ModelParams, x: &[(usize, f64)], e: &[f64]) -> Vec<f64> {
    softmax(&forward(params, x, e).logits)
}

pub fn predict_node(params: &ModelParams, inputs: &SparseFeatures, node: usize) -> Vec<f64> {
    let x: Vec<(usize, f64)> = inputs.row(node).collect();
    predict(params, &x, params.embedding(node))
}

/// Mean softmax cross-entropy over `(node, class)` examples.
pub fn sup_loss(params: &ModelParams, inputs: &SparseFeatures, batch: &[(usize, usize)]) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|&(v, c)| {
            let x: Vec<(usize, f64)> = inputs.row(v).collect();
            cross_entropy(&forward(params, &x, params.embedding(v)).logits, c)
        })
        .sum();
    total / batch.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupGrads {
    pub feature_head: Vec<Dense>,
    pub embedding_head: Vec<Dense>,
    pub out: Dense,
    pub embeddings: BTreeMap<usize, Vec<f64>>,
}

fn back_head(
    layers: &[Dense],
    acts: &[Activation],
    pre: &[Vec<f64>],
    mut g: Vec<f64>,
    grads: &mut [Dense],
    need_input: bool,
) -> Vec<f64> {
    for l in (0..layers.len()).rev() {
        for (gi, &z) in g.iter_mut().zip(&pre[l]) {
            if z <= 0.0 {
                *gi = 0.0;
            }
        }
        let from = if l == 0 && !need_input {
            layers[l].inputs
        } else {
            0
        };
        g = layers[l].backward(&acts[l], &g, &mut grads[l], from);
    }
    g
}

/// Loss and gradient of [`sup_loss`] at the current parameters.
pub fn sup_gradients(
    params: &ModelParams,
    inputs: &SparseFeatures,
    batch: &[(usize, usize)],
) -> (f64, SupGrads) {
    let mut grads = SupGrads {
        feature_head: params.feature_head.iter().map(Dense::zeros_like).collect(),
        embedding_head: params
            .embedding_head
            .iter()
            .map(Dense::zeros_like)
            .collect(),
        out: params.out.zeros_like(),
        embeddings: BTreeMap::new(),
    };
    let scale = 1.0 / batch.len() as f64;
    let offset = params.feature_head_width();
    let mut loss = 0.0;
    for &(v, class) in batch {
        let x: Vec<(usize, f64)> = inputs.row(v).collect();
        let fw = forward(params, &x, params.embedding(v));
        loss += cross_entropy(&fw.logits, class) * scale;
        let mut g = softmax(&fw.logits);
        g[class] -= 1.0;
        g.iter_mut().for_each(|x| *x *= scale);

        let has_feature_layers = !params.feature_head.is_empty();
        let from = if has_feature_layers { 0 } else { offset };
        let g_joint = params.out.backward(&fw.joint, &g, &mut grads.out, from);
        let (g_fx, g_fe) = if has_feature_layers {
            let (a, b) = g_joint.split_at(offset);
            (a.to_vec(), b.to_vec())
        } else {
            (Vec::new(), g_joint)
        };
        if has_feature_layers {
            back_head(
                &params.feature_head,
                &fw.feature_acts,
                &fw.feature_pre,
                g_fx,
                &mut grads.feature_head,
                false,
            );
        }
        let g_e = back_head(
            &params.embedding_head,
            &fw.embed_acts,
            &fw.embed_pre,
            g_fe,
            &mut grads.embedding_head,
            true,
        );
        add_scaled(&mut grads.embeddings, v, params.dim, 1.0, &g_e);
    }
    (loss, grads)
}

/// One minibatch gradient step on the supervised loss; returns the loss
/// before the update.
pub fn sup_grad_step(
    params: &mut ModelParams,
    inputs: &SparseFeatures,
    batch: &[(usize, usize)],
    lr: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("supervised batch is empty"));
    }
    let (loss, grads) = sup_gradients(params, inputs, batch);
    let finite = grads.out.is_finite()
        && grads.feature_head.iter().all(Dense::is_finite)
        && grads.embedding_head.iter().all(Dense::is_finite)
        && finite_rows(&grads.embeddings);
    if !finite || !loss.is_finite() {
        return Err(Error::NonFinite {
            phase: "supervised",
            iteration: 0,
            msg: "non-finite loss or gradient".into(),
        });
    }
    if lr == 0.0 {
        return Ok(loss);
    }
    for (p, g) in params.feature_head.iter_mut().zip(&grads.feature_head) {
        p.axpy(-lr, g);
    }
    for (p, g) in params.embedding_head.iter_mut().zip(&grads.embedding_head) {
        p.axpy(-lr, g);
    }
    params.out.axpy(-lr, &grads.out);
    for (&row, g) in &grads.embeddings {
        for (p, x) in params.embedding_mut(row).iter_mut().zip(g) {
            *p -= lr * x;
        }
    }
    Ok(loss)
}
