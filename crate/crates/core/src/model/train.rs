use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{sup_grad_step, unsup_grad_step};
use super::params::{init_params, node_inputs, Hyper, ModelParams};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, LabeledSplit, TransitionMatrix};
use crate::rng::Streams;
use crate::sampling::{
    balanced_batch, balanced_labeled_batch, extract_pairs, sample_context_path, sample_negatives,
    ContextConfig, LabelIndex, NegativeSampler, NodeContextPair,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Unsupervised,
    Supervised,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub phase: Phase,
    pub iter: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub losses: Vec<LossRecord>,
    /// Set when training stopped early on a non-finite loss or gradient.
    pub aborted: Option<String>,
}

impl TrainReport {
    /// One `{"phase", "iter", "loss"}` object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for rec in &self.losses {
            out.push_str(&serde_json::to_string(rec).expect("loss record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Everything [`train`] needs besides the graph and its split.
#[derive(Debug, Clone)]
pub struct TrainSetup<'a> {
    pub transition: &'a TransitionMatrix,
    pub context: &'a ContextConfig,
    pub sampler: &'a NegativeSampler,
    pub hyper: &'a Hyper,
    pub streams: Streams,
    /// Generate batch paths on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

/// Context pairs and their negatives for one start node.
fn start_pairs(
    setup: &TrainSetup<'_>,
    labels: &LabelIndex,
    iter: usize,
    slot: usize,
    start: usize,
) -> Result<(Vec<NodeContextPair>, Vec<Vec<usize>>)> {
    let streams = setup.streams.child("iteration", iter as u64);
    let mut rng = streams.indexed("walk", slot as u64);
    let path = sample_context_path(setup.transition, labels, start, setup.context, &mut rng);
    let pairs = extract_pairs(&path, setup.context.window);
    let mut rng = streams.indexed("negatives", slot as u64);
    let negs = pairs
        .iter()
        .map(|p| sample_negatives(setup.sampler, p.center, setup.hyper.negatives, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((pairs, negs))
}

fn split_iters(total: usize, rounds: usize, round: usize) -> usize {
    total / rounds + usize::from(round < total % rounds)
}

/// Two-phase training. Phase one draws balanced start batches, samples
/// label-aware context paths from each start and fits the skip-gram loss;
/// phase two fits the classifier on balanced labeled batches. With
/// `rounds > 1` the iteration budgets are split evenly and the phases
/// alternate.
///
/// Invalid inputs are errors. A non-finite loss or gradient ends training
/// early and is recorded in the returned report instead.
pub fn train(
    graph: &AttributedGraph,
    split: &LabeledSplit,
    setup: &TrainSetup<'_>,
) -> Result<(ModelParams, TrainReport)> {
    let hyper = setup.hyper;
    hyper.validate()?;
    setup.context.validate()?;
    split.validate(graph)?;
    if setup.transition.n() != graph.n() {
        return Err(Error::invalid("transition matrix does not match the graph"));
    }
    let inputs = node_inputs(graph);
    let mut params = init_params(
        graph.n(),
        inputs.dim(),
        graph.num_classes().max(1),
        hyper,
        setup.streams.root(),
    )?;
    let mut report = TrainReport {
        seed: setup.streams.root(),
        losses: Vec::new(),
        aborted: None,
    };
    let known = split.known_labels(graph);
    let labels = LabelIndex::from_split(graph, split);

    let mut unsup_iter = 0;
    let mut sup_iter = 0;
    let run = |params: &mut ModelParams,
               report: &mut TrainReport,
               unsup_iter: &mut usize,
               sup_iter: &mut usize,
               round: usize|
     -> Result<()> {
        for _ in 0..split_iters(hyper.iters_unsup, hyper.rounds, round) {
            let t = *unsup_iter;
            let mut rng = setup.streams.indexed("batch", t as u64);
            let batch = balanced_batch(split, &known, hyper.batch_size, &mut rng)?;
            let per_start: Vec<_> = if setup.parallel {
                batch
                    .par_iter()
                    .enumerate()
                    .map(|(slot, &v)| start_pairs(setup, &labels, t, slot, v))
                    .collect::<Result<_>>()?
            } else {
                batch
                    .iter()
                    .enumerate()
                    .map(|(slot, &v)| start_pairs(setup, &labels, t, slot, v))
                    .collect::<Result<_>>()?
            };
            let (pairs, negs): (Vec<_>, Vec<_>) = per_start.into_iter().unzip();
            let pairs: Vec<NodeContextPair> = pairs.into_iter().flatten().collect();
            let negs: Vec<Vec<usize>> = negs.into_iter().flatten().collect();
            let loss = unsup_grad_step(params, &pairs, &negs, hyper.lr_unsup, hyper.lambda)
                .map_err(|e| with_iteration(e, t))?;
            let loss = if pairs.is_empty() {
                0.0
            } else {
                loss / pairs.len() as f64
            };
            check_loss(loss, "unsupervised", t)?;
            report.losses.push(LossRecord {
                phase: Phase::Unsupervised,
                iter: t,
                loss,
            });
            *unsup_iter += 1;
        }
        for _ in 0..split_iters(hyper.iters_sup, hyper.rounds, round) {
            let t = *sup_iter;
            let mut rng = setup.streams.indexed("labeled", t as u64);
            let batch: Vec<(usize, usize)> = balanced_labeled_batch(split, &known, &mut rng)?
                .into_iter()
                .map(|v| (v, known[v].expect("labeled batch holds labeled nodes")))
                .collect();
            let loss = sup_grad_step(params, &inputs, &batch, hyper.lr_sup)
                .map_err(|e| with_iteration(e, t))?;
            check_loss(loss, "supervised", t)?;
            report.losses.push(LossRecord {
                phase: Phase::Supervised,
                iter: t,
                loss,
            });
            *sup_iter += 1;
        }
        Ok(())
    };
    for round in 0..hyper.rounds {
        match run(
            &mut params,
            &mut report,
            &mut unsup_iter,
            &mut sup_iter,
            round,
        ) {
            Ok(()) => {}
            Err(e @ Error::NonFinite { .. }) => {
                report.aborted = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((params, report))
}

fn with_iteration(e: Error, iteration: usize) -> Error {
    match e {
        Error::NonFinite { phase, msg, .. } => Error::NonFinite {
            phase,
            iteration,
            msg,
        },
        other => other,
    }
}

fn check_loss(loss: f64, phase: &'static str, iteration: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            phase,
            iteration,
            msg: format!("loss is {loss}"),
        })
    }
}

/// One line per node: `id v1 ... vd`, 17 significant digits.
pub fn format_embeddings(params: &ModelParams) -> String {
    let mut out = String::with_capacity(params.n * (params.dim * 24 + 8));
    for v in 0..params.n {
        let _ = write!(out, "{v}");
        for x in params.embedding(v) {
            let _ = write!(out, " {x:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Parses [`format_embeddings`] output back into an `n x d` matrix. Node ids
/// must cover `0..n` exactly once.
pub fn parse_embeddings(text: &str, origin: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Option<Vec<f64>>> = Vec::new();
    let mut dim = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: origin.into(),
            line: lineno + 1,
            msg,
        };
        let mut fields = line.split_whitespace();
        let id: usize = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|e| parse_err(format!("bad node id: {e}")))?;
        let vals = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(format!("bad value: {e}")))?;
        if *dim.get_or_insert(vals.len()) != vals.len() || vals.is_empty() {
            return Err(parse_err("inconsistent embedding width".into()));
        }
        if id >= rows.len() {
            rows.resize(id + 1, None);
        }
        if rows[id].replace(vals).is_some() {
            return Err(parse_err(format!("node {id} listed twice")));
        }
    }
    rows.into_iter()
        .enumerate()
        .map(|(v, r)| r.ok_or_else(|| Error::invalid(format!("{origin}: node {v} missing"))))
        .collect()
}

pub const CHECKPOINT_FORMAT: &str = "imverde-model";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Versioned JSON model checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub hyper: Hyper,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn new(params: ModelParams, hyper: Hyper, seed: u64) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            seed,
            hyper,
            params,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        Ok(ck)
    }
}
