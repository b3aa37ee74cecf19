use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logreg::{logreg_eval, LogRegConfig};
use super::metrics::{average_precision, multiclass_accuracy, roc_auc, RocPoint};
use crate::error::{Error, Result};
use crate::graph::{
    build_transition, make_imbalanced_split, AttributedGraph, LabeledSplit, TransitionMatrix,
};
use crate::model::{node_inputs, predict_node, train, Hyper, ModelParams, TrainReport, TrainSetup};
use crate::rng::Streams;
use crate::sampling::{build_negative_sampler, ContextConfig};
use crate::walk::{path_class_purity, walk_from_state, VisitState, VisitingFunction};

/// Whether visit counts restart for every walk or accumulate across all
/// walks of one variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountScope {
    PerWalk,
    #[default]
    Persistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityRow {
    pub variant: String,
    pub class: usize,
    pub mean_purity: f64,
    pub walks: usize,
}

/// Mean path purity per `(variant, start class)`.
///
/// Each variant runs `repeats` rounds of one walk of `length` steps from
/// every node in index order. All variants consume the same random stream,
/// so they are compared on common random numbers.
pub fn purity_study(
    r: &TransitionMatrix,
    labels: &[Option<usize>],
    variants: &[VisitingFunction],
    length: usize,
    repeats: usize,
    scope: CountScope,
    streams: &Streams,
) -> Result<Vec<PurityRow>> {
    if labels.len() != r.n() {
        return Err(Error::invalid("label vector does not match the graph"));
    }
    if let Some(v) = labels.iter().position(Option::is_none) {
        return Err(Error::invalid(format!("start node {v} is unlabeled")));
    }
    let classes = labels.iter().flatten().max().map_or(0, |c| c + 1);
    let mut rows = Vec::with_capacity(variants.len() * classes);
    for f in variants {
        f.validate()?;
        let mut rng = streams.stream("purity");
        let mut sums = vec![0.0; classes];
        let mut counts = vec![0usize; classes];
        let mut shared = VisitState::from_counts(vec![0; r.n()], 0);
        let mut path = Vec::with_capacity(length + 1);
        for _ in 0..repeats {
            for start in 0..r.n() {
                let mut fresh;
                let state = match scope {
                    CountScope::PerWalk => {
                        fresh = VisitState::new(r.n(), start);
                        &mut fresh
                    }
                    CountScope::Persistent => {
                        shared.record_visit(start);
                        &mut shared
                    }
                };
                path.clear();
                path.push(start);
                walk_from_state(r, f, state, length, &mut path, &mut rng);
                let c = labels[start].unwrap();
                sums[c] += path_class_purity(&path, labels)?;
                counts[c] += 1;
            }
        }
        for c in 0..classes {
            rows.push(PurityRow {
                variant: variant_name(f),
                class: c,
                mean_purity: if counts[c] == 0 {
                    f64::NAN
                } else {
                    sums[c] / counts[c] as f64
                },
                walks: counts[c],
            });
        }
    }
    Ok(rows)
}

pub fn variant_name(f: &VisitingFunction) -> String {
    match f {
        VisitingFunction::Exponential { alpha } => format!("exponential({alpha})"),
        other => other.name().to_string(),
    }
}

pub fn purity_csv(rows: &[PurityRow]) -> String {
    let mut out = String::from("variant,class,mean_purity,walks\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.variant, r.class, r.mean_purity, r.walks
        ));
    }
    out
}

pub fn trace_csv(trace: &[(usize, f64)]) -> String {
    let mut out = String::from("t,difference\n");
    for (t, d) in trace {
        out.push_str(&format!("{t},{d}\n"));
    }
    out
}

/// How a variant turns a graph and split into minority-class scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Framework {
    /// Full two-phase model; scores are the classifier's minority probability.
    Imverde,
    /// Unsupervised embeddings only, scored by logistic regression.
    EmbeddingLogreg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    pub framework: Framework,
    pub visiting: VisitingFunction,
    pub jump_prob: f64,
}

impl Variant {
    /// The label-aware, vertex-diminished model.
    pub fn vdrw_imverde(alpha: f64, jump_prob: f64) -> Self {
        Self {
            name: "vdrw-imverde".into(),
            framework: Framework::Imverde,
            visiting: VisitingFunction::Exponential { alpha },
            jump_prob,
        }
    }

    /// Plain random-walk skip-gram embeddings plus logistic regression.
    pub fn constant_baseline() -> Self {
        Self {
            name: "constant-rw-baseline".into(),
            framework: Framework::EmbeddingLogreg,
            visiting: VisitingFunction::Constant,
            jump_prob: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub dataset: String,
    pub variant: String,
    pub seed: u64,
    pub auc: f64,
    pub ap: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct VariantRun {
    pub params: ModelParams,
    pub report: TrainReport,
    pub scored: Vec<(f64, bool)>,
    pub predictions: Vec<(usize, usize)>,
}

impl VariantRun {
    pub fn metrics(&self, dataset: &str, variant: &str, seed: u64) -> Result<Metrics> {
        Ok(Metrics {
            dataset: dataset.into(),
            variant: variant.into(),
            seed,
            auc: roc_auc(&self.scored)?.auc,
            ap: average_precision(&self.scored)?,
            accuracy: multiclass_accuracy(&self.predictions)?,
        })
    }

    pub fn roc(&self) -> Result<Vec<RocPoint>> {
        Ok(roc_auc(&self.scored)?.curve)
    }
}

/// Shared inputs for training and scoring variants.
#[derive(Debug, Clone)]
pub struct EvalSetup<'a> {
    pub context: &'a ContextConfig,
    pub hyper: &'a Hyper,
    pub logreg: &'a LogRegConfig,
    pub parallel: bool,
}

/// Trains `variant` on `split` and scores the test nodes.
pub fn run_variant(
    graph: &AttributedGraph,
    split: &LabeledSplit,
    variant: &Variant,
    setup: &EvalSetup<'_>,
    streams: Streams,
) -> Result<VariantRun> {
    let r = build_transition(graph);
    let context = ContextConfig {
        jump_prob: variant.jump_prob,
        visiting: variant.visiting,
        ..*setup.context
    };
    let mut hyper = setup.hyper.clone();
    if variant.framework == Framework::EmbeddingLogreg {
        hyper.iters_sup = 0;
    }
    let sampler = build_negative_sampler(graph, hyper.neg_exponent, hyper.negatives)?;
    let ts = TrainSetup {
        transition: &r,
        context: &context,
        sampler: &sampler,
        hyper: &hyper,
        streams,
        parallel: setup.parallel,
    };
    let (params, report) = train(graph, split, &ts)?;
    if let Some(msg) = &report.aborted {
        return Err(Error::NonFinite {
            phase: "training",
            iteration: report.losses.len(),
            msg: msg.clone(),
        });
    }
    let labels = graph.labels();
    let (scored, predictions) = match variant.framework {
        Framework::Imverde => {
            let inputs = node_inputs(graph);
            let mut scored = Vec::with_capacity(split.test.len());
            let mut predictions = Vec::with_capacity(split.test.len());
            for &v in &split.test {
                let p = predict_node(&params, &inputs, v);
                let truth =
                    labels[v].ok_or_else(|| Error::invalid(format!("test node {v} unlabeled")))?;
                let best = (0..p.len()).fold(0, |b, k| if p[k] > p[b] { k } else { b });
                scored.push((p[split.minority_class], truth == split.minority_class));
                predictions.push((best, truth));
            }
            (scored, predictions)
        }
        Framework::EmbeddingLogreg => {
            let emb: Vec<Vec<f64>> = (0..params.n)
                .map(|v| params.embedding(v).to_vec())
                .collect();
            let out = logreg_eval(&emb, labels, split, setup.logreg)?;
            (out.scored, out.predictions)
        }
    };
    Ok(VariantRun {
        params,
        report,
        scored,
        predictions,
    })
}

/// Split sizes for one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub minority_class: usize,
    pub n_min: usize,
    pub n_maj: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub alpha: Option<f64>,
    pub jump_prob: Option<f64>,
    pub metrics: Metrics,
}

fn sweep_point(
    graph: &AttributedGraph,
    dataset: &str,
    spec: SplitSpec,
    variant: &Variant,
    setup: &EvalSetup<'_>,
    seed: u64,
) -> Result<Metrics> {
    let seed_streams = Streams::new(seed);
    let split = make_imbalanced_split(
        graph,
        spec.minority_class,
        spec.n_min,
        spec.n_maj,
        spec.n_test,
        &mut seed_streams.stream("split"),
    )?;
    let run = run_variant(
        graph,
        &split,
        variant,
        setup,
        seed_streams.child("train", 0),
    )?;
    run.metrics(dataset, &variant.name, seed)
}

/// AP per `(ratio, variant, seed)`. Each ratio keeps `n_maj` and sets
/// `n_min = round(ratio * n_maj)` (at least 1). Seeds run from `base_seed`
/// upwards and derive split and training streams exactly as a single
/// training run with that root seed would.
pub fn imbalance_sweep(
    graph: &AttributedGraph,
    dataset: &str,
    base: SplitSpec,
    ratios: &[f64],
    variants: &[Variant],
    seeds: usize,
    setup: &EvalSetup<'_>,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if ratios.is_empty() || variants.is_empty() || seeds == 0 {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if let Some(r) = ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::Config(format!("imbalance ratio {r} outside (0, 1]")));
    }
    let mut jobs = Vec::new();
    for &ratio in ratios {
        let spec = SplitSpec {
            n_min: ((ratio * base.n_maj as f64).round() as usize).max(1),
            ..base
        };
        for v in variants {
            for s in 0..seeds {
                jobs.push((ratio, spec, v, s as u64));
            }
        }
    }
    let eval = |&(ratio, spec, v, s): &(f64, SplitSpec, &Variant, u64)| {
        sweep_point(graph, dataset, spec, v, setup, base_seed.wrapping_add(s)).map(|metrics| {
            SweepRow {
                ratio,
                alpha: None,
                jump_prob: None,
                metrics,
            }
        })
    };
    if setup.parallel {
        jobs.par_iter().map(eval).collect()
    } else {
        jobs.iter().map(eval).collect()
    }
}

/// AP of the label-aware model over an `(alpha, jump_prob)` grid, seeded as
/// in [`imbalance_sweep`].
pub fn parameter_sweep(
    graph: &AttributedGraph,
    dataset: &str,
    spec: SplitSpec,
    grid: &[(f64, f64)],
    seeds: usize,
    setup: &EvalSetup<'_>,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() || seeds == 0 {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let ratio = spec.n_min as f64 / spec.n_maj as f64;
    let jobs: Vec<(f64, f64, u64)> = grid
        .iter()
        .flat_map(|&(a, r)| (0..seeds as u64).map(move |s| (a, r, s)))
        .collect();
    let eval = |&(alpha, r, s): &(f64, f64, u64)| {
        let v = Variant::vdrw_imverde(alpha, r);
        VisitingFunction::exponential(alpha)?;
        sweep_point(graph, dataset, spec, &v, setup, base_seed.wrapping_add(s)).map(|metrics| {
            SweepRow {
                ratio,
                alpha: Some(alpha),
                jump_prob: Some(r),
                metrics,
            }
        })
    };
    if setup.parallel {
        jobs.par_iter().map(eval).collect()
    } else {
        jobs.iter().map(eval).collect()
    }
}

/// Per-row CSV followed by nothing else; aggregate with [`aggregate_csv`].
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("ratio,alpha,jump_prob,variant,seed,auc,ap,accuracy\n");
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for r in rows {
        let m = &r.metrics;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.ratio,
            opt(r.alpha),
            opt(r.jump_prob),
            m.variant,
            m.seed,
            m.auc,
            m.ap,
            m.accuracy
        ));
    }
    out
}

/// Mean AUC/AP/accuracy per grid point and variant, in first-seen order.
pub fn aggregate_csv(rows: &[SweepRow]) -> String {
    type Key = (String, String, String, String);
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let mut keys: Vec<Key> = Vec::new();
    let mut acc: Vec<(f64, f64, f64, usize)> = Vec::new();
    for r in rows {
        let key = (
            r.ratio.to_string(),
            opt(r.alpha),
            opt(r.jump_prob),
            r.metrics.variant.clone(),
        );
        let i = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key);
            acc.push((0.0, 0.0, 0.0, 0));
            keys.len() - 1
        });
        acc[i].0 += r.metrics.auc;
        acc[i].1 += r.metrics.ap;
        acc[i].2 += r.metrics.accuracy;
        acc[i].3 += 1;
    }
    let mut out =
        String::from("ratio,alpha,jump_prob,variant,seeds,mean_auc,mean_ap,mean_accuracy\n");
    for (k, (auc, ap, accu, n)) in keys.iter().zip(acc) {
        let n_f = n as f64;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            k.0,
            k.1,
            k.2,
            k.3,
            n,
            auc / n_f,
            ap / n_f,
            accu / n_f
        ));
    }
    out
}
