//! Experiment commands behind the `imverde` binary.

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{
    load_labels, ContextSection, DatasetConfig, EvalSection, ExperimentConfig, SweepSection,
    WalkStatsSection,
};

use crate::error::{Error, Result};
use crate::eval::{
    aggregate_csv, imbalance_sweep, parameter_sweep, purity_csv, purity_study, roc_csv,
    run_variant, sweep_csv, trace_csv, EvalSetup, Metrics, SplitSpec, Variant, VariantRun,
};
use crate::graph::{build_transition, AttributedGraph, LabeledSplit};
use crate::model::{format_embeddings, node_inputs, predict_node, train, Checkpoint, TrainSetup};
use crate::rng::Streams;
use crate::sampling::build_negative_sampler;
use crate::walk::{dynamics::convergence_trace, VisitingFunction};

#[derive(Debug, Parser)]
#[command(
    name = "imverde",
    version,
    about = "Label-aware vertex-diminished walks for imbalanced node classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Path purity table and convergence trace.
    WalkStats(RunArgs),
    /// Train the model and export embeddings, checkpoint and loss report.
    Train(RunArgs),
    /// Score a trained checkpoint and the configured baselines.
    Eval(RunArgs),
    /// Imbalance-ratio or (alpha, r) sweep.
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Run everything on the calling thread.
    #[arg(long)]
    pub deterministic: bool,
}

/// Resolved options shared by all commands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub out: PathBuf,
    pub parallel: bool,
    /// SHA-256 of the config text, for the manifest.
    pub config_sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: &'a str,
    seed: u64,
    artifacts: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects written files so the manifest can checksum them.
struct Outputs<'a> {
    opts: &'a RunOptions,
    written: BTreeMap<String, String>,
}

impl<'a> Outputs<'a> {
    fn new(opts: &'a RunOptions) -> Result<Self> {
        fs::create_dir_all(&opts.out)?;
        Ok(Self {
            opts,
            written: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.opts.out.join(name);
        fs::write(&path, contents)?;
        self.written
            .insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(path)
    }

    fn finish(mut self, command: &str) -> Result<Vec<PathBuf>> {
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: &self.opts.config_sha256,
            seed: self.opts.seed,
            artifacts: self.written.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.opts.out.join(format!("{command}_manifest.json"));
        fs::write(&path, text)?;
        let mut paths: Vec<PathBuf> = self.written.keys().map(|k| self.opts.out.join(k)).collect();
        paths.push(path);
        self.written.clear();
        Ok(paths)
    }
}

/// Purity table over constant, linear and exponential weighting, plus the
/// convergence trace of one long exponential walk.
pub fn cmd_walk_stats(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let streams = Streams::new(opts.seed);
    let (graph, _) = cfg.load_dataset(&streams)?;
    let ws = &cfg.walk_stats;
    if ws.trace_start >= graph.n() {
        return Err(Error::Config(format!(
            "trace_start {} is not a node",
            ws.trace_start
        )));
    }
    let r = build_transition(&graph);
    let variants = [
        VisitingFunction::Constant,
        VisitingFunction::Linear,
        VisitingFunction::exponential(ws.alpha)?,
    ];
    let rows = purity_study(
        &r,
        graph.labels(),
        &variants,
        ws.length,
        ws.repeats,
        ws.count_scope,
        &streams.child("walk-stats", 0),
    )?;
    let trace = convergence_trace(
        &r,
        &variants[2],
        ws.trace_start,
        ws.trace_length,
        ws.trace_interval,
        &mut streams.stream("trace"),
    )?;
    let mut out = Outputs::new(opts)?;
    out.write("purity.csv", &purity_csv(&rows))?;
    out.write("trace.csv", &trace_csv(&trace))?;
    out.finish("walk-stats")
}

fn prepare(cfg: &ExperimentConfig, streams: &Streams) -> Result<(AttributedGraph, LabeledSplit)> {
    let (graph, canonical) = cfg.load_dataset(streams)?;
    let split = cfg.make_split(&graph, canonical, streams)?;
    Ok((graph, split))
}

/// Trains the model. On a numeric abort the partial report is still written
/// and the error is returned afterwards.
pub fn cmd_train(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let streams = Streams::new(opts.seed);
    let (graph, split) = prepare(cfg, &streams)?;
    let r = build_transition(&graph);
    let context = cfg.context();
    let sampler = build_negative_sampler(&graph, cfg.model.neg_exponent, cfg.model.negatives)?;
    let setup = TrainSetup {
        transition: &r,
        context: &context,
        sampler: &sampler,
        hyper: &cfg.model,
        streams: streams.child("train", 0),
        parallel: opts.parallel,
    };
    let (params, report) = train(&graph, &split, &setup)?;
    let mut out = Outputs::new(opts)?;
    out.write("train_report.jsonl", &report.to_json_lines())?;
    if let Some(msg) = report.aborted {
        out.finish("train")?;
        return Err(Error::NonFinite {
            phase: "training",
            iteration: report.losses.len(),
            msg,
        });
    }
    out.write("embeddings.txt", &format_embeddings(&params))?;
    let ck = Checkpoint::new(params, cfg.model.clone(), opts.seed);
    out.write("model.json", &(serde_json::to_string(&ck)? + "\n"))?;
    out.write("split.json", &(serde_json::to_string(&split)? + "\n"))?;
    out.finish("train")
}

fn metrics_json(rows: &[Metrics]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}

/// Scores `<out>/model.json` on the test split and runs the configured
/// embedding baselines on the same split.
pub fn cmd_eval(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let ck_path = opts.out.join("model.json");
    let text = fs::read_to_string(&ck_path).map_err(|source| Error::Missing {
        path: ck_path.clone(),
        source,
    })?;
    let ck = Checkpoint::from_json(&text)?;
    let streams = Streams::new(opts.seed);
    let (graph, split) = prepare(cfg, &streams)?;
    if ck.params.n != graph.n() {
        return Err(Error::invalid(format!(
            "checkpoint has {} nodes, dataset has {}",
            ck.params.n,
            graph.n()
        )));
    }
    let inputs = node_inputs(&graph);
    let mut scored = Vec::new();
    let mut predictions = Vec::new();
    for &v in &split.test {
        let p = predict_node(&ck.params, &inputs, v);
        let truth = graph
            .label(v)
            .ok_or_else(|| Error::invalid(format!("test node {v} unlabeled")))?;
        let best = (0..p.len()).fold(0, |b, k| if p[k] > p[b] { k } else { b });
        scored.push((p[split.minority_class], truth == split.minority_class));
        predictions.push((best, truth));
    }
    let main = VariantRun {
        params: ck.params,
        report: Default::default(),
        scored,
        predictions,
    };
    let dataset = cfg.dataset_name();
    let context = cfg.context();
    let setup = EvalSetup {
        context: &context,
        hyper: &cfg.model,
        logreg: &cfg.eval.logreg,
        parallel: opts.parallel,
    };
    let mut rows = vec![main.metrics(&dataset, &cfg.main_variant().name, opts.seed)?];
    let mut out = Outputs::new(opts)?;
    out.write(
        &format!("roc_{}.csv", cfg.main_variant().name),
        &roc_csv(&main.roc()?),
    )?;
    for v in &cfg.eval.baselines {
        let run = run_variant(&graph, &split, v, &setup, streams.child("train", 0))?;
        rows.push(run.metrics(&dataset, &v.name, opts.seed)?);
        out.write(&format!("roc_{}.csv", v.name), &roc_csv(&run.roc()?))?;
    }
    out.write("metrics.json", &metrics_json(&rows)?)?;
    out.finish("eval")
}

/// Ratio sweep when `sweep.ratios` is set, otherwise the `(alpha, r)` grid.
pub fn cmd_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let sw = &cfg.sweep;
    if sw.ratios.is_empty() == sw.grid.is_empty() {
        return Err(Error::Config(
            "set exactly one of sweep.ratios and sweep.grid".into(),
        ));
    }
    if sw.seeds == 0 {
        return Err(Error::Config("sweep.seeds must be at least 1".into()));
    }
    let spec: SplitSpec = cfg
        .split
        .ok_or_else(|| Error::Config("sweeps need a [split] section".into()))?;
    let streams = Streams::new(opts.seed);
    let (graph, _) = cfg.load_dataset(&streams)?;
    let context = cfg.context();
    let setup = EvalSetup {
        context: &context,
        hyper: &cfg.model,
        logreg: &cfg.eval.logreg,
        parallel: opts.parallel,
    };
    let dataset = cfg.dataset_name();
    let rows = if sw.ratios.is_empty() {
        parameter_sweep(
            &graph, &dataset, spec, &sw.grid, sw.seeds, &setup, opts.seed,
        )?
    } else {
        let variants: Vec<Variant> = if sw.variants.is_empty() {
            std::iter::once(cfg.main_variant())
                .chain(cfg.eval.baselines.iter().cloned())
                .collect()
        } else {
            sw.variants.clone()
        };
        imbalance_sweep(
            &graph, &dataset, spec, &sw.ratios, &variants, sw.seeds, &setup, opts.seed,
        )?
    };
    let mut out = Outputs::new(opts)?;
    out.write("sweep.csv", &sweep_csv(&rows))?;
    out.write("sweep_summary.csv", &aggregate_csv(&rows))?;
    out.finish("sweep")
}

/// Loads the config named in `args` and runs `command`.
pub fn run(command: &Command) -> Result<Vec<PathBuf>> {
    let args = match command {
        Command::WalkStats(a) | Command::Train(a) | Command::Eval(a) | Command::Sweep(a) => a,
    };
    let text = fs::read_to_string(&args.config).map_err(|source| Error::Missing {
        path: args.config.clone(),
        source,
    })?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    let opts = RunOptions {
        seed: args.seed.unwrap_or(cfg.seed),
        out: args.out.clone(),
        parallel: !args.deterministic,
        config_sha256: sha256_hex(text.as_bytes()),
    };
    match command {
        Command::WalkStats(_) => cmd_walk_stats(&cfg, &opts),
        Command::Train(_) => cmd_train(&cfg, &opts),
        Command::Eval(_) => cmd_eval(&cfg, &opts),
        Command::Sweep(_) => cmd_sweep(&cfg, &opts),
    }
}

/// Options for library callers that build configs in code.
pub fn options(
    seed: u64,
    out: &Path,
    parallel: bool,
    cfg: &ExperimentConfig,
) -> Result<RunOptions> {
    let text = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    Ok(RunOptions {
        seed,
        out: out.to_path_buf(),
        parallel,
        config_sha256: sha256_hex(text.as_bytes()),
    })
}
