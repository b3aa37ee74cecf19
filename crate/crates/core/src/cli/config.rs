use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{CountScope, Framework, LogRegConfig, SplitSpec, Variant};
use crate::graph::{
    karate_fixture, load_edge_list, load_planetoid_format, make_imbalanced_split,
    planted_partition, AttributedGraph, LabeledSplit,
};
use crate::model::Hyper;
use crate::rng::Streams;
use crate::sampling::ContextConfig;
use crate::walk::VisitingFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetConfig {
    /// Whitespace edge list, optionally with a `node label` file.
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        directed: bool,
        #[serde(default)]
        weighted: bool,
        labels: Option<PathBuf>,
    },
    /// `ind.<name>.*` files in `dir`.
    Planetoid {
        dir: PathBuf,
        name: String,
    },
    Karate,
    Synth {
        n_per_class: Vec<usize>,
        p_in: f64,
        p_out: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContextSection {
    pub jump_prob: f64,
    pub walk_length: usize,
    pub window: usize,
}

impl Default for ContextSection {
    fn default() -> Self {
        let c = ContextConfig::default();
        Self {
            jump_prob: c.jump_prob,
            walk_length: c.walk_length,
            window: c.window,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkStatsSection {
    pub length: usize,
    pub repeats: usize,
    pub trace_length: usize,
    pub trace_interval: usize,
    pub trace_start: usize,
    pub count_scope: CountScope,
    /// Exponent for the exponential variant of the purity table.
    pub alpha: f64,
}

impl Default for WalkStatsSection {
    fn default() -> Self {
        Self {
            length: 10,
            repeats: 100,
            trace_length: 2000,
            trace_interval: 100,
            trace_start: 0,
            count_scope: CountScope::Persistent,
            alpha: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Extra embedding-plus-logistic-regression variants to compare against.
    pub baselines: Vec<Variant>,
    pub logreg: LogRegConfig,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            baselines: vec![Variant::constant_baseline()],
            logreg: LogRegConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Imbalance ratios `n_min / n_maj`; `n_maj` comes from `[split]`.
    pub ratios: Vec<f64>,
    /// `(alpha, jump_prob)` points for the label-aware model.
    pub grid: Vec<(f64, f64)>,
    pub seeds: usize,
    /// Variants for the ratio sweep; empty means the model plus the baselines in `[eval]`.
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub split: Option<SplitSpec>,
    #[serde(default = "default_walker")]
    pub walker: VisitingFunction,
    #[serde(default)]
    pub context: ContextSection,
    #[serde(default)]
    pub model: Hyper,
    #[serde(default)]
    pub walk_stats: WalkStatsSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

fn default_walker() -> VisitingFunction {
    ContextConfig::default().visiting
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Missing {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn context(&self) -> ContextConfig {
        ContextConfig {
            jump_prob: self.context.jump_prob,
            walk_length: self.context.walk_length,
            window: self.context.window,
            visiting: self.walker,
        }
    }

    /// The label-aware model as configured.
    pub fn main_variant(&self) -> Variant {
        Variant {
            name: "vdrw-imverde".into(),
            framework: Framework::Imverde,
            visiting: self.walker,
            jump_prob: self.context.jump_prob,
        }
    }

    /// Checks every section that does not need the dataset itself.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Invalid(m) => Error::Config(m),
            other => other,
        };
        self.walker.validate().map_err(wrap)?;
        self.context().validate().map_err(wrap)?;
        self.model.validate().map_err(wrap)?;
        match &self.dataset {
            DatasetConfig::Synth {
                n_per_class,
                p_in,
                p_out,
            } => {
                if n_per_class.is_empty() || n_per_class.contains(&0) {
                    return Err(config_err("synth classes must be non-empty"));
                }
                if !(0.0 <= *p_out && p_out < p_in && *p_in <= 1.0) {
                    return Err(config_err("synth needs 0 <= p_out < p_in <= 1"));
                }
            }
            DatasetConfig::Planetoid { name, .. } if name.is_empty() => {
                return Err(config_err("planetoid dataset name is empty"));
            }
            _ => {}
        }
        let ws = &self.walk_stats;
        if ws.length == 0 || ws.repeats == 0 {
            return Err(config_err(
                "walk_stats length and repeats must be at least 1",
            ));
        }
        if ws.trace_interval == 0 || ws.trace_length < 2 * ws.trace_interval {
            return Err(config_err(format!(
                "walk_stats needs trace_length >= 2 * trace_interval (got {} and {})",
                ws.trace_length, ws.trace_interval
            )));
        }
        VisitingFunction::exponential(ws.alpha).map_err(wrap)?;
        let lr = &self.eval.logreg;
        if !(lr.l2 >= 0.0 && lr.tol > 0.0 && lr.max_iter > 0) {
            return Err(config_err("logreg needs l2 >= 0, tol > 0, max_iter >= 1"));
        }
        for v in self.eval.baselines.iter().chain(&self.sweep.variants) {
            v.visiting.validate().map_err(wrap)?;
            if !(0.0..=1.0).contains(&v.jump_prob) {
                return Err(config_err(format!(
                    "variant {} jump_prob outside [0, 1]",
                    v.name
                )));
            }
        }
        if let Some(r) = self.sweep.ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(config_err(format!("sweep ratio {r} outside (0, 1]")));
        }
        for &(a, r) in &self.sweep.grid {
            VisitingFunction::exponential(a).map_err(wrap)?;
            if !(0.0..=1.0).contains(&r) {
                return Err(config_err(format!("sweep jump_prob {r} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Loads or generates the graph. Planetoid data also yields its canonical split.
    pub fn load_dataset(
        &self,
        streams: &Streams,
    ) -> Result<(AttributedGraph, Option<LabeledSplit>)> {
        match &self.dataset {
            DatasetConfig::Karate => Ok((karate_fixture(), None)),
            DatasetConfig::Synth {
                n_per_class,
                p_in,
                p_out,
            } => Ok((
                planted_partition(n_per_class, *p_in, *p_out, &mut streams.stream("graph"))?,
                None,
            )),
            DatasetConfig::Planetoid { dir, name } => {
                let (g, split) = load_planetoid_format(dir, name)?;
                Ok((g, Some(split)))
            }
            DatasetConfig::EdgeList {
                path,
                directed,
                weighted,
                labels,
            } => {
                let g = load_edge_list(path, *directed, *weighted)?;
                let g = match labels {
                    Some(p) => {
                        let labels = load_labels(p, g.n())?;
                        let classes = labels.iter().flatten().max().map_or(0, |c| c + 1);
                        g.with_labels(labels, classes)?
                    }
                    None => g,
                };
                Ok((g, None))
            }
        }
    }

    pub fn dataset_name(&self) -> String {
        match &self.dataset {
            DatasetConfig::Karate => "karate".into(),
            DatasetConfig::Synth { .. } => "synth".into(),
            DatasetConfig::Planetoid { name, .. } => name.clone(),
            DatasetConfig::EdgeList { path, .. } => path
                .file_stem()
                .map_or_else(|| "edge-list".into(), |s| s.to_string_lossy().into_owned()),
        }
    }

    /// The configured split, or the dataset's canonical one when `[split]` is absent.
    pub fn make_split(
        &self,
        graph: &AttributedGraph,
        canonical: Option<LabeledSplit>,
        streams: &Streams,
    ) -> Result<LabeledSplit> {
        match (self.split, canonical) {
            (Some(s), _) => make_imbalanced_split(
                graph,
                s.minority_class,
                s.n_min,
                s.n_maj,
                s.n_test,
                &mut streams.stream("split"),
            ),
            (None, Some(c)) => Ok(c),
            (None, None) => Err(config_err("this command needs a [split] section")),
        }
    }
}

/// `node label` per line; nodes not listed stay unlabeled.
pub fn load_labels(path: &Path, n: usize) -> Result<Vec<Option<usize>>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Missing {
        path: path.to_path_buf(),
        source,
    })?;
    let mut labels = vec![None; n];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(err("expected `node label`".into()));
        };
        let v: usize = a.parse().map_err(|e| err(format!("bad node: {e}")))?;
        let c: usize = b.parse().map_err(|e| err(format!("bad label: {e}")))?;
        if v >= n {
            return Err(err(format!("node {v} not in graph of {n} nodes")));
        }
        labels[v] = Some(c);
    }
    Ok(labels)
}
