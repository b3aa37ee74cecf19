//! Ranking and classification metrics, a logistic-regression probe for
//! embeddings, and the experiment drivers built on them.

mod logreg;
mod metrics;
mod studies;

pub use logreg::{logreg_eval, LogReg, LogRegConfig, LogRegEval};
pub use metrics::{average_precision, multiclass_accuracy, roc_auc, roc_csv, Roc, RocPoint};
pub use studies::{
    aggregate_csv, imbalance_sweep, parameter_sweep, purity_csv, purity_study, run_variant,
    sweep_csv, trace_csv, variant_name, CountScope, EvalSetup, Framework, Metrics, PurityRow,
    SplitSpec, SweepRow, Variant, VariantRun,
};
