//! Joint model: skip-gram embeddings trained on label-aware walk contexts and
//! a supervised classifier over node features plus embeddings.

mod loss;
mod params;
mod train;

pub use loss::{
    log_sigmoid, predict, predict_node, sigmoid, sup_grad_step, sup_gradients, sup_loss,
    unsup_grad_step, unsup_gradients, unsup_loss, SupGrads, UnsupGrads,
};
pub use params::{init_params, node_inputs, Activation, Dense, Hyper, ModelParams};
pub use train::{
    format_embeddings, parse_embeddings, train, Checkpoint, LossRecord, Phase, TrainReport,
    TrainSetup, CHECKPOINT_FORMAT, CHECKPOINT_VERSION,
};
