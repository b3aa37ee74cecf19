#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

//! Node embeddings for class-imbalanced graphs.
//!
//! Context pairs are drawn from vertex-diminished random walks (the step
//! weight toward a node shrinks each time it is visited) with jumps between
//! same-labeled nodes, batches are class-balanced, and a skip-gram objective
//! is trained jointly with a supervised head.

pub mod cli;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod walk;

pub use error::{Error, Result};
