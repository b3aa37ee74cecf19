use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, SparseFeatures};
use crate::rng::Streams;

/// Fully connected layer `y = W a + b`, `W` stored row-major (`outputs x inputs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Layer input as `(index, value)` nonzeros; dense activations list every entry.
pub type Activation = Vec<(usize, f64)>;

impl Dense {
    fn random<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| rng.gen_range(-bound..bound))
                .collect(),
            bias: vec![0.0; outputs],
        }
    }

    pub fn forward(&self, input: &[(usize, f64)]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for (o, y) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *y += input.iter().map(|&(j, a)| row[j] * a).sum::<f64>();
        }
        out
    }

    /// Accumulates parameter gradients for `grad_out` and returns the gradient
    /// with respect to inputs `from..inputs` (empty when `from == inputs`).
    pub fn backward(
        &self,
        input: &[(usize, f64)],
        grad_out: &[f64],
        grads: &mut Dense,
        from: usize,
    ) -> Vec<f64> {
        let mut grad_in = vec![0.0; self.inputs - from];
        for (o, &g) in grad_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grads.bias[o] += g;
            let base = o * self.inputs;
            for &(j, a) in input {
                grads.weights[base + j] += g * a;
            }
            if from < self.inputs {
                let row = &self.weights[base + from..base + self.inputs];
                for (gi, &w) in grad_in.iter_mut().zip(row) {
                    *gi += g * w;
                }
            }
        }
        grad_in
    }

    pub fn zeros_like(&self) -> Dense {
        Dense {
            inputs: self.inputs,
            outputs: self.outputs,
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.bias.len()],
        }
    }

    pub(crate) fn axpy(&mut self, scale: f64, other: &Dense) {
        for (w, g) in self.weights.iter_mut().zip(&other.weights) {
            *w += scale * g;
        }
        for (b, g) in self.bias.iter_mut().zip(&other.bias) {
            *b += scale * g;
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|x| x.is_finite())
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyper {
    /// Weight of the graph-context loss.
    pub lambda: f64,
    pub lr_unsup: f64,
    pub lr_sup: f64,
    pub dim: usize,
    /// Negatives per positive pair.
    pub negatives: usize,
    pub neg_exponent: f64,
    pub iters_unsup: usize,
    pub iters_sup: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub feature_layers: usize,
    pub embedding_layers: usize,
    /// 1 runs the two phases once each; more interleaves them in that many rounds.
    pub rounds: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            lr_unsup: 0.025,
            lr_sup: 0.025,
            dim: 50,
            negatives: 10,
            neg_exponent: 0.75,
            iters_unsup: 2000,
            iters_sup: 1000,
            batch_size: 256,
            hidden: 50,
            feature_layers: 1,
            embedding_layers: 1,
            rounds: 1,
        }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        if self.dim == 0 {
            return bad("embedding dimension must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be a finite non-negative number");
        }
        if !(self.lr_unsup >= 0.0 && self.lr_sup >= 0.0) {
            return bad("learning rates must be non-negative");
        }
        if self.negatives == 0 {
            return bad("need at least one negative sample");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.hidden == 0 && (self.feature_layers > 0 || self.embedding_layers > 0) {
            return bad("hidden size must be at least 1");
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1");
        }
        if !(self.neg_exponent >= 0.0) {
            return bad("negative-sampling exponent must be >= 0");
        }
        Ok(())
    }
}

/// All trainable state: node embeddings, context vectors and the two
/// feed-forward heads feeding the softmax output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub dim: usize,
    pub feature_dim: usize,
    pub classes: usize,
    /// `n x dim`, row-major.
    pub embeddings: Vec<f64>,
    /// `n x dim`, row-major.
    pub context: Vec<f64>,
    pub feature_head: Vec<Dense>,
    pub embedding_head: Vec<Dense>,
    pub out: Dense,
}

/// Model input features: the graph's own, or one-hot node ids when it has none.
pub fn node_inputs(graph: &AttributedGraph) -> SparseFeatures {
    graph
        .features()
        .cloned()
        .unwrap_or_else(|| SparseFeatures::identity(graph.n()))
}

/// Fresh parameters: embeddings uniform in `[-0.5/dim, 0.5/dim]`, context
/// vectors zero, head weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`,
/// biases zero.
pub fn init_params(
    n: usize,
    feature_dim: usize,
    classes: usize,
    hyper: &Hyper,
    seed: u64,
) -> Result<ModelParams> {
    let Hyper {
        dim,
        hidden,
        feature_layers,
        embedding_layers,
        ..
    } = *hyper;
    if n == 0 || feature_dim == 0 || dim == 0 || classes == 0 {
        return Err(Error::invalid("model dimensions must be at least 1"));
    }
    if hidden == 0 && feature_layers + embedding_layers > 0 {
        return Err(Error::invalid("hidden size must be at least 1"));
    }
    let streams = Streams::new(seed);
    let mut rng = streams.stream("init");
    let half = 0.5 / dim as f64;
    let embeddings = (0..n * dim).map(|_| rng.gen_range(-half..half)).collect();
    let mut stack = |input: usize, layers: usize| {
        let mut dims = input;
        (0..layers)
            .map(|_| {
                let l = Dense::random(dims, hidden, &mut rng);
                dims = hidden;
                l
            })
            .collect::<Vec<_>>()
    };
    let feature_head = stack(feature_dim, feature_layers);
    let embedding_head = stack(dim, embedding_layers);
    let fx = if feature_layers > 0 {
        hidden
    } else {
        feature_dim
    };
    let fe = if embedding_layers > 0 { hidden } else { dim };
    let out = Dense::random(fx + fe, classes, &mut rng);
    Ok(ModelParams {
        n,
        dim,
        feature_dim,
        classes,
        embeddings,
        context: vec![0.0; n * dim],
        feature_head,
        embedding_head,
        out,
    })
}

impl ModelParams {
    pub fn embedding(&self, v: usize) -> &[f64] {
        &self.embeddings[v * self.dim..(v + 1) * self.dim]
    }

    pub fn context_vec(&self, v: usize) -> &[f64] {
        &self.context[v * self.dim..(v + 1) * self.dim]
    }

    pub(crate) fn embedding_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.embeddings[v * self.dim..(v + 1) * self.dim]
    }

    pub(crate) fn context_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.context[v * self.dim..(v + 1) * self.dim]
    }

    /// Width of the concatenated head outputs feeding `out`.
    pub fn feature_head_width(&self) -> usize {
        self.feature_head
            .last()
            .map_or(self.feature_dim, |l| l.outputs)
    }

    pub fn is_finite(&self) -> bool {
        self.embeddings
            .iter()
            .chain(&self.context)
            .all(|x| x.is_finite())
            && self.feature_head.iter().all(Dense::is_finite)
            && self.embedding_head.iter().all(Dense::is_finite)
            && self.out.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn init_params(
        n: usize,
        f: usize,
        dim: usize,
        classes: usize,
        hidden: usize,
        fl: usize,
        el: usize,
        seed: u64,
    ) -> Result<ModelParams> {
        let hyper = Hyper {
            dim,
            hidden,
            feature_layers: fl,
            embedding_layers: el,
            ..Hyper::default()
        };
        super::init_params(n, f, classes, &hyper, seed)
    }

    #[test]
    fn deterministic_init() {
        let a = init_params(10, 7, 4, 3, 5, 1, 1, 42).unwrap();
        let b = init_params(10, 7, 4, 3, 5, 1, 1, 42).unwrap();
        assert_eq!(a, b);
        let c = init_params(10, 7, 4, 3, 5, 1, 1, 43).unwrap();
        assert_ne!(a.embeddings, c.embeddings);
    }

    #[test]
    fn init_ranges() {
        let p = init_params(20, 6, 8, 2, 5, 1, 1, 1).unwrap();
        assert!(p.embeddings.iter().all(|x| x.abs() <= 0.5 / 8.0));
        assert!(p.context.iter().all(|&x| x == 0.0));
        let b = 1.0 / 6f64.sqrt();
        assert!(p.feature_head[0].weights.iter().all(|x| x.abs() <= b));
        assert!(p.feature_head[0].bias.iter().all(|&x| x == 0.0));
        assert_eq!(p.out.inputs, 10);
    }

    #[test]
    fn zero_depth_heads_pass_through() {
        let p = init_params(5, 7, 4, 3, 5, 0, 0, 1).unwrap();
        assert!(p.feature_head.is_empty() && p.embedding_head.is_empty());
        assert_eq!(p.out.inputs, 7 + 4);
    }

    #[test]
    fn dense_backward_matches_definition() {
        let l = Dense {
            inputs: 3,
            outputs: 2,
            weights: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            bias: vec![0.5, -0.5],
        };
        let x = vec![(0, 1.0), (2, -1.0)];
        assert_eq!(l.forward(&x), vec![1.0 - 3.0 + 0.5, 4.0 - 6.0 - 0.5]);
        let mut g = l.zeros_like();
        let gi = l.backward(&x, &[1.0, 2.0], &mut g, 1);
        assert_eq!(gi, vec![2.0 + 10.0, 3.0 + 12.0]);
        assert_eq!(g.weights, vec![1.0, 0.0, -1.0, 2.0, 0.0, -2.0]);
        assert_eq!(g.bias, vec![1.0, 2.0]);
    }
}
