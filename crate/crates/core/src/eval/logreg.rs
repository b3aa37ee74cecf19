use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabeledSplit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogRegConfig {
    pub l2: f64,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            tol: 1e-6,
            max_iter: 10_000,
        }
    }
}

/// Multinomial logistic regression on standardized inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LogReg {
    /// Original class id of each output.
    pub classes: Vec<usize>,
    dim: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `classes x (dim + 1)`, bias last.
    weights: Vec<f64>,
}

fn softmax_into(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        total += *z;
    }
    logits.iter_mut().for_each(|z| *z /= total);
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    c: usize,
    d: usize,
    l2: f64,
}

impl Problem<'_> {
    fn logits(&self, w: &[f64], row: &[f64], out: &mut [f64]) {
        let stride = self.d + 1;
        for (k, z) in out.iter_mut().enumerate() {
            let wk = &w[k * stride..(k + 1) * stride];
            *z = wk[self.d] + wk.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    fn penalty(&self, w: &[f64]) -> f64 {
        let stride = self.d + 1;
        let sq: f64 = w
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride != self.d)
            .map(|(_, v)| v * v)
            .sum();
        0.5 * self.l2 * sq
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let mut z = vec![0.0; self.c];
        let mut total = 0.0;
        for (row, &y) in self.x.iter().zip(self.y) {
            self.logits(w, row, &mut z);
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
            total += lse - z[y];
        }
        total / self.x.len() as f64 + self.penalty(w)
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let stride = self.d + 1;
        let mut g = vec![0.0; w.len()];
        let mut p = vec![0.0; self.c];
        let inv = 1.0 / self.x.len() as f64;
        for (row, &y) in self.x.iter().zip(self.y) {
            self.logits(w, row, &mut p);
            softmax_into(&mut p);
            p[y] -= 1.0;
            for (k, &pk) in p.iter().enumerate() {
                let gk = &mut g[k * stride..(k + 1) * stride];
                for (gj, &xj) in gk.iter_mut().zip(row) {
                    *gj += pk * xj * inv;
                }
                gk[self.d] += pk * inv;
            }
        }
        for (i, gi) in g.iter_mut().enumerate() {
            if i % stride != self.d {
                *gi += self.l2 * w[i];
            }
        }
        g
    }
}

impl LogReg {
    /// Gradient descent with step halving, so the recorded objective never
    /// increases. Returns the model and the objective after each iteration.
    pub fn fit(x: &[Vec<f64>], y: &[usize], cfg: &LogRegConfig) -> Result<(LogReg, Vec<f64>)> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::invalid(
                "logistic regression needs matching non-empty x and y",
            ));
        }
        let d = x[0].len();
        if x.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged feature rows"));
        }
        let mut classes: Vec<usize> = y.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Degenerate(
                "training set holds a single class".into(),
            ));
        }
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..d)
            .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let scale: Vec<f64> = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let mut model = LogReg {
            classes,
            dim: d,
            mean,
            scale,
            weights: Vec::new(),
        };
        let xs: Vec<Vec<f64>> = x.iter().map(|r| model.standardize(r)).collect();
        let ys: Vec<usize> = y
            .iter()
            .map(|c| model.classes.binary_search(c).unwrap())
            .collect();
        let prob = Problem {
            x: &xs,
            y: &ys,
            c: model.classes.len(),
            d,
            l2: cfg.l2,
        };
        let mut w = vec![0.0; prob.c * (d + 1)];
        let mut loss = prob.loss(&w);
        let mut history = Vec::new();
        let mut step = 1.0;
        for _ in 0..cfg.max_iter {
            let g = prob.gradient(&w);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return Err(Error::NonFinite {
                    phase: "logreg",
                    iteration: history.len(),
                    msg: "gradient is not finite".into(),
                });
            }
            if norm < cfg.tol {
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - step * b).collect();
                let l = prob.loss(&trial);
                if l <= loss {
                    w = trial;
                    loss = l;
                    accepted = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            history.push(loss);
        }
        model.weights = w;
        Ok((model, history))
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    /// Probabilities aligned with [`LogReg::classes`].
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let xs = self.standardize(row);
        let stride = self.dim + 1;
        let mut z: Vec<f64> = (0..self.classes.len())
            .map(|k| {
                let wk = &self.weights[k * stride..(k + 1) * stride];
                wk[self.dim] + wk.iter().zip(&xs).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        softmax_into(&mut z);
        z
    }
}

/// Test-set scores from a classifier fit on labeled training embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegEval {
    /// `(P(minority), is_minority)` for each test node.
    pub scored: Vec<(f64, bool)>,
    /// `(predicted, true)` class for each test node.
    pub predictions: Vec<(usize, usize)>,
    pub losses: Vec<f64>,
}

/// Fits on `split.labeled_train` rows of `embeddings` and scores `split.test`.
pub fn logreg_eval(
    embeddings: &[Vec<f64>],
    labels: &[Option<usize>],
    split: &LabeledSplit,
    cfg: &LogRegConfig,
) -> Result<LogRegEval> {
    let label_of = |v: usize| {
        labels
            .get(v)
            .copied()
            .flatten()
            .ok_or_else(|| Error::invalid(format!("node {v} has no label")))
    };
    let row_of = |v: usize| {
        embeddings
            .get(v)
            .ok_or_else(|| Error::invalid(format!("no embedding for node {v}")))
    };
    let x = split
        .labeled_train
        .iter()
        .map(|&v| row_of(v).cloned())
        .collect::<Result<Vec<_>>>()?;
    let y = split
        .labeled_train
        .iter()
        .map(|&v| label_of(v))
        .collect::<Result<Vec<_>>>()?;
    let (model, losses) = LogReg::fit(&x, &y, cfg)?;
    let minority = model
        .classes
        .binary_search(&split.minority_class)
        .map_err(|_| {
            Error::Degenerate(format!(
                "minority class {} absent from training",
                split.minority_class
            ))
        })?;
    let mut scored = Vec::with_capacity(split.test.len());
    let mut predictions = Vec::with_capacity(split.test.len());
    for &v in &split.test {
        let p = model.predict_proba(row_of(v)?);
        let truth = label_of(v)?;
        let best = (0..p.len()).fold(0, |b, k| if p[k] > p[b] { k } else { b });
        scored.push((p[minority], truth == split.minority_class));
        predictions.push((model.classes[best], truth));
    }
    Ok(LogRegEval {
        scored,
        predictions,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::multiclass_accuracy;

    fn separable() -> (Vec<Vec<f64>>, Vec<Option<usize>>, LabeledSplit) {
        let emb: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let s = if i % 4 == 0 { 1.0 } else { -1.0 };
                vec![s * (1.0 + (i as f64) * 0.01), (i as f64 * 0.7).sin()]
            })
            .collect();
        let labels = (0..20).map(|i| Some(usize::from(i % 4 == 0))).collect();
        let split = LabeledSplit {
            labeled_train: (0..12).collect(),
            unlabeled_train: Vec::new(),
            test: (12..20).collect(),
            minority_class: 1,
        };
        (emb, labels, split)
    }

    #[test]
    fn separable_embeddings_classify_perfectly() {
        let (emb, labels, split) = separable();
        let out = logreg_eval(&emb, &labels, &split, &LogRegConfig::default()).unwrap();
        assert_eq!(multiclass_accuracy(&out.predictions).unwrap(), 1.0);
        assert_eq!(out.scored.len(), 8);
        assert!(out.scored.iter().all(|&(p, y)| (p > 0.5) == y));
    }

    #[test]
    fn objective_never_increases() {
        let (emb, labels, split) = separable();
        let out = logreg_eval(&emb, &labels, &split, &LogRegConfig::default()).unwrap();
        assert!(!out.losses.is_empty());
        assert!(out.losses.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn deterministic() {
        let (emb, labels, split) = separable();
        let cfg = LogRegConfig::default();
        assert_eq!(
            logreg_eval(&emb, &labels, &split, &cfg).unwrap(),
            logreg_eval(&emb, &labels, &split, &cfg).unwrap()
        );
    }

    #[test]
    fn single_class_training_is_degenerate() {
        let (emb, labels, mut split) = separable();
        split.labeled_train = vec![1, 2, 3];
        assert!(matches!(
            logreg_eval(&emb, &labels, &split, &LogRegConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn probabilities_normalized_multiclass() {
        let x: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y: Vec<usize> = (0..9).map(|i| i / 3 * 2).collect();
        let (m, _) = LogReg::fit(&x, &y, &LogRegConfig::default()).unwrap();
        assert_eq!(m.classes, vec![0, 2, 4]);
        let p = m.predict_proba(&[4.0, 16.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
