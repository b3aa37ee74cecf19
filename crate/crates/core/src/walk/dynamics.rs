//! Numerical diagnostics for the long-run behaviour of a reweighted walk:
//! the occupancy vector `V(t)`, the energy `H(v)`, the induced Markov kernel
//! `M(v)`, the map `pi(v)` whose fixed points are the candidate limits, and
//! traces along a single long walk.

use rand::Rng;

use super::{step, VisitState, VisitingFunction};
use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;

/// Energies at or below this are treated as zero.
pub const ENERGY_TOLERANCE: f64 = 1e-300;

/// `V_i = f(S_i) / sum_k f(S_k)`, computed with a max shift in log space.
pub fn occupancy_vector(state: &VisitState, f: &VisitingFunction) -> Vec<f64> {
    let logs: Vec<f64> = state.counts().iter().map(|&s| f.log_evaluate(s)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `H(v) = sum_ij R_ij v_i v_j`.
pub fn h_energy(r: &TransitionMatrix, v: &[f64]) -> f64 {
    (0..r.n())
        .map(|i| {
            let (t, p) = r.row(i);
            v[i] * t.iter().zip(p).map(|(&j, &rij)| rij * v[j]).sum::<f64>()
        })
        .sum()
}

/// `M(v)` row by row. A row whose normalizer `sum_k R_ik v_k` vanishes is
/// `None`; such `v` make the kernel reducible.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMatrix {
    pub rows: Vec<Option<Vec<(usize, f64)>>>,
}

impl MarkovMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.rows[i]
            .as_ref()
            .map(|row| row.iter().find(|&&(k, _)| k == j).map_or(0.0, |&(_, p)| p))
    }

    pub fn undefined_rows(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| self.rows[i].is_none())
            .collect()
    }
}

pub fn markov_matrix(r: &TransitionMatrix, v: &[f64]) -> MarkovMatrix {
    let rows = (0..r.n())
        .map(|i| {
            let (t, p) = r.row(i);
            let denom: f64 = t.iter().zip(p).map(|(&k, &rik)| rik * v[k]).sum();
            (denom > 0.0).then(|| {
                t.iter()
                    .zip(p)
                    .map(|(&j, &rij)| (j, rij * v[j] / denom))
                    .collect()
            })
        })
        .collect();
    MarkovMatrix { rows }
}

/// `pi_i(v) = v_i * sum_j R_ij v_j / H(v)`.
pub fn pi_map(r: &TransitionMatrix, v: &[f64]) -> Result<Vec<f64>> {
    let h = h_energy(r, v);
    if !(h > ENERGY_TOLERANCE) {
        return Err(Error::Degenerate(format!("H(v) = {h} is not positive")));
    }
    Ok((0..r.n())
        .map(|i| {
            let (t, p) = r.row(i);
            v[i] * t.iter().zip(p).map(|(&j, &rij)| rij * v[j]).sum::<f64>() / h
        })
        .collect())
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `||pi(v) - v||_2`, zero exactly at fixed points.
pub fn fixed_point_residual(r: &TransitionMatrix, v: &[f64]) -> Result<f64> {
    Ok(l2(&pi_map(r, v)?, v))
}

/// Runs one continuous walk of `length` steps and, every `interval` steps
/// from `t = 2 * interval` on, emits `(t, ||P(t) - P(t - interval)||_2)`
/// where `P(t)` is the empirical visit distribution `S(t) / sum(S(t))`.
pub fn convergence_trace<R: Rng + ?Sized>(
    r: &TransitionMatrix,
    f: &VisitingFunction,
    start: usize,
    length: usize,
    interval: usize,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    if interval == 0 || length < 2 * interval {
        return Err(Error::invalid(format!(
            "convergence trace needs length >= 2 * interval >= 2 (length {length}, interval {interval})"
        )));
    }
    let mut state = VisitState::new(r.n(), start);
    let mut scratch = Vec::new();
    let freq = |s: &VisitState| {
        let total = s.counts().iter().sum::<u64>() as f64;
        s.counts()
            .iter()
            .map(|&c| c as f64 / total)
            .collect::<Vec<_>>()
    };
    let mut prev: Option<Vec<f64>> = None;
    let mut out = Vec::new();
    for t in 1..=length {
        step(r, &mut state, f, &mut scratch, rng);
        if t % interval == 0 {
            let cur = freq(&state);
            if let Some(p) = &prev {
                out.push((t, l2(&cur, p)));
            }
            prev = Some(cur);
        }
    }
    Ok(out)
}

/// Residual `||pi(V(t)) - V(t)||_2` at the requested steps of one continuous walk.
pub fn residual_trace<R: Rng + ?Sized>(
    r: &TransitionMatrix,
    f: &VisitingFunction,
    start: usize,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    let mut state = VisitState::new(r.n(), start);
    let mut scratch = Vec::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    for t in 0..=last {
        if t > 0 {
            step(r, &mut state, f, &mut scratch, rng);
        }
        if checkpoints.contains(&t) {
            let v = occupancy_vector(&state, f);
            out.push((t, fixed_point_residual(r, &v)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    fn swap() -> TransitionMatrix {
        TransitionMatrix::from_rows(vec![vec![(1, 1.0)], vec![(0, 1.0)]]).unwrap()
    }

    #[test]
    fn occupancy_fresh_is_uniform() {
        let s = VisitState::from_counts(vec![0; 4], 0);
        for f in [
            VisitingFunction::Constant,
            VisitingFunction::Exponential { alpha: 0.3 },
        ] {
            assert!(occupancy_vector(&s, &f)
                .iter()
                .all(|&x| (x - 0.25).abs() < 1e-15));
        }
        let s = VisitState::from_counts(vec![1, 0], 0);
        let v = occupancy_vector(&s, &VisitingFunction::Exponential { alpha: 0.5 });
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-15 && (v[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn energy_cases() {
        assert!((h_energy(&swap(), &[0.5, 0.5]) - 0.5).abs() < 1e-15);
        assert_eq!(h_energy(&swap(), &[1.0, 0.0]), 0.0);
        let id = TransitionMatrix::from_rows(vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)]])
            .unwrap();
        let v = [0.2, 0.3, 0.5];
        assert!((h_energy(&id, &v) - (0.04 + 0.09 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn markov_cases() {
        let m = markov_matrix(&swap(), &[1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(m.get(0, 1), Some(1.0));
        assert_eq!(m.get(1, 0), Some(1.0));
        let m = markov_matrix(&swap(), &[1.0, 0.0]);
        assert_eq!(m.undefined_rows(), vec![0]);
    }

    #[test]
    fn pi_cases() {
        let p = pi_map(&swap(), &[0.25, 0.75]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let res = fixed_point_residual(&swap(), &[0.25, 0.75]).unwrap();
        assert!((res - 0.25 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(fixed_point_residual(&swap(), &[0.5, 0.5]).unwrap(), 0.0);
        assert!(matches!(
            pi_map(&swap(), &[1.0, 0.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn self_loop_trace_is_zero() {
        let r = TransitionMatrix::from_rows(vec![vec![(0, 1.0)]]).unwrap();
        let t = convergence_trace(
            &r,
            &VisitingFunction::Constant,
            0,
            50,
            10,
            &mut Streams::new(0).stream("t"),
        )
        .unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|&(_, x)| x == 0.0));
    }

    #[test]
    fn trace_precondition() {
        let r = swap();
        let mut rng = Streams::new(0).stream("t");
        assert!(convergence_trace(&r, &VisitingFunction::Constant, 0, 100, 100, &mut rng).is_err());
        assert!(convergence_trace(&r, &VisitingFunction::Constant, 0, 100, 0, &mut rng).is_err());
        assert_eq!(
            convergence_trace(&r, &VisitingFunction::Constant, 0, 200, 100, &mut rng)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn taylor_regime() {
        // e^x = 1 + x + R with 0 <= R <= x^2 / 2 for x <= 0
        let alpha: f64 = 0.9;
        for s in 0..=2 {
            let x = s as f64 * alpha.ln();
            let gap = alpha.powi(s) - (1.0 + x);
            assert!(gap >= 0.0 && gap <= x * x / 2.0);
            assert!(gap < 0.021);
        }
    }
}
