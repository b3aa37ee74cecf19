use serde::Serialize;

use crate::error::{Error, Result};

/// One point of the ROC staircase. The first point uses `threshold = +inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roc {
    pub curve: Vec<RocPoint>,
    pub auc: f64,
}

fn check_scores(scored: &[(f64, bool)]) -> Result<(usize, usize)> {
    if let Some(&(s, _)) = scored.iter().find(|(s, _)| s.is_nan()) {
        return Err(Error::invalid(format!("score {s} is not a number")));
    }
    let pos = scored.iter().filter(|&&(_, y)| y).count();
    Ok((pos, scored.len() - pos))
}

/// Indices ordered by descending score; equal scores keep input order.
fn ranked(scored: &[(f64, bool)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scored.len()).collect();
    idx.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0));
    idx
}

/// ROC curve and the Mann-Whitney AUC, `P(s+ > s-) + P(s+ = s-) / 2`.
///
/// Tied scores form one diagonal segment of the staircase. The AUC is
/// accumulated in exact integer half-counts before the final division.
pub fn roc_auc(scored: &[(f64, bool)]) -> Result<Roc> {
    let (pos, neg) = check_scores(scored)?;
    if pos == 0 || neg == 0 {
        return Err(Error::MetricUndefined(
            "ROC AUC needs at least one positive and one negative".into(),
        ));
    }
    let order = ranked(scored);
    let mut curve = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut half_units = 0u128;
    let mut i = 0;
    while i < order.len() {
        let threshold = scored[order[i]].0;
        let (mut p, mut q) = (0u64, 0u64);
        while i < order.len() && scored[order[i]].0 == threshold {
            if scored[order[i]].1 {
                p += 1;
            } else {
                q += 1;
            }
            i += 1;
        }
        half_units += u128::from(q) * u128::from(2 * tp + p);
        tp += p;
        fp += q;
        curve.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold,
        });
    }
    let auc = half_units as f64 / (2 * pos as u128 * neg as u128) as f64;
    Ok(Roc { curve, auc })
}

/// Rank-based average precision: the mean, over positives, of the precision
/// at each positive's rank. Ranks follow descending score; ties keep input
/// order.
pub fn average_precision(scored: &[(f64, bool)]) -> Result<f64> {
    let (pos, _) = check_scores(scored)?;
    if pos == 0 {
        return Err(Error::MetricUndefined(
            "average precision needs at least one positive".into(),
        ));
    }
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, &i) in ranked(scored).iter().enumerate() {
        if scored[i].1 {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(total / pos as f64)
}

/// Fraction of `(predicted, true)` pairs that agree.
pub fn multiclass_accuracy(pairs: &[(usize, usize)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::MetricUndefined("accuracy of an empty set".into()));
    }
    let hits = pairs.iter().filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// `fpr,tpr,threshold` rows with a header.
pub fn roc_csv(curve: &[RocPoint]) -> String {
    let mut out = String::from("fpr,tpr,threshold\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.fpr, p.tpr, p.threshold));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zip(scores: &[f64], labels: &[u8]) -> Vec<(f64, bool)> {
        scores
            .iter()
            .zip(labels)
            .map(|(&s, &y)| (s, y == 1))
            .collect()
    }

    #[test]
    fn auc_examples() {
        assert_eq!(
            roc_auc(&zip(&[0.9, 0.4, 0.6, 0.1], &[1, 0, 1, 0]))
                .unwrap()
                .auc,
            1.0
        );
        assert_eq!(
            roc_auc(&zip(&[0.9, 0.4, 0.6, 0.1], &[1, 1, 0, 0]))
                .unwrap()
                .auc,
            0.75
        );
        assert_eq!(
            roc_auc(&zip(&[0.3; 6], &[1, 0, 1, 0, 0, 1])).unwrap().auc,
            0.5
        );
        assert_eq!(roc_auc(&zip(&[0.1, 0.9], &[1, 0])).unwrap().auc, 0.0);
    }

    #[test]
    fn auc_single_class_is_undefined() {
        assert!(matches!(
            roc_auc(&zip(&[0.1, 0.2], &[1, 1])),
            Err(Error::MetricUndefined(_))
        ));
        assert!(matches!(roc_auc(&[]), Err(Error::MetricUndefined(_))));
        assert!(roc_auc(&[(f64::NAN, true), (0.0, false)]).is_err());
    }

    #[test]
    fn staircase_shape() {
        let roc = roc_auc(&zip(&[0.9, 0.8, 0.8, 0.1], &[1, 1, 0, 0])).unwrap();
        let pts: Vec<(f64, f64)> = roc.curve.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (0.0, 0.5), (0.5, 1.0), (1.0, 1.0)]);
        assert_eq!(roc.auc, 0.875);
        assert!(roc.curve[0].threshold.is_infinite());
    }

    #[test]
    fn ap_examples() {
        assert_eq!(
            average_precision(&zip(&[0.9, 0.8, 0.1], &[1, 1, 0])).unwrap(),
            1.0
        );
        assert_eq!(average_precision(&zip(&[0.9, 0.1], &[0, 1])).unwrap(), 0.5);
        // ties keep input order: the negative listed first ranks first
        assert_eq!(average_precision(&zip(&[0.5, 0.5], &[0, 1])).unwrap(), 0.5);
        assert_eq!(average_precision(&zip(&[0.5, 0.5], &[1, 0])).unwrap(), 1.0);
        assert!(average_precision(&zip(&[0.5], &[0])).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(multiclass_accuracy(&[(1, 1), (2, 2)]).unwrap(), 1.0);
        assert_eq!(multiclass_accuracy(&[(1, 0), (0, 2)]).unwrap(), 0.0);
        assert_eq!(
            multiclass_accuracy(&[(0, 0), (1, 1), (2, 2), (1, 0)]).unwrap(),
            0.75
        );
        assert!(multiclass_accuracy(&[]).is_err());
    }

    #[test]
    fn csv_header() {
        let roc = roc_auc(&zip(&[0.9, 0.1], &[1, 0])).unwrap();
        let csv = roc_csv(&roc.curve);
        assert!(csv.starts_with("fpr,tpr,threshold\n0,0,inf\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
