use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_ids, EvalError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` from the highest threshold
    /// down, starting at (0, 0) and ending at (1, 1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Sweep thresholds over the distinct scores, highest first. Tied scores
/// move together, giving one diagonal step.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if scores.len() != labels.len() {
        return Err(EvalError::IdMismatch { only_predicted: vec![], only_actual: vec![] });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite(format!("#{i}")));
    }
    let p = labels.iter().filter(|&&l| l).count();
    let n = labels.len() - p;
    if p == 0 {
        return Err(EvalError::SingleClass("negatives"));
    }
    if n == 0 {
        return Err(EvalError::SingleClass("positives"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let next = (fp as f64 / n as f64, tp as f64 / p as f64);
        let prev = *points.last().unwrap();
        auc += (next.0 - prev.0) * (next.1 + prev.1) / 2.0;
        points.push(next);
    }
    Ok(RocCurve { points, auc })
}

pub fn roc_auc(scores: &BTreeMap<String, f64>, actual: &BTreeMap<String, bool>) -> Result<RocCurve, EvalError> {
    check_ids(scores, actual)?;
    if let Some((id, _)) = scores.iter().find(|(_, s)| !s.is_finite()) {
        return Err(EvalError::NonFinite(id.clone()));
    }
    let s: Vec<f64> = scores.values().copied().collect();
    let l: Vec<bool> = scores.keys().map(|k| actual[k]).collect();
    roc_curve(&s, &l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_and_reversed() {
        let labels = [true, true, false, false];
        assert_eq!(roc_curve(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap().auc, 1.0);
        assert_eq!(roc_curve(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap().auc, 0.0);
    }

    #[test]
    fn ties_make_one_step() {
        let c = roc_curve(&[0.5, 0.5, 0.5, 0.5], &[true, false, true, false]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(c.auc, 0.5);
    }

    #[test]
    fn small_hand_example() {
        // scores desc: 0.9(+) 0.7(-) 0.6(+) 0.2(-)
        let c = roc_curve(&[0.9, 0.7, 0.6, 0.2], &[true, false, true, false]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]);
        assert_eq!(c.auc, 0.75);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(roc_curve(&[0.1, 0.2], &[true, true]), Err(EvalError::SingleClass(_))));
        assert!(matches!(roc_curve(&[], &[]), Err(EvalError::EmptyInput)));
        assert!(matches!(roc_curve(&[f64::NAN, 0.2], &[true, false]), Err(EvalError::NonFinite(_))));
    }

    #[test]
    fn keyed_variant() {
        let s: BTreeMap<String, f64> = [("a".into(), 0.9), ("b".into(), 0.1)].into();
        let a: BTreeMap<String, bool> = [("a".into(), true), ("b".into(), false)].into();
        assert_eq!(roc_auc(&s, &a).unwrap().auc, 1.0);
    }

    proptest! {
        #[test]
        fn curve_is_monotone(pairs in prop::collection::vec((0u8..10, any::<bool>()), 2..60)) {
            let scores: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let labels: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            if let Ok(c) = roc_curve(&scores, &labels) {
                prop_assert_eq!(c.points[0], (0.0, 0.0));
                prop_assert_eq!(*c.points.last().unwrap(), (1.0, 1.0));
                for w in c.points.windows(2) {
                    prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
                }
                prop_assert!((0.0..=1.0).contains(&c.auc));
                let cubed: Vec<f64> = scores.iter().map(|s| s.powi(3) + 2.0).collect();
                prop_assert_eq!(roc_curve(&cubed, &labels).unwrap().auc, c.auc);
            }
        }
    }
}
