use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::classify::{cross_validate_with_plan, Algorithm, FoldPlan, TrainConfig};
use crate::features::{FeatureGroup, FeatureVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub removed: Vec<FeatureGroup>,
    pub baseline_precision: f64,
    /// `None` when the ablated model predicts no positives.
    pub ablated_precision: Option<f64>,
    /// `100 * (baseline - ablated) / baseline`; negative means the removal
    /// helped.
    pub percent_fall: Option<f64>,
    pub baseline_recall: Option<f64>,
    pub ablated_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub p: usize,
    pub algorithm: Algorithm,
    pub k: usize,
    pub seed: u64,
    pub baseline_precision: f64,
    pub baseline_recall: Option<f64>,
    pub rows: Vec<AblationRow>,
}

/// Size-`p` subsets of F1..F5 in lexicographic order.
pub fn subsets(p: usize) -> Vec<Vec<FeatureGroup>> {
    fn go(start: usize, p: usize, cur: &mut Vec<FeatureGroup>, out: &mut Vec<Vec<FeatureGroup>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..FeatureGroup::ALL.len() {
            cur.push(FeatureGroup::ALL[i]);
            go(i + 1, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, p, &mut Vec::new(), &mut out);
    out
}

/// Leave-p-groups-out: cross-validated precision with every group, then
/// again with each size-`p` subset removed. All runs share one fold plan and
/// seed.
pub fn ablate(
    vectors: &[FeatureVector],
    labels: &[bool],
    algorithm: Algorithm,
    p: usize,
    k: usize,
    config: &TrainConfig,
) -> Result<AblationReport, EvalError> {
    if !(1..=2).contains(&p) {
        return Err(EvalError::BadP(p));
    }
    let plan = FoldPlan::stratified(labels, k, config.seed)?;
    let base = cross_validate_with_plan(vectors, labels, &plan, algorithm, config)?;
    let baseline_precision = base.pooled.precision()?;
    let baseline_recall = base.pooled.recall().ok();
    let mut rows = Vec::new();
    for removed in subsets(p) {
        let reduced: Vec<FeatureVector> = vectors.iter().map(|v| v.without(&removed)).collect();
        let cv = cross_validate_with_plan(&reduced, labels, &plan, algorithm, config)?;
        let ablated_precision = cv.pooled.precision().ok();
        rows.push(AblationRow {
            removed,
            baseline_precision,
            percent_fall: ablated_precision.map(|a| 100.0 * (baseline_precision - a) / baseline_precision),
            ablated_precision,
            baseline_recall,
            ablated_recall: cv.pooled.recall().ok(),
        });
    }
    Ok(AblationReport { p, algorithm, k, seed: config.seed, baseline_precision, baseline_recall, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_counts_and_order() {
        assert_eq!(subsets(1).len(), 5);
        let two = subsets(2);
        assert_eq!(two.len(), 10);
        assert_eq!(two[0], vec![FeatureGroup::F1, FeatureGroup::F2]);
        assert_eq!(two[4], vec![FeatureGroup::F2, FeatureGroup::F3]);
        assert_eq!(two[9], vec![FeatureGroup::F4, FeatureGroup::F5]);
    }

    #[test]
    fn p_out_of_range() {
        assert!(matches!(ablate(&[], &[], Algorithm::Nb, 3, 5, &TrainConfig::default()), Err(EvalError::BadP(3))));
    }
}
