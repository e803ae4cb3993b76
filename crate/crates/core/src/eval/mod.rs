//! Confusion matrices, precision and recall, test conditions, ROC curves,
//! feature-group ablation and report files.

mod ablation;
mod conditions;
mod report;
mod roc;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ClassifyError;

pub use ablation::{ablate, subsets, AblationReport, AblationRow};
pub use conditions::{harvested_whitelist, intent_set, stage_one, topic_confusion, IntentSet, TestCondition};
pub use report::{emit_report, fmt4, MetricsRow, Report};
pub use roc::{roc_auc, roc_curve, RocCurve};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty input")]
    EmptyInput,
    #[error("id sets differ: only predicted {only_predicted:?}, only actual {only_actual:?}")]
    IdMismatch {
        only_predicted: Vec<String>,
        only_actual: Vec<String>,
    },
    #[error("{0} is undefined: zero denominator")]
    UndefinedMetric(&'static str),
    #[error("both classes are required, found only {0}")]
    SingleClass(&'static str),
    #[error("score for {0:?} is not finite")]
    NonFinite(String),
    #[error("p must be 1 or 2, got {0}")]
    BadP(usize),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Counts with the topic or intent class as positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `tp / (tp + fp)`.
    pub fn precision(&self) -> Result<f64, EvalError> {
        match self.tp + self.fp {
            0 => Err(EvalError::UndefinedMetric("precision")),
            d => Ok(self.tp as f64 / d as f64),
        }
    }

    /// `tp / (tp + fn)`.
    pub fn recall(&self) -> Result<f64, EvalError> {
        match self.tp + self.fn_ {
            0 => Err(EvalError::UndefinedMetric("recall")),
            d => Ok(self.tp as f64 / d as f64),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut m = ConfusionMatrix::default();
        for (p, a) in pairs {
            m.add(p, a);
        }
        m
    }
}

pub fn precision(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    m.precision()
}

pub fn recall(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    m.recall()
}

fn check_ids<A, B>(predicted: &BTreeMap<String, A>, actual: &BTreeMap<String, B>) -> Result<(), EvalError> {
    if predicted.is_empty() && actual.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let only_predicted: Vec<String> = predicted.keys().filter(|k| !actual.contains_key(*k)).cloned().collect();
    let only_actual: Vec<String> = actual.keys().filter(|k| !predicted.contains_key(*k)).cloned().collect();
    if !only_predicted.is_empty() || !only_actual.is_empty() {
        return Err(EvalError::IdMismatch { only_predicted, only_actual });
    }
    Ok(())
}

/// Confusion counts over two labelings of the same posts.
pub fn confusion(predicted: &BTreeMap<String, bool>, actual: &BTreeMap<String, bool>) -> Result<ConfusionMatrix, EvalError> {
    check_ids(predicted, actual)?;
    Ok(ConfusionMatrix::from_pairs(predicted.iter().map(|(k, &p)| (p, actual[k]))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(pairs: &[(&str, bool)]) -> BTreeMap<String, bool> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn all_correct() {
        let a = map(&[("1", true), ("2", false), ("3", true)]);
        let m = confusion(&a, &a).unwrap();
        assert_eq!((m.fp, m.fn_), (0, 0));
        assert_eq!((m.tp, m.tn), (2, 1));
    }

    #[test]
    fn empty_and_mismatch() {
        assert!(matches!(confusion(&map(&[]), &map(&[])), Err(EvalError::EmptyInput)));
        let err = confusion(&map(&[("1", true)]), &map(&[("2", true)])).unwrap_err();
        assert!(matches!(err, EvalError::IdMismatch { .. }));
    }

    #[test]
    fn topic_table() {
        let m = ConfusionMatrix::new(253, 93, 39, 2034);
        assert!((m.precision().unwrap() - 253.0 / 346.0).abs() < 1e-12);
        assert!((m.recall().unwrap() - 253.0 / 292.0).abs() < 1e-12);
        assert_eq!(m.total(), 2419);
    }

    #[test]
    fn edge_metrics() {
        assert_eq!(ConfusionMatrix::new(3, 0, 1, 0).precision().unwrap(), 1.0);
        assert_eq!(ConfusionMatrix::new(0, 2, 1, 0).precision().unwrap(), 0.0);
        assert!(matches!(ConfusionMatrix::new(0, 0, 1, 5).precision(), Err(EvalError::UndefinedMetric("precision"))));
        assert!(matches!(ConfusionMatrix::new(0, 1, 0, 5).recall(), Err(EvalError::UndefinedMetric("recall"))));
    }

    #[test]
    fn serde_uses_fn() {
        let json = serde_json::to_string(&ConfusionMatrix::new(1, 2, 3, 4)).unwrap();
        assert_eq!(json, r#"{"tp":1,"fp":2,"fn":3,"tn":4}"#);
    }

    proptest! {
        #[test]
        fn metrics_in_unit_interval(tp in 0u64..100, fp in 0u64..100, fn_ in 0u64..100, tn in 0u64..100) {
            let m = ConfusionMatrix::new(tp, fp, fn_, tn);
            if let Ok(p) = m.precision() { prop_assert!((0.0..=1.0).contains(&p)); }
            if let Ok(r) = m.recall() { prop_assert!((0.0..=1.0).contains(&r)); }
        }
    }
}
