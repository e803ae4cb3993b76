use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{train, train_supervised, Algorithm, ClassifyError, TrainConfig};
use crate::eval::ConfusionMatrix;
use crate::features::FeatureVector;

/// Stratified assignment of examples to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of each example, by position.
    pub assignment: Vec<usize>,
    pub rng_seed: u64,
}

impl FoldPlan {
    /// Positives and negatives are shuffled separately with one seeded
    /// generator, then dealt round-robin; negatives continue from the fold
    /// after the last positive so fold sizes differ by at most one.
    pub fn stratified(labels: &[bool], k: usize, seed: u64) -> Result<Self, ClassifyError> {
        if k < 2 {
            return Err(ClassifyError::BadFoldCount(k));
        }
        let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
        let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
        if pos.len() < k {
            return Err(ClassifyError::TooFewPositives { k, positives: pos.len() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        let mut assignment = vec![0; labels.len()];
        for (n, i) in pos.into_iter().chain(neg).enumerate() {
            assignment[i] = n % k;
        }
        Ok(FoldPlan { k, assignment, rng_seed: seed })
    }

    pub fn members(&self, fold: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().enumerate().filter(move |(_, &f)| f == fold).map(|(i, _)| i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignment {
            s[f] += 1;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub matrix: ConfusionMatrix,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub plan: FoldPlan,
    pub folds: Vec<FoldResult>,
    pub pooled: ConfusionMatrix,
    /// Out-of-fold score of every example.
    pub scores: Vec<f64>,
    /// Out-of-fold decision of every example.
    pub predictions: Vec<bool>,
}

impl CvReport {
    pub fn precision(&self) -> Option<f64> {
        self.pooled.precision().ok()
    }

    pub fn recall(&self) -> Option<f64> {
        self.pooled.recall().ok()
    }
}

/// k-fold cross-validation. Each fold's model trains on the positives of
/// the other folds (and their negatives too when `config.supervised`) and is
/// evaluated on every held-out example.
pub fn cross_validate(
    vectors: &[FeatureVector],
    labels: &[bool],
    k: usize,
    algorithm: Algorithm,
    config: &TrainConfig,
) -> Result<CvReport, ClassifyError> {
    if vectors.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch { vectors: vectors.len(), labels: labels.len() });
    }
    let plan = FoldPlan::stratified(labels, k, config.seed)?;
    cross_validate_with_plan(vectors, labels, &plan, algorithm, config)
}

pub fn cross_validate_with_plan(
    vectors: &[FeatureVector],
    labels: &[bool],
    plan: &FoldPlan,
    algorithm: Algorithm,
    config: &TrainConfig,
) -> Result<CvReport, ClassifyError> {
    if vectors.len() != labels.len() || plan.assignment.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch { vectors: vectors.len(), labels: labels.len() });
    }
    let mut scores = vec![0.0; vectors.len()];
    let mut predictions = vec![false; vectors.len()];
    let mut folds = Vec::with_capacity(plan.k);
    let mut pooled = ConfusionMatrix::default();
    for fold in 0..plan.k {
        let outside = |want: bool| -> Vec<FeatureVector> {
            (0..vectors.len())
                .filter(|&i| plan.assignment[i] != fold && labels[i] == want)
                .map(|i| vectors[i].clone())
                .collect()
        };
        let model = if config.supervised {
            train_supervised(algorithm, &outside(true), &outside(false), config)?
        } else {
            train(algorithm, &outside(true), config)?
        };
        let mut m = ConfusionMatrix::default();
        for i in plan.members(fold) {
            let s = model.score(&vectors[i])?;
            let p = s >= model.decision_threshold;
            scores[i] = s;
            predictions[i] = p;
            m.add(p, labels[i]);
        }
        pooled = pooled.merge(&m);
        folds.push(FoldResult {
            fold,
            precision: m.precision().ok(),
            recall: m.recall().ok(),
            matrix: m,
            threshold: model.decision_threshold,
        });
    }
    Ok(CvReport { plan: plan.clone(), folds, pooled, scores, predictions })
}
