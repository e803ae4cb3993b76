//! Stage-one topic lookup and stage-two intent models (naive Bayes, decision
//! tree, random forest) trained on positive examples.

mod cv;
mod encoding;
mod nb;
mod topic;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureGroup, FeatureVector, PostFeatures};

pub use cv::{cross_validate, cross_validate_with_plan, CvReport, FoldPlan, FoldResult};
pub use encoding::{ColumnKind, FeatureSpace, BIN_DOMAIN, DEFAULT_F2_TOP};
pub use nb::{lower_quantile, symbol, CategoricalCounts, NaiveBayesParams, COUNT_CAP};
pub use topic::{
    harvest_concepts, topic_classify, IntentClass, TopicClass, TopicWhitelist, DEFAULT_CONCEPT_SAMPLE,
    DEFAULT_TOP_K, DEFAULT_WHITELIST, FALLBACK_MIN_ASSIGNMENTS,
};
pub use tree::{bootstrap, Node, Tree, TreeParams};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("need at least {needed} training vectors, got {got}")]
    TooFewVectors { needed: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("feature schema mismatch: expected {expected:?}, found {found:?}")]
    SchemaMismatch {
        expected: Vec<FeatureGroup>,
        found: Vec<FeatureGroup>,
    },
    #[error("feature space has no columns")]
    EmptySchema,
    #[error("model digest {found} does not match its feature space {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error("unsupported model format version {0}")]
    FormatVersion(u32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{vectors} vectors but {labels} labels")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("k must be at least 2, got {0}")]
    BadFoldCount(usize),
    #[error("need at least k={k} positive examples, got {positives}")]
    TooFewPositives { k: usize, positives: usize },
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nb,
    Dt,
    Rf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Nb, Algorithm::Dt, Algorithm::Rf];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Nb => "nb",
            Algorithm::Dt => "dt",
            Algorithm::Rf => "rf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, ClassifyError> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ClassifyError::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub min_train: usize,
    /// Naive Bayes threshold quantile of training self-scores.
    pub tau: f64,
    /// Laplace smoothing for naive Bayes.
    pub alpha: f64,
    /// Decision threshold for trees and two-class naive Bayes.
    pub threshold: f64,
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Synthetic outliers per positive for one-class trees.
    pub outlier_ratio: f64,
    pub f2_top: usize,
    pub seed: u64,
    /// Train against real negatives instead of a one-class scheme.
    pub supervised: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            min_train: 10,
            tau: 0.05,
            alpha: 1.0,
            threshold: 0.5,
            n_trees: 50,
            tree: TreeParams::default(),
            outlier_ratio: 1.0,
            f2_top: DEFAULT_F2_TOP,
            seed: 0,
            supervised: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |m: &str| Err(ClassifyError::InvalidConfig(m.to_owned()));
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must be in [0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold must be in [0, 1]");
        }
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if self.tree.max_depth == 0 || self.tree.min_leaf == 0 {
            return bad("max_depth and min_leaf must be positive");
        }
        if !(self.outlier_ratio > 0.0 && self.outlier_ratio.is_finite()) {
            return bad("outlier_ratio must be positive");
        }
        if self.min_train == 0 {
            return bad("min_train must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(NaiveBayesParams),
    DecisionTree { tree: Tree },
    RandomForest { trees: Vec<Tree> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneClassModel {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub space: FeatureSpace,
    pub training_digest: String,
    pub decision_threshold: f64,
    pub rng_seed: u64,
    pub config: TrainConfig,
    pub params: ModelParams,
}

fn synthetic_outliers(space: &FeatureSpace, rows: &[Vec<u32>], n: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let max_count: Vec<u32> = (0..space.width())
        .map(|c| rows.iter().map(|r| r[c]).max().unwrap_or(0))
        .collect();
    (0..n)
        .map(|_| {
            (0..space.width())
                .map(|c| match space.kind(c) {
                    ColumnKind::Bin => rng.gen_range(0..BIN_DOMAIN),
                    ColumnKind::Count => rng.gen_range(0..=max_count[c]),
                })
                .collect()
        })
        .collect()
}

fn fit_trees(
    algorithm: Algorithm,
    rows: &[Vec<u32>],
    labels: &[bool],
    config: &TrainConfig,
) -> ModelParams {
    let width = rows[0].len();
    if algorithm == Algorithm::Dt {
        let idx: Vec<usize> = (0..rows.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        return ModelParams::DecisionTree { tree: Tree::fit(rows, labels, &idx, config.tree, None, &mut rng) };
    }
    let mtry = (width as f64).sqrt().ceil() as usize;
    let trees = (0..config.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(t as u64));
            let idx = bootstrap(rows.len(), &mut rng);
            Tree::fit(rows, labels, &idx, config.tree, Some(mtry), &mut rng)
        })
        .collect();
    ModelParams::RandomForest { trees }
}

fn check_count(n: usize, config: &TrainConfig) -> Result<(), ClassifyError> {
    if n < config.min_train {
        return Err(ClassifyError::TooFewVectors { needed: config.min_train, got: n });
    }
    Ok(())
}

/// Train on positive examples only.
///
/// Naive Bayes scores by normalized likelihood and thresholds at the `tau`
/// quantile of its training scores. Trees learn to separate the positives
/// from synthetic outliers drawn uniformly over the bin domain and, for F2
/// counts, over `0..=max` observed count.
pub fn train(algorithm: Algorithm, positives: &[FeatureVector], config: &TrainConfig) -> Result<OneClassModel, ClassifyError> {
    config.validate()?;
    check_count(positives.len(), config)?;
    let space = FeatureSpace::fit(positives, config.f2_top)?;
    let rows = positives.iter().map(|v| space.encode(v)).collect::<Result<Vec<_>, _>>()?;
    let (params, threshold) = match algorithm {
        Algorithm::Nb => {
            let nb = NaiveBayesParams { positive: CategoricalCounts::fit(&space, &rows, config.alpha), negative: None };
            let scores: Vec<f64> = rows.iter().map(|r| nb.score(&space, r)).collect();
            (ModelParams::NaiveBayes(nb), lower_quantile(&scores, config.tau))
        }
        Algorithm::Dt | Algorithm::Rf => {
            let n_out = ((rows.len() as f64 * config.outlier_ratio).round() as usize).max(1);
            let outliers = synthetic_outliers(&space, &rows, n_out, config.seed);
            let labels: Vec<bool> = std::iter::repeat_n(true, rows.len()).chain(std::iter::repeat_n(false, n_out)).collect();
            let all: Vec<Vec<u32>> = rows.into_iter().chain(outliers).collect();
            (fit_trees(algorithm, &all, &labels, config), config.threshold)
        }
    };
    Ok(finish(algorithm, space, threshold, config, params))
}

/// Standard two-class training with real negatives, for comparison with the
/// one-class schemes.
pub fn train_supervised(
    algorithm: Algorithm,
    positives: &[FeatureVector],
    negatives: &[FeatureVector],
    config: &TrainConfig,
) -> Result<OneClassModel, ClassifyError> {
    config.validate()?;
    check_count(positives.len(), config)?;
    if negatives.is_empty() {
        return Err(ClassifyError::EmptyInput);
    }
    let space = FeatureSpace::fit(positives.iter().chain(negatives), config.f2_top)?;
    let encode = |vs: &[FeatureVector]| vs.iter().map(|v| space.encode(v)).collect::<Result<Vec<_>, _>>();
    let pos = encode(positives)?;
    let neg = encode(negatives)?;
    let params = match algorithm {
        Algorithm::Nb => ModelParams::NaiveBayes(NaiveBayesParams {
            positive: CategoricalCounts::fit(&space, &pos, config.alpha),
            negative: Some(CategoricalCounts::fit(&space, &neg, config.alpha)),
        }),
        Algorithm::Dt | Algorithm::Rf => {
            let labels: Vec<bool> = std::iter::repeat_n(true, pos.len()).chain(std::iter::repeat_n(false, neg.len())).collect();
            let all: Vec<Vec<u32>> = pos.into_iter().chain(neg).collect();
            fit_trees(algorithm, &all, &labels, config)
        }
    };
    let mut config = *config;
    config.supervised = true;
    Ok(finish(algorithm, space, config.threshold, &config, params))
}

fn finish(algorithm: Algorithm, space: FeatureSpace, threshold: f64, config: &TrainConfig, params: ModelParams) -> OneClassModel {
    OneClassModel {
        format_version: FORMAT_VERSION,
        algorithm,
        training_digest: space.digest(),
        space,
        decision_threshold: threshold,
        rng_seed: config.seed,
        config: *config,
        params,
    }
}

impl OneClassModel {
    /// Confidence in [0, 1] that `vector` belongs to the positive class.
    pub fn score(&self, vector: &FeatureVector) -> Result<f64, ClassifyError> {
        let row = self.space.encode(vector)?;
        Ok(self.score_row(&row))
    }

    fn score_row(&self, row: &[u32]) -> f64 {
        match &self.params {
            ModelParams::NaiveBayes(nb) => nb.score(&self.space, row),
            ModelParams::DecisionTree { tree } => tree.score(row),
            ModelParams::RandomForest { trees } => {
                let votes = trees.iter().filter(|t| t.score(row) >= 0.5).count();
                votes as f64 / trees.len() as f64
            }
        }
    }

    /// Intent iff the score reaches the decision threshold.
    pub fn classify(&self, vector: &FeatureVector) -> Result<IntentClass, ClassifyError> {
        Ok(if self.score(vector)? >= self.decision_threshold {
            IntentClass::Intent
        } else {
            IntentClass::Unknown
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.decision_threshold = threshold;
        self
    }

    /// Drop groups the model was not trained on.
    pub fn project(&self, vector: &FeatureVector) -> FeatureVector {
        let removed: Vec<FeatureGroup> = FeatureGroup::ALL.into_iter().filter(|g| !self.space.groups.contains(g)).collect();
        vector.without(&removed)
    }

    pub fn to_json(&self) -> Result<String, ClassifyError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(json: &str) -> Result<Self, ClassifyError> {
        let value: serde_json::Value = serde_json::from_str(json)?;
        let version = value.get("format_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != FORMAT_VERSION {
            return Err(ClassifyError::FormatVersion(version));
        }
        let model: OneClassModel = serde_json::from_value(value)?;
        let expected = model.space.digest();
        if model.training_digest != expected {
            return Err(ClassifyError::DigestMismatch { expected, found: model.training_digest });
        }
        Ok(model)
    }
}

pub fn score(model: &OneClassModel, vector: &FeatureVector) -> Result<f64, ClassifyError> {
    model.score(vector)
}

pub fn classify_intent(model: &OneClassModel, vector: &FeatureVector) -> Result<IntentClass, ClassifyError> {
    model.classify(vector)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeDecision {
    pub post_id: String,
    pub topic: TopicClass,
    /// Only set for stage-one topic posts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<IntentClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// Run both stages. Only posts labeled topic reach the intent model.
pub fn run_cascade(
    features: &[PostFeatures],
    whitelist: &TopicWhitelist,
    top_k: usize,
    model: &OneClassModel,
) -> Result<Vec<CascadeDecision>, ClassifyError> {
    features
        .iter()
        .map(|f| {
            let topic = topic_classify(&f.taxonomy, &f.concepts, whitelist, top_k);
            let (intent, score) = if topic == TopicClass::Topic {
                let v = model.project(&f.vector);
                let s = model.score(&v)?;
                let label = if s >= model.decision_threshold { IntentClass::Intent } else { IntentClass::Unknown };
                (Some(label), Some(s))
            } else {
                (None, None)
            };
            Ok(CascadeDecision { post_id: f.post_id.clone(), topic, intent, score })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{ConfidenceBin, Emotion, Polarity, Social, Writing};
    use std::collections::BTreeMap;

    fn vector(b: usize, f2: &[(&str, u32)]) -> FeatureVector {
        let bin = ConfidenceBin::from_index(b).unwrap();
        FeatureVector {
            f1: Polarity::from_index(b),
            f2: Some(f2.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>()),
            f3: Some(Emotion { anger: bin, fear: bin, joy: bin, disgust: bin, sadness: bin }),
            f4: Some(Writing { analytical: bin, confident: bin, tentative: bin }),
            f5: Some(Social { openness: bin, conscientiousness: bin, extraversion: bin, agreeableness: bin, emotional_range: bin }),
        }
    }

    #[test]
    fn identical_training_set() {
        let v = vector(3, &[("S2", 2)]);
        let train_set = vec![v.clone(); 12];
        for alg in Algorithm::ALL {
            let m = train(alg, &train_set, &TrainConfig::default()).unwrap();
            let top = m.score(&v).unwrap();
            assert_eq!(top, 1.0, "{alg}");
            let other = vector(0, &[("S2", 0)]);
            assert!(m.score(&other).unwrap() < top, "{alg}");
        }
    }

    #[test]
    fn too_few_and_schema_errors() {
        let v = vector(1, &[]);
        assert!(matches!(train(Algorithm::Nb, &vec![v.clone(); 3], &TrainConfig::default()), Err(ClassifyError::TooFewVectors { .. })));
        let m = train(Algorithm::Nb, &vec![v.clone(); 10], &TrainConfig::default()).unwrap();
        assert!(matches!(m.score(&v.without(&[FeatureGroup::F3])), Err(ClassifyError::SchemaMismatch { .. })));
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        let v = vector(2, &[]);
        let m = train(Algorithm::Nb, &vec![v.clone(); 10], &TrainConfig::default()).unwrap();
        let s = m.score(&v).unwrap();
        assert_eq!(m.clone().with_threshold(s).classify(&v).unwrap(), IntentClass::Intent);
        let m = m.with_threshold(0.5);
        let worst = vector(0, &[]);
        assert!(m.score(&worst).unwrap() < 0.5);
        assert_eq!(m.classify(&worst).unwrap(), IntentClass::Unknown);
    }

    #[test]
    fn model_json_round_trip_and_determinism() {
        let set: Vec<FeatureVector> = (0..20).map(|i| vector(i % 5, &[("Z99", i as u32 % 3)])).collect();
        for alg in Algorithm::ALL {
            let cfg = TrainConfig { seed: 7, n_trees: 5, ..TrainConfig::default() };
            let a = train(alg, &set, &cfg).unwrap().to_json().unwrap();
            let b = train(alg, &set, &cfg).unwrap().to_json().unwrap();
            assert_eq!(a, b);
            let back = OneClassModel::from_json(&a).unwrap();
            assert_eq!(back.to_json().unwrap(), a);
        }
    }

    #[test]
    fn tampered_model_is_refused() {
        let set = vec![vector(1, &[]); 10];
        let json = train(Algorithm::Nb, &set, &TrainConfig::default()).unwrap().to_json().unwrap();
        let v2 = json.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(OneClassModel::from_json(&v2), Err(ClassifyError::FormatVersion(2))));
        let renamed = json.replacen("F1.polarity", "F1.mood", 1);
        assert!(matches!(OneClassModel::from_json(&renamed), Err(ClassifyError::DigestMismatch { .. })));
    }

    #[test]
    fn forest_scores_are_vote_fractions() {
        let set: Vec<FeatureVector> = (0..30).map(|i| vector(3 + i % 2, &[])).collect();
        let cfg = TrainConfig { n_trees: 8, ..TrainConfig::default() };
        let m = train(Algorithm::Rf, &set, &cfg).unwrap();
        for b in 0..5 {
            let s = m.score(&vector(b, &[])).unwrap();
            assert!(((s * 8.0).round() - s * 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn supervised_training() {
        let pos: Vec<FeatureVector> = (0..15).map(|i| vector(4 - i % 2, &[])).collect();
        let neg: Vec<FeatureVector> = (0..15).map(|i| vector(i % 2, &[])).collect();
        for alg in Algorithm::ALL {
            let m = train_supervised(alg, &pos, &neg, &TrainConfig::default()).unwrap();
            assert!(m.config.supervised);
            assert_eq!(m.classify(&vector(4, &[])).unwrap(), IntentClass::Intent, "{alg}");
            assert_eq!(m.classify(&vector(0, &[])).unwrap(), IntentClass::Unknown, "{alg}");
        }
    }
}
