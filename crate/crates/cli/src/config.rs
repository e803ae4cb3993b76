//! Run configuration: a flat TOML file of `key = value` lines, overridden by
//! command-line flags.

use std::path::{Path, PathBuf};

use intent_cascade::classify::{Algorithm, TrainConfig, TreeParams, DEFAULT_CONCEPT_SAMPLE, DEFAULT_F2_TOP, DEFAULT_TOP_K};
use intent_cascade::eval::TestCondition;
use intent_cascade::features::CONFIDENCE_CUTOFF;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SEED_ENV: &str = "INTENT_CASCADE_SEED";

/// Invalid configuration; reported as a usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    /// Directory with taxonomy.tsv, concepts.tsv, valence.tsv, tone.tsv and
    /// semantic.tsv. The bundled lexicons are used when unset.
    pub lexicons: Option<PathBuf>,
    pub models: PathBuf,
    pub out_dir: PathBuf,
    pub taxonomy_cutoff: f64,
    pub top_k: usize,
    pub tau: f64,
    pub threshold: f64,
    pub k: usize,
    /// Unset means each step keeps its own default seed.
    pub seed: Option<u64>,
    pub algorithm: Algorithm,
    pub condition: TestCondition,
    pub supervised: bool,
    pub min_train: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub outlier_ratio: f64,
    pub f2_top: usize,
    pub concept_sample: usize,
    pub seed_tags: Vec<String>,
    pub max_posts: usize,
    pub per_tag_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        RunConfig {
            corpus: None,
            lexicons: None,
            models: PathBuf::from("models"),
            out_dir: PathBuf::from("out"),
            taxonomy_cutoff: CONFIDENCE_CUTOFF,
            top_k: DEFAULT_TOP_K,
            tau: train.tau,
            threshold: train.threshold,
            k: 5,
            seed: None,
            algorithm: Algorithm::Nb,
            condition: TestCondition::Td2,
            supervised: false,
            min_train: train.min_train,
            n_trees: train.n_trees,
            max_depth: train.tree.max_depth,
            min_leaf: train.tree.min_leaf,
            outlier_ratio: train.outlier_ratio,
            f2_top: DEFAULT_F2_TOP,
            concept_sample: DEFAULT_CONCEPT_SAMPLE,
            seed_tags: intent_cascade::fixture::SEED_TAGS.iter().map(|s| s.to_string()).collect(),
            max_posts: 5000,
            per_tag_limit: 20,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), one_line(&e.to_string()))))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            min_train: self.min_train,
            tau: self.tau,
            threshold: self.threshold,
            n_trees: self.n_trees,
            tree: TreeParams { max_depth: self.max_depth, min_leaf: self.min_leaf },
            outlier_ratio: self.outlier_ratio,
            f2_top: self.f2_top,
            seed: self.seed(),
            supervised: self.supervised,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if !(CONFIDENCE_CUTOFF..=1.0).contains(&self.taxonomy_cutoff) {
            return bad(format!("taxonomy_cutoff must be in [{CONFIDENCE_CUTOFF}, 1], got {}", self.taxonomy_cutoff));
        }
        if self.top_k == 0 {
            return bad("top_k must be positive".into());
        }
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.f2_top == 0 || self.concept_sample == 0 {
            return bad("f2_top and concept_sample must be positive".into());
        }
        if self.max_posts == 0 || self.per_tag_limit == 0 {
            return bad("max_posts and per_tag_limit must be positive".into());
        }
        self.train_config().validate().map_err(|e| ConfigError(e.to_string()))
    }
}

pub fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Hash of everything that determines an artifact's bytes: the command, the
/// configuration minus output locations, and the contents of every input.
pub fn fingerprint(config: &RunConfig, command: &str, inputs: &[&Path]) -> std::io::Result<String> {
    let mut settings = config.clone();
    settings.models = PathBuf::new();
    settings.out_dir = PathBuf::new();
    settings.corpus = None;
    settings.lexicons = None;
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(&settings).expect("config serializes"));
    let read = |path: &Path| {
        std::fs::read(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    };
    for path in inputs {
        h.update([0]);
        h.update(Sha256::digest(read(path)?));
    }
    if let Some(dir) = &config.lexicons {
        for name in ["taxonomy.tsv", "concepts.tsv", "valence.tsv", "tone.tsv", "semantic.tsv"] {
            h.update([0]);
            h.update(Sha256::digest(read(&dir.join(name))?));
        }
    }
    Ok(hex::encode(&h.finalize()[..16]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_file_parses_and_rejects_unknown_keys() {
        let c: RunConfig = toml::from_str("top_k = 5\nalgorithm = \"rf\"\ncondition = \"td1\"\nseed = 9\n").unwrap();
        assert_eq!((c.top_k, c.algorithm, c.condition, c.seed), (5, Algorithm::Rf, TestCondition::Td1, Some(9)));
        assert!(toml::from_str::<RunConfig>("topk = 5\n").is_err());
    }

    #[test]
    fn ranges_are_checked() {
        assert!(RunConfig::default().validate().is_ok());
        for c in [
            RunConfig { taxonomy_cutoff: 0.3, ..RunConfig::default() },
            RunConfig { tau: 1.5, ..RunConfig::default() },
            RunConfig { k: 1, ..RunConfig::default() },
            RunConfig { top_k: 0, ..RunConfig::default() },
        ] {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn output_paths_do_not_change_the_fingerprint() {
        let a = RunConfig::default();
        let b = RunConfig { out_dir: "elsewhere".into(), ..RunConfig::default() };
        let c = RunConfig { seed: Some(3), ..RunConfig::default() };
        let fa = fingerprint(&a, "extract", &[]).unwrap();
        assert_eq!(fa, fingerprint(&b, "extract", &[]).unwrap());
        assert_ne!(fa, fingerprint(&c, "extract", &[]).unwrap());
        assert_ne!(fa, fingerprint(&a, "train", &[]).unwrap());
    }
}
