//! `intent-cascade`: the classification pipeline as subcommands.
//!
//! Every subcommand reads a flat TOML config (`--config`), applies flag
//! overrides, and writes artifacts stamped with a config fingerprint. Runtime
//! failures print one `error[kind]: message` line and exit 1; usage and
//! config errors exit 2.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use intent_cascade::classify::Algorithm;
use intent_cascade::eval::TestCondition;

use config::{one_line, ConfigError, RunConfig, SEED_ENV};

#[derive(Debug, Parser)]
#[command(name = "intent-cascade", version, about = "Two-stage topic and intent classification for microblog posts")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override config file values.
#[derive(Debug, Args)]
struct Overrides {
    /// Flat TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    models: Option<PathBuf>,
    #[arg(long, global = true)]
    lexicons: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    #[arg(long, global = true, value_parser = parse_condition)]
    condition: Option<TestCondition>,
    #[arg(long, global = true)]
    taxonomy_cutoff: Option<f64>,
    #[arg(long, global = true)]
    top_k: Option<usize>,
    /// Naive Bayes threshold quantile.
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Cross-validation folds.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Train against real negatives.
    #[arg(long, global = true)]
    supervised: bool,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: intent_cascade::classify::ClassifyError| e.to_string())
}

fn parse_condition(s: &str) -> Result<TestCondition, String> {
    s.parse()
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::load(self.config.as_deref())?;
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(out_dir, models, algorithm, condition, taxonomy_cutoff, top_k, tau, threshold, k);
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.lexicons.is_some() {
            c.lexicons = self.lexicons.clone();
        }
        if self.corpus.is_some() {
            c.corpus = self.corpus.clone();
        }
        c.supervised |= self.supervised;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RecordFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FixtureKind {
    /// About 500 posts with planted topic and intent signal.
    Cascade,
    /// Cascade fixture with signal only in the emotion group.
    Ablation,
    /// 100-post mixed-language corpus.
    Corpus,
    /// 2955-post mixed-language corpus with 273 planted duplicates.
    CorpusFull,
    /// Two-annotator labels with fixed topic and intent agreement tables.
    Agreement,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read raw posts; drop duplicates and non-English posts.
    Ingest {
        /// Raw posts; defaults to `corpus` from the config.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "jsonl")]
        format: RecordFormat,
        /// Blogger records (JSONL).
        #[arg(long)]
        bloggers: Option<PathBuf>,
        /// Keep duplicates and non-English posts.
        #[arg(long)]
        keep_all: bool,
    },
    /// Collect posts by expanding seed tags breadth-first.
    Bootstrap {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Seed tag; repeat to give several. Replaces `seed_tags` from the config.
        #[arg(long = "seed-tag")]
        seed_tags: Vec<String>,
    },
    /// Cohen's kappa for two annotators.
    Agreement {
        /// `post_id,annotator_id,topic_label,intent_label` rows.
        #[arg(long, required_unless_present = "counts", conflicts_with = "counts")]
        annotations: Option<PathBuf>,
        /// Topic-phase table as `both,a_only,b_only,neither`.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        counts: Option<Vec<u64>>,
        /// Intent-phase table, same layout.
        #[arg(long, value_delimiter = ',', num_args = 1, requires = "counts")]
        intent_counts: Option<Vec<u64>>,
    },
    /// Compute features for every post.
    Extract {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Train the intent model on labeled intent posts.
    Train {
        #[arg(long)]
        features: PathBuf,
        /// Annotation CSV.
        #[arg(long)]
        labels: PathBuf,
    },
    /// Run both stages over extracted features.
    Classify {
        #[arg(long)]
        features: PathBuf,
        /// Defaults to `<models>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Score predictions against annotations and write the report.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Leave-one and leave-two feature-group ablation under cross-validation.
    Ablate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Write a seeded synthetic corpus and its manifest.
    GenFixture {
        #[arg(long, value_enum)]
        kind: FixtureKind,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error[config]: {}", one_line(&e.0));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("error[config]: {}", one_line(&format!("{e:#}")));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error[{}]: {}", commands::error_kind(&e), one_line(&format!("{e:#}")));
            ExitCode::from(1)
        }
    }
}
