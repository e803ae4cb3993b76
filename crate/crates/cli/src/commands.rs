use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use intent_cascade::annotation::{
    cohens_kappa, ground_truth, protocol_agreement, read_annotations, synthesize_annotations, write_annotations,
    AgreementTable, AnnotationError, GroundTruth,
};
use intent_cascade::bootstrap::{bootstrap_collect, build_tag_index, BootstrapError};
use intent_cascade::classify::{
    cross_validate, run_cascade, train, train_supervised, ClassifyError, IntentClass, OneClassModel, TopicClass,
    TopicWhitelist,
};
use intent_cascade::corpus::{
    compute_stats, deduplicate, filter_english, ingest, ingest_bloggers, write_jsonl, write_rejects, CorpusError,
    Dataset, Format,
};
use intent_cascade::eval::{
    ablate, emit_report, harvested_whitelist, intent_set, roc_curve, stage_one, EvalError, MetricsRow, Report,
    TestCondition,
};
use intent_cascade::features::{extract_dataset, read_features_jsonl, write_features_jsonl, FeatureError, Lexicons, PostFeatures};
use intent_cascade::fixture::{generate_cascade_with, generate_corpus, CascadeSpec, CorpusSpec, FixtureError};
use serde::{Deserialize, Serialize};

use crate::config::{fingerprint, ConfigError, RunConfig};
use crate::{Command, FixtureKind, RecordFormat};

const TOPIC_TABLE: AgreementTable = AgreementTable { both_positive: 292, a_only: 24, b_only: 13, both_negative: 2127 };
const INTENT_TABLE: AgreementTable = AgreementTable { both_positive: 103, a_only: 2, b_only: 12, both_negative: 175 };

/// Input that is present but unusable.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Short machine-readable class of a runtime error.
pub fn error_kind(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        let kind = if cause.is::<InputError>() {
            "input"
        } else if cause.is::<CorpusError>() {
            "corpus"
        } else if cause.is::<BootstrapError>() {
            "bootstrap"
        } else if cause.is::<AnnotationError>() {
            "annotation"
        } else if cause.is::<FeatureError>() {
            "features"
        } else if cause.is::<ClassifyError>() {
            "classify"
        } else if cause.is::<EvalError>() {
            "eval"
        } else if cause.is::<FixtureError>() {
            "fixture"
        } else if cause.is::<serde_json::Error>() || cause.is::<csv::Error>() {
            "format"
        } else if cause.is::<std::io::Error>() {
            "io"
        } else {
            continue;
        };
        return kind;
    }
    "runtime"
}

pub fn run(command: &Command, config: &RunConfig) -> Result<()> {
    match command {
        Command::Ingest { input, format, bloggers, keep_all } => {
            cmd_ingest(config, input.as_deref(), *format, bloggers.as_deref(), *keep_all)
        }
        Command::Bootstrap { input, seed_tags } => cmd_bootstrap(config, input.as_deref(), seed_tags),
        Command::Agreement { annotations, counts, intent_counts } => {
            cmd_agreement(annotations.as_deref(), counts.as_deref(), intent_counts.as_deref())
        }
        Command::Extract { input } => cmd_extract(config, input.as_deref()),
        Command::Train { features, labels } => cmd_train(config, features, labels),
        Command::Classify { features, model } => cmd_classify(config, features, model.as_deref()),
        Command::Evaluate { predictions, labels } => cmd_evaluate(config, predictions, labels),
        Command::Ablate { features, labels } => cmd_ablate(config, features, labels),
        Command::GenFixture { kind } => cmd_gen_fixture(config, *kind),
    }
}

fn stamp(fp: &str) -> String {
    format!("# config_fingerprint={fp}\n")
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_fingerprint: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, fp: &str, body: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Stamped { config_fingerprint: fp, body })?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_dataset(path: &Path, fp: &str, dataset: &Dataset) -> Result<()> {
    let mut buf = stamp(fp).into_bytes();
    write_jsonl(dataset, &mut buf)?;
    write_file(path, &buf)
}

fn write_labels(path: &Path, fp: &str, records: &[intent_cascade::annotation::AnnotationRecord]) -> Result<()> {
    let mut buf = stamp(fp).into_bytes();
    write_annotations(&mut buf, records)?;
    write_file(path, &buf)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn input_or_corpus<'a>(input: Option<&'a Path>, config: &'a RunConfig) -> Result<&'a Path> {
    match input.or(config.corpus.as_deref()) {
        Some(p) => Ok(p),
        None => Err(ConfigError("no input: pass --input or set corpus in the config".into()).into()),
    }
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let ingested = ingest(open(path)?, Format::Jsonl).with_context(|| format!("reading {}", path.display()))?;
    if let Some(r) = ingested.rejects.first() {
        return Err(InputError(format!("{}: line {}: {}", path.display(), r.line_number, r.reason)).into());
    }
    Ok(ingested.dataset)
}

fn read_features(path: &Path, config: &RunConfig) -> Result<Vec<PostFeatures>> {
    let mut features = read_features_jsonl(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    if features.is_empty() {
        return Err(InputError(format!("empty input: {} has no feature records", path.display())).into());
    }
    // The extractor already drops assignments below the minimum cutoff.
    let cutoff = config.taxonomy_cutoff;
    for f in &mut features {
        f.taxonomy.retain(|a| a.confidence >= cutoff);
        f.concepts.retain(|c| c.confidence >= cutoff);
    }
    Ok(features)
}

fn read_truth(path: &Path) -> Result<BTreeMap<String, GroundTruth>> {
    let records = read_annotations(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    if records.is_empty() {
        return Err(InputError(format!("empty input: {} has no annotations", path.display())).into());
    }
    Ok(ground_truth(&records)?)
}

fn lexicons(config: &RunConfig) -> Result<Lexicons> {
    match &config.lexicons {
        Some(dir) => Ok(Lexicons::from_dir(dir)?),
        None => Ok(Lexicons::bundled()),
    }
}

fn cmd_ingest(
    config: &RunConfig,
    input: Option<&Path>,
    format: RecordFormat,
    bloggers: Option<&Path>,
    keep_all: bool,
) -> Result<()> {
    let input = input_or_corpus(input, config)?;
    let mut inputs = vec![input];
    inputs.extend(bloggers);
    let fp = fingerprint(config, if keep_all { "ingest-all" } else { "ingest" }, &inputs)?;
    let format = match format {
        RecordFormat::Jsonl => Format::Jsonl,
        RecordFormat::Csv => Format::Csv,
    };
    let ingested = ingest(open(input)?, format).with_context(|| format!("reading {}", input.display()))?;
    let mut dataset = ingested.dataset;
    if let Some(path) = bloggers {
        let found = ingest_bloggers(open(path)?).with_context(|| format!("reading {}", path.display()))?;
        dataset = dataset.with_bloggers(found.into_values())?;
    }
    let raw = compute_stats(&dataset);
    let (kept, removed, english_stats) = if keep_all {
        (dataset, 0, None)
    } else {
        let (unique, removed) = deduplicate(&dataset);
        let (english, stats) = filter_english(&unique);
        (english, removed, Some(stats))
    };

    #[derive(Serialize)]
    struct Summary {
        ingested: usize,
        rejected: usize,
        duplicates_removed: usize,
        retained: usize,
        raw: intent_cascade::corpus::CorpusStats,
        #[serde(skip_serializing_if = "Option::is_none")]
        after_dedup: Option<intent_cascade::corpus::CorpusStats>,
    }
    let summary = Summary {
        ingested: raw.total_posts as usize,
        rejected: ingested.rejects.len(),
        duplicates_removed: removed,
        retained: kept.len(),
        raw,
        after_dedup: english_stats,
    };

    let out = &config.out_dir;
    write_dataset(&out.join("corpus.jsonl"), &fp, &kept)?;
    let mut rejects = stamp(&fp).into_bytes();
    write_rejects(&ingested.rejects, &mut rejects)?;
    write_file(&out.join("rejects.jsonl"), &rejects)?;
    write_json(&out.join("stats.json"), &fp, &summary)?;
    println!(
        "ingested={} rejected={} duplicates_removed={} retained={}",
        summary.ingested, summary.rejected, summary.duplicates_removed, summary.retained
    );
    Ok(())
}

fn cmd_bootstrap(config: &RunConfig, input: Option<&Path>, seed_tags: &[String]) -> Result<()> {
    let input = input_or_corpus(input, config)?;
    let mut config = config.clone();
    if !seed_tags.is_empty() {
        config.seed_tags = seed_tags.to_vec();
    }
    let fp = fingerprint(&config, "bootstrap", &[input])?;
    let dataset = read_dataset(input)?;
    let index = build_tag_index(&dataset);
    let (collected, trace) = bootstrap_collect(&index, &config.seed_tags, config.max_posts, config.per_tag_limit)?;
    write_dataset(&config.out_dir.join("collected.jsonl"), &fp, &collected)?;
    write_json(&config.out_dir.join("crawl.json"), &fp, &trace)?;
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    println!("collected={} rounds={} converged={}", collected.len(), trace.rounds, trace.converged);
    Ok(())
}

fn table(counts: &[u64]) -> Result<AgreementTable> {
    match counts {
        &[a, b, c, d] => Ok(AgreementTable::new(a, b, c, d)),
        _ => Err(ConfigError(format!("expected 4 counts, got {}", counts.len())).into()),
    }
}

fn print_kappa(name: &str, t: &AgreementTable) -> Result<()> {
    let k = cohens_kappa(t)?;
    println!(
        "{name}: n={} po={:.4} pe={:.4} kappa={:.4}",
        t.total(),
        k.observed_agreement,
        k.expected_agreement,
        k.kappa
    );
    Ok(())
}

fn cmd_agreement(annotations: Option<&Path>, counts: Option<&[u64]>, intent_counts: Option<&[u64]>) -> Result<()> {
    if let Some(path) = annotations {
        let records = read_annotations(open(path)?).with_context(|| format!("reading {}", path.display()))?;
        if records.is_empty() {
            return Err(InputError(format!("empty input: {} has no annotations", path.display())).into());
        }
        let p = protocol_agreement(&records)?;
        println!("annotators: {} {}", p.annotators.0, p.annotators.1);
        print_kappa("topic", &p.topic)?;
        if p.intent.total() > 0 {
            print_kappa("intent", &p.intent)?;
        }
        return Ok(());
    }
    let counts = counts.ok_or_else(|| ConfigError("pass --annotations or --counts".into()))?;
    print_kappa("topic", &table(counts)?)?;
    if let Some(c) = intent_counts {
        print_kappa("intent", &table(c)?)?;
    }
    Ok(())
}

fn cmd_extract(config: &RunConfig, input: Option<&Path>) -> Result<()> {
    let input = input_or_corpus(input, config)?;
    let fp = fingerprint(config, "extract", &[input])?;
    let lex = lexicons(config)?;
    let dataset = read_dataset(input)?;
    let features = extract_dataset(&dataset, &lex);
    let mut buf = stamp(&fp).into_bytes();
    write_features_jsonl(&mut buf, &features)?;
    write_file(&config.out_dir.join("features.jsonl"), &buf)?;
    println!("posts={}", features.len());
    Ok(())
}

/// The trained model plus the concept lexicon stage one needs.
#[derive(Serialize, Deserialize)]
struct ModelArtifact {
    config_fingerprint: String,
    concepts: BTreeSet<String>,
    model: OneClassModel,
}

fn cmd_train(config: &RunConfig, features: &Path, labels: &Path) -> Result<()> {
    let fp = fingerprint(config, "train", &[features, labels])?;
    let feats = read_features(features, config)?;
    let truth = read_truth(labels)?;
    let whitelist = harvested_whitelist(&feats, &truth, config.concept_sample, config.seed());
    let (mut positives, mut negatives) = (Vec::new(), Vec::new());
    for f in &feats {
        match truth.get(&f.post_id) {
            Some(GroundTruth { topic: true, intent: Some(true) }) => positives.push(f.vector.clone()),
            Some(GroundTruth { topic: true, intent: Some(false) }) => negatives.push(f.vector.clone()),
            Some(GroundTruth { topic: false, .. }) if config.condition == TestCondition::Td1 => {
                negatives.push(f.vector.clone())
            }
            _ => {}
        }
    }
    let tc = config.train_config();
    let model = if config.supervised {
        train_supervised(config.algorithm, &positives, &negatives, &tc)?
    } else {
        train(config.algorithm, &positives, &tc)?
    };
    let artifact = ModelArtifact { config_fingerprint: fp, concepts: whitelist.concept_lexicon, model };
    let mut text = serde_json::to_string_pretty(&artifact)?;
    text.push('\n');
    write_file(&config.models.join("model.json"), text.as_bytes())?;
    println!(
        "algorithm={} positives={} threshold={}",
        config.algorithm.as_str(),
        positives.len(),
        artifact.model.decision_threshold
    );
    Ok(())
}

fn cmd_classify(config: &RunConfig, features: &Path, model: Option<&Path>) -> Result<()> {
    let default_model = config.models.join("model.json");
    let model_path = model.unwrap_or(&default_model);
    let fp = fingerprint(config, "classify", &[features, model_path])?;
    let feats = read_features(features, config)?;
    let text = std::fs::read_to_string(model_path).with_context(|| format!("reading {}", model_path.display()))?;
    let artifact: ModelArtifact =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", model_path.display()))?;
    let whitelist = TopicWhitelist::default().with_concepts(artifact.concepts);
    let decisions = run_cascade(&feats, &whitelist, config.top_k, &artifact.model)?;
    let mut out = stamp(&fp);
    out.push_str("post_id,topic,intent,score\n");
    let (mut topic, mut intent) = (0, 0);
    for d in &decisions {
        let t = match d.topic {
            TopicClass::Topic => {
                topic += 1;
                "topic"
            }
            TopicClass::Unknown => "unknown",
        };
        let i = match d.intent {
            Some(IntentClass::Intent) => {
                intent += 1;
                "intent"
            }
            Some(IntentClass::Unknown) => "unknown",
            None => "",
        };
        let s = d.score.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{t},{i},{s}\n", d.post_id));
    }
    write_file(&config.out_dir.join("predictions.csv"), out.as_bytes())?;
    println!("posts={} topic={topic} intent={intent}", decisions.len());
    Ok(())
}

struct Prediction {
    post_id: String,
    topic: bool,
    intent: bool,
    score: Option<f64>,
}

fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(open(path)?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.with_context(|| format!("reading {}", path.display()))?;
        let bad = |m: &str| InputError(format!("{}: line {}: {m}", path.display(), row.position().map_or(0, |p| p.line())));
        if row.len() != 4 {
            return Err(bad("expected post_id,topic,intent,score").into());
        }
        let score = match row[3].trim() {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("bad score"))?),
        };
        out.push(Prediction {
            post_id: row[0].to_owned(),
            topic: &row[1] == "topic",
            intent: &row[2] == "intent",
            score,
        });
    }
    if out.is_empty() {
        return Err(InputError(format!("empty input: {} has no predictions", path.display())).into());
    }
    Ok(out)
}

fn cmd_evaluate(config: &RunConfig, predictions: &Path, labels: &Path) -> Result<()> {
    let fp = fingerprint(config, "evaluate", &[predictions, labels])?;
    let preds = read_predictions(predictions)?;
    let truth = read_truth(labels)?;
    let mut metrics = Vec::new();
    let mut curves = Vec::new();
    let topic = intent_cascade::eval::ConfusionMatrix::from_pairs(
        preds.iter().filter_map(|p| truth.get(&p.post_id).map(|t| (p.topic, t.topic))),
    );
    metrics.push(MetricsRow { name: "topic".into(), matrix: topic, auc: None });
    for condition in [TestCondition::Td1, TestCondition::Td2] {
        let mut matrix = intent_cascade::eval::ConfusionMatrix::default();
        let (mut scores, mut actual) = (Vec::new(), Vec::new());
        for p in preds.iter().filter(|p| p.topic) {
            let Some(t) = truth.get(&p.post_id) else { continue };
            let label = match (t.topic, t.intent) {
                (true, Some(i)) => i,
                (false, _) if condition == TestCondition::Td1 => false,
                _ => continue,
            };
            matrix.add(p.intent, label);
            if let Some(s) = p.score {
                scores.push(s);
                actual.push(label);
            }
        }
        let name = format!("intent_{condition}");
        let curve = roc_curve(&scores, &actual).ok();
        metrics.push(MetricsRow { name: name.clone(), matrix, auc: curve.as_ref().map(|c| c.auc) });
        curves.extend(curve.map(|c| (name, c)));
    }
    let report = Report {
        fingerprint: fp,
        seed: config.seed(),
        metrics,
        curves,
        notes: vec![("predictions".into(), preds.len().to_string()), ("labeled".into(), truth.len().to_string())],
        ..Report::default()
    };
    finish_report(&report, &config.out_dir)
}

fn finish_report(report: &Report, out_dir: &Path) -> Result<()> {
    for path in emit_report(report, out_dir)? {
        println!("wrote {}", path.display());
    }
    for m in &report.metrics {
        let c = &m.matrix;
        let f = |x: Result<f64, EvalError>| x.map_or("undefined".to_string(), intent_cascade::eval::fmt4);
        println!("{}: precision={} recall={}", m.name, f(c.precision()), f(c.recall()));
    }
    Ok(())
}

fn cmd_ablate(config: &RunConfig, features: &Path, labels: &Path) -> Result<()> {
    let fp = fingerprint(config, "ablate", &[features, labels])?;
    let feats = read_features(features, config)?;
    let truth = read_truth(labels)?;
    let whitelist = harvested_whitelist(&feats, &truth, config.concept_sample, config.seed());
    let stage = stage_one(&feats, &whitelist, config.top_k);
    let set = intent_set(&feats, &stage, &truth, config.condition);
    if set.is_empty() {
        return Err(InputError("empty input: no labeled posts reach the intent stage".into()).into());
    }
    let tc = config.train_config();
    let cv = cross_validate(&set.vectors, &set.labels, config.k, config.algorithm, &tc)?;
    let p1 = ablate(&set.vectors, &set.labels, config.algorithm, 1, config.k, &tc)?;
    let p2 = ablate(&set.vectors, &set.labels, config.algorithm, 2, config.k, &tc)?;
    let report = Report {
        fingerprint: fp,
        seed: config.seed(),
        metrics: vec![MetricsRow { name: format!("cv_{}", config.condition), matrix: cv.pooled, auc: None }],
        ablation_p1: Some(p1),
        ablation_p2: Some(p2),
        notes: vec![
            ("algorithm".into(), config.algorithm.as_str().into()),
            ("condition".into(), config.condition.to_string()),
            ("examples".into(), set.len().to_string()),
            ("positives".into(), set.positives().to_string()),
        ],
        ..Report::default()
    };
    finish_report(&report, &config.out_dir)
}

fn cmd_gen_fixture(config: &RunConfig, kind: FixtureKind) -> Result<()> {
    let name = format!("gen-fixture-{kind:?}");
    let fp = fingerprint(config, &name, &[])?;
    let out: PathBuf = config.out_dir.clone();
    match kind {
        FixtureKind::Cascade | FixtureKind::Ablation => {
            let mut spec = if kind == FixtureKind::Cascade { CascadeSpec::default() } else { CascadeSpec::ablation() };
            if let Some(seed) = config.seed {
                spec.seed = seed;
            }
            let f = generate_cascade_with(&spec, &lexicons(config)?)?;
            write_dataset(&out.join("corpus.jsonl"), &fp, &f.dataset)?;
            write_json(&out.join("manifest.json"), &fp, &f.manifest)?;
            write_labels(&out.join("annotations.csv"), &fp, &f.manifest.annotations())?;
            println!("posts={}", f.dataset.len());
        }
        FixtureKind::Corpus | FixtureKind::CorpusFull => {
            let mut spec = if kind == FixtureKind::Corpus { CorpusSpec::small() } else { CorpusSpec::full() };
            if let Some(seed) = config.seed {
                spec.seed = seed;
            }
            let f = generate_corpus(&spec)?;
            write_dataset(&out.join("corpus.jsonl"), &fp, &f.dataset)?;
            write_json(&out.join("manifest.json"), &fp, &f.manifest)?;
            println!("posts={} duplicates={}", f.dataset.len(), f.manifest.duplicates);
        }
        FixtureKind::Agreement => {
            let records = synthesize_annotations(&TOPIC_TABLE, &INTENT_TABLE, "p")?;
            write_labels(&out.join("annotations.csv"), &fp, &records)?;
            #[derive(Serialize)]
            struct Tables {
                topic: AgreementTable,
                intent: AgreementTable,
            }
            write_json(&out.join("manifest.json"), &fp, &Tables { topic: TOPIC_TABLE, intent: INTENT_TABLE })?;
            println!("posts={}", TOPIC_TABLE.total());
        }
    }
    Ok(())
}
