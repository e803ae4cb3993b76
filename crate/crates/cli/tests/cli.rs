use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_intent-cascade"));
    c.env_remove("INTENT_CASCADE_SEED");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = run(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    let start = line.find(&format!("{key}=")).unwrap() + key.len() + 1;
    line[start..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn agreement_on_table_fixture_prints_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen-fixture", "--kind", "agreement", "--out-dir", "ag"], d);
    let out = ok(&["agreement", "--annotations", "ag/annotations.csv"], d);
    let topic = out.lines().find(|l| l.starts_with("topic:")).unwrap();
    assert!((field(topic, "po") - 0.985).abs() <= 0.001, "{topic}");
    let kappa = field(topic, "kappa");
    assert!((0.91..=0.94).contains(&kappa), "{topic}");
    assert!(field(topic, "pe") > 0.0);
    let intent = out.lines().find(|l| l.starts_with("intent:")).unwrap();
    assert!((field(intent, "po") - 0.952).abs() <= 0.001, "{intent}");

    let counts = ok(&["agreement", "--counts", "292,24,13,2127"], d);
    assert_eq!(counts.lines().next().unwrap(), topic);
}

#[test]
fn evaluate_rejects_empty_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen-fixture", "--kind", "agreement", "--out-dir", "ag"], d);
    std::fs::write(d.join("empty.csv"), "").unwrap();
    std::fs::write(d.join("header_only.csv"), "post_id,topic,intent,score\n").unwrap();
    for file in ["empty.csv", "header_only.csv"] {
        let out = run(&["evaluate", "--predictions", file, "--labels", "ag/annotations.csv"], d);
        assert!(!out.status.success());
        let err = stderr(&out);
        assert!(err.contains("empty input"), "{err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.starts_with("error["), "{err}");
    }
}

#[test]
fn invalid_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("range.toml"), "tau = 1.5\n").unwrap();
    std::fs::write(d.join("unknown.toml"), "no_such_key = 1\n").unwrap();
    std::fs::write(d.join("syntax.toml"), "top_k = = 3\n").unwrap();
    for cfg in ["range.toml", "unknown.toml", "syntax.toml", "missing.toml"] {
        let out = run(&["--config", cfg, "gen-fixture", "--kind", "corpus"], d);
        assert_eq!(out.status.code(), Some(2), "{cfg}");
        assert!(stderr(&out).starts_with("error[config]"), "{}", stderr(&out));
    }
    let out = run(&["gen-fixture", "--kind", "corpus", "--k", "1"], d);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["no-such-command"], d).status.code(), Some(2));
}

#[test]
fn runtime_errors_are_one_machine_readable_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["extract", "--input", "missing.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error[io]: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

const REPORT_FILES: [&str; 5] = ["metrics.csv", "roc_points.csv", "ablation_p1.csv", "ablation_p2.csv", "summary.txt"];

fn pipeline(d: &Path, out: &str, extra: &[&str]) {
    let go = |args: &[&str]| {
        let mut all: Vec<&str> = args.to_vec();
        all.extend_from_slice(extra);
        ok(&all, d)
    };
    go(&["gen-fixture", "--kind", "cascade", "--out-dir", "fx"]);
    let o = format!("{out}/ingest");
    go(&["ingest", "--input", "fx/corpus.jsonl", "--out-dir", &o]);
    let o = format!("{out}/extract");
    go(&["extract", "--input", &format!("{out}/ingest/corpus.jsonl"), "--out-dir", &o]);
    let feats = format!("{out}/extract/features.jsonl");
    go(&["train", "--features", &feats, "--labels", "fx/annotations.csv", "--models", &format!("{out}/models")]);
    go(&["classify", "--features", &feats, "--models", &format!("{out}/models"), "--out-dir", &format!("{out}/cl")]);
    let preds = format!("{out}/cl/predictions.csv");
    go(&["evaluate", "--predictions", &preds, "--labels", "fx/annotations.csv", "--out-dir", &format!("{out}/report")]);
    go(&["ablate", "--features", &feats, "--labels", "fx/annotations.csv", "--out-dir", &format!("{out}/ablation")]);
}

fn artifacts(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn full_pipeline_writes_every_report_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d, "run1", &[]);
    pipeline(d, "run2", &[]);

    for sub in ["report", "ablation"] {
        for f in REPORT_FILES {
            let p = d.join("run1").join(sub).join(f);
            assert!(p.is_file(), "{}", p.display());
        }
    }
    let metrics = std::fs::read_to_string(d.join("run1/report/metrics.csv")).unwrap();
    assert!(metrics.starts_with("# config_fingerprint="));
    for name in ["topic,", "intent_td1,", "intent_td2,"] {
        assert!(metrics.lines().any(|l| l.starts_with(name)), "{metrics}");
    }
    // p=1 has five rows, p=2 ten, after the fingerprint and header lines.
    let rows = |f: &str| std::fs::read_to_string(d.join("run1/ablation").join(f)).unwrap().lines().count() - 2;
    assert_eq!((rows("ablation_p1.csv"), rows("ablation_p2.csv")), (5, 10));

    let a = artifacts(&d.join("run1"));
    let b = artifacts(&d.join("run2"));
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for ((na, ba), (nb, bb)) in a.iter().zip(&b) {
        assert_eq!(na, nb);
        assert_eq!(ba, bb, "{na} differs between runs");
        let text = String::from_utf8_lossy(ba);
        assert!(text.contains("config_fingerprint"), "{na} lacks a fingerprint");
    }
}

#[test]
fn seed_env_var_overrides_fixture_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen-fixture", "--kind", "corpus", "--out-dir", "default"], d);
    let out = bin()
        .args(["gen-fixture", "--kind", "corpus", "--out-dir", "env"])
        .env("INTENT_CASCADE_SEED", "4242")
        .current_dir(d)
        .output()
        .unwrap();
    assert!(out.status.success());
    ok(&["gen-fixture", "--kind", "corpus", "--out-dir", "flag", "--seed", "4242"], d);
    let read = |s: &str| std::fs::read(d.join(s).join("corpus.jsonl")).unwrap();
    assert_ne!(read("default"), read("env"));
    assert_eq!(read("env"), read("flag"));
    let manifest = std::fs::read_to_string(d.join("env/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 4242"));
}

#[test]
fn config_file_values_apply_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), "out_dir = \"from_file\"\nseed = 5\n").unwrap();
    ok(&["--config", "run.toml", "gen-fixture", "--kind", "corpus"], d);
    assert!(d.join("from_file/manifest.json").is_file());
    ok(&["--config", "run.toml", "gen-fixture", "--kind", "corpus", "--out-dir", "from_flag", "--seed", "6"], d);
    let m = std::fs::read_to_string(d.join("from_flag/manifest.json")).unwrap();
    assert!(m.contains("\"seed\": 6"), "{m}");
}
