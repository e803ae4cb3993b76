use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AblationReport, ConfusionMatrix, EvalError, RocCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub name: String,
    pub matrix: ConfusionMatrix,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub fingerprint: String,
    pub seed: u64,
    pub metrics: Vec<MetricsRow>,
    pub curves: Vec<(String, RocCurve)>,
    pub ablation_p1: Option<AblationReport>,
    pub ablation_p2: Option<AblationReport>,
    /// Extra `key=value` lines for the summary.
    pub notes: Vec<(String, String)>,
}

pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn opt4(x: Option<f64>) -> String {
    x.map(fmt4).unwrap_or_default()
}

fn header(fingerprint: &str) -> String {
    format!("# config_fingerprint={fingerprint}\n")
}

fn metrics_csv(r: &Report) -> String {
    let mut s = header(&r.fingerprint);
    s.push_str("name,tp,fp,fn,tn,precision,recall,auc\n");
    for m in &r.metrics {
        let c = &m.matrix;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            m.name,
            c.tp,
            c.fp,
            c.fn_,
            c.tn,
            opt4(c.precision().ok()),
            opt4(c.recall().ok()),
            opt4(m.auc)
        );
    }
    s
}

fn roc_csv(r: &Report) -> String {
    let mut s = header(&r.fingerprint);
    s.push_str("curve,fpr,tpr\n");
    for (name, c) in &r.curves {
        for (x, y) in &c.points {
            let _ = writeln!(s, "{name},{},{}", fmt4(*x), fmt4(*y));
        }
    }
    s
}

fn ablation_csv(fingerprint: &str, a: Option<&AblationReport>) -> String {
    let mut s = header(fingerprint);
    s.push_str("removed,baseline_precision,ablated_precision,percent_fall,baseline_recall,ablated_recall\n");
    for row in a.map(|a| a.rows.as_slice()).unwrap_or_default() {
        let removed: Vec<&str> = row.removed.iter().map(|g| g.as_str()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            removed.join("+"),
            fmt4(row.baseline_precision),
            opt4(row.ablated_precision),
            opt4(row.percent_fall),
            opt4(row.baseline_recall),
            opt4(row.ablated_recall)
        );
    }
    s
}

fn summary(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config_fingerprint={}", r.fingerprint);
    let _ = writeln!(s, "seed={}", r.seed);
    for (k, v) in &r.notes {
        let _ = writeln!(s, "{k}={v}");
    }
    for m in &r.metrics {
        let c = &m.matrix;
        let _ = writeln!(
            s,
            "{}: tp={} fp={} fn={} tn={} precision={} recall={}",
            m.name,
            c.tp,
            c.fp,
            c.fn_,
            c.tn,
            c.precision().ok().map_or("undefined".into(), fmt4),
            c.recall().ok().map_or("undefined".into(), fmt4)
        );
    }
    for (name, c) in &r.curves {
        let _ = writeln!(s, "{name}: auc={}", fmt4(c.auc));
    }
    for a in [&r.ablation_p1, &r.ablation_p2].into_iter().flatten() {
        let _ = writeln!(s, "ablation p={} algorithm={} baseline_precision={}", a.p, a.algorithm, fmt4(a.baseline_precision));
        for row in &a.rows {
            let removed: Vec<&str> = row.removed.iter().map(|g| g.as_str()).collect();
            let _ = writeln!(s, "  -{}: percent_fall={}", removed.join("+"), row.percent_fall.map_or("undefined".into(), fmt4));
        }
    }
    s
}

/// Write `metrics.csv`, `roc_points.csv`, `ablation_p1.csv`,
/// `ablation_p2.csv` and `summary.txt` into `out_dir`. Every file carries
/// the config fingerprint; identical reports give identical bytes.
pub fn emit_report(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(out_dir).map_err(|source| EvalError::Io { path: out_dir.display().to_string(), source })?;
    let files = [
        ("metrics.csv", metrics_csv(report)),
        ("roc_points.csv", roc_csv(report)),
        ("ablation_p1.csv", ablation_csv(&report.fingerprint, report.ablation_p1.as_ref())),
        ("ablation_p2.csv", ablation_csv(&report.fingerprint, report.ablation_p2.as_ref())),
        ("summary.txt", summary(report)),
    ];
    let mut out = Vec::new();
    for (name, body) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_four_row() {
        let r = Report {
            fingerprint: "abc".into(),
            metrics: vec![MetricsRow { name: "topic".into(), matrix: ConfusionMatrix::new(253, 93, 39, 2034), auc: None }],
            ..Report::default()
        };
        let csv = metrics_csv(&r);
        assert_eq!(csv, "# config_fingerprint=abc\nname,tp,fp,fn,tn,precision,recall,auc\ntopic,253,93,39,2034,0.7312,0.8664,\n");
    }

    #[test]
    fn empty_ablation_has_headers_only() {
        let csv = ablation_csv("f", None);
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn writes_all_files_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let r = Report { fingerprint: "f".into(), ..Report::default() };
        let a = emit_report(&r, dir.path()).unwrap();
        let first: Vec<Vec<u8>> = a.iter().map(|p| std::fs::read(p).unwrap()).collect();
        emit_report(&r, dir.path()).unwrap();
        let second: Vec<Vec<u8>> = a.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        assert_eq!(a.len(), 5);
        for bytes in &first {
            assert!(String::from_utf8_lossy(bytes).contains("config_fingerprint=f"));
        }
    }
}
