//! Two-annotator agreement for the topic-then-intent labeling protocol.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("label sets differ: only in a {only_a:?}, only in b {only_b:?}")]
    IdMismatch {
        only_a: Vec<String>,
        only_b: Vec<String>,
    },
    #[error("agreement table is empty")]
    EmptyTable,
    #[error("expected agreement is 1, kappa is undefined")]
    DegenerateExpected,
    #[error("line {line}: {reason}")]
    InvalidRecord { line: u64, reason: String },
    #[error("expected exactly two annotators, found {0}")]
    AnnotatorCount(usize),
    #[error("annotator {annotator:?} labeled post {post_id:?} twice")]
    DuplicateLabel { annotator: String, post_id: String },
    #[error("intent table total {intent} differs from topic agreement count {topic}")]
    InconsistentTables { topic: u64, intent: u64 },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicLabel {
    Topic,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntentLabel {
    Intent,
    Na,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub post_id: String,
    pub annotator_id: String,
    pub topic_label: TopicLabel,
    /// Only present when `topic_label` is `Topic`.
    pub intent_label: Option<IntentLabel>,
}

/// 2x2 counts of two annotators' binary decisions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementTable {
    pub both_positive: u64,
    pub a_only: u64,
    pub b_only: u64,
    pub both_negative: u64,
}

impl AgreementTable {
    pub fn new(both_positive: u64, a_only: u64, b_only: u64, both_negative: u64) -> Self {
        AgreementTable { both_positive, a_only, b_only, both_negative }
    }

    pub fn total(&self) -> u64 {
        self.both_positive + self.a_only + self.b_only + self.both_negative
    }

    /// The same table with the annotators swapped.
    pub fn transpose(&self) -> Self {
        AgreementTable { a_only: self.b_only, b_only: self.a_only, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    pub kappa: f64,
}

/// Count agreement over two labelings of the same posts.
pub fn agreement_table(
    labels_a: &BTreeMap<String, bool>,
    labels_b: &BTreeMap<String, bool>,
) -> Result<AgreementTable, AnnotationError> {
    let only_a: Vec<String> = labels_a.keys().filter(|k| !labels_b.contains_key(*k)).cloned().collect();
    let only_b: Vec<String> = labels_b.keys().filter(|k| !labels_a.contains_key(*k)).cloned().collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(AnnotationError::IdMismatch { only_a, only_b });
    }
    let mut t = AgreementTable::default();
    for (id, &a) in labels_a {
        match (a, labels_b[id]) {
            (true, true) => t.both_positive += 1,
            (true, false) => t.a_only += 1,
            (false, true) => t.b_only += 1,
            (false, false) => t.both_negative += 1,
        }
    }
    Ok(t)
}

/// Cohen's kappa with the usual two-category chance agreement
/// `Pe = p_a(+) p_b(+) + p_a(-) p_b(-)`.
pub fn cohens_kappa(table: &AgreementTable) -> Result<KappaResult, AnnotationError> {
    let n = table.total();
    if n == 0 {
        return Err(AnnotationError::EmptyTable);
    }
    let n = n as f64;
    let po = (table.both_positive + table.both_negative) as f64 / n;
    let a_pos = (table.both_positive + table.a_only) as f64 / n;
    let b_pos = (table.both_positive + table.b_only) as f64 / n;
    let pe = a_pos * b_pos + (1.0 - a_pos) * (1.0 - b_pos);
    if pe >= 1.0 {
        return Err(AnnotationError::DegenerateExpected);
    }
    Ok(KappaResult {
        observed_agreement: po,
        expected_agreement: pe,
        kappa: (po - pe) / (1.0 - pe),
    })
}

const CSV_HEADER: [&str; 4] = ["post_id", "annotator_id", "topic_label", "intent_label"];

/// Read `post_id,annotator_id,topic_label,intent_label` rows. Labels are
/// `topic`/`na` and `intent`/`na`; an empty intent cell means absent. Lines
/// starting with `#` are comments.
pub fn read_annotations<R: Read>(reader: R) -> Result<Vec<AnnotationRecord>, AnnotationError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |reason: String| AnnotationError::InvalidRecord { line, reason };
        if row.len() != CSV_HEADER.len() {
            return Err(bad(format!("expected 4 fields, found {}", row.len())));
        }
        let topic_label = match row[2].to_ascii_lowercase().as_str() {
            "topic" => TopicLabel::Topic,
            "na" => TopicLabel::Na,
            other => return Err(bad(format!("unknown topic label {other:?}"))),
        };
        let intent_label = match row[3].to_ascii_lowercase().as_str() {
            "" => None,
            "intent" => Some(IntentLabel::Intent),
            "na" => Some(IntentLabel::Na),
            other => return Err(bad(format!("unknown intent label {other:?}"))),
        };
        if intent_label.is_some() && topic_label != TopicLabel::Topic {
            return Err(bad("intent label on a post not labeled topic".into()));
        }
        if row[0].is_empty() || row[1].is_empty() {
            return Err(bad("empty post_id or annotator_id".into()));
        }
        out.push(AnnotationRecord {
            post_id: row[0].to_owned(),
            annotator_id: row[1].to_owned(),
            topic_label,
            intent_label,
        });
    }
    Ok(out)
}

pub fn write_annotations<W: Write>(writer: W, records: &[AnnotationRecord]) -> Result<(), AnnotationError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let topic = match r.topic_label {
            TopicLabel::Topic => "topic",
            TopicLabel::Na => "na",
        };
        let intent = match r.intent_label {
            None => "",
            Some(IntentLabel::Intent) => "intent",
            Some(IntentLabel::Na) => "na",
        };
        w.write_record([r.post_id.as_str(), r.annotator_id.as_str(), topic, intent])?;
    }
    w.flush()?;
    Ok(())
}

/// Both phases of the protocol for one annotator pair. The intent table
/// covers only posts that both annotators labeled topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolAgreement {
    pub annotators: (String, String),
    pub topic: AgreementTable,
    pub intent: AgreementTable,
}

/// Consensus labels for one post: `topic` when both annotators agree on the
/// topic phase, `intent` when they also agree on the intent phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub topic: bool,
    pub intent: Option<bool>,
}

type Labels = BTreeMap<String, (TopicLabel, Option<IntentLabel>)>;

type Annotator = (String, Labels);

fn split_annotators(records: &[AnnotationRecord]) -> Result<(Annotator, Annotator), AnnotationError> {
    let mut by: BTreeMap<&str, Labels> = BTreeMap::new();
    for r in records {
        let labels = by.entry(&r.annotator_id).or_default();
        if labels.insert(r.post_id.clone(), (r.topic_label, r.intent_label)).is_some() {
            return Err(AnnotationError::DuplicateLabel {
                annotator: r.annotator_id.clone(),
                post_id: r.post_id.clone(),
            });
        }
    }
    if by.len() != 2 {
        return Err(AnnotationError::AnnotatorCount(by.len()));
    }
    let mut it = by.into_iter();
    let (a, la) = it.next().unwrap();
    let (b, lb) = it.next().unwrap();
    Ok(((a.to_owned(), la), (b.to_owned(), lb)))
}

/// Tables for both phases. Annotators are ordered by id.
pub fn protocol_agreement(records: &[AnnotationRecord]) -> Result<ProtocolAgreement, AnnotationError> {
    let ((a, la), (b, lb)) = split_annotators(records)?;
    let topic_of = |l: &Labels| -> BTreeMap<String, bool> {
        l.iter().map(|(k, v)| (k.clone(), v.0 == TopicLabel::Topic)).collect()
    };
    let topic = agreement_table(&topic_of(&la), &topic_of(&lb))?;
    let both_topic: BTreeSet<&String> = la
        .iter()
        .filter(|(k, v)| v.0 == TopicLabel::Topic && lb[*k].0 == TopicLabel::Topic)
        .map(|(k, _)| k)
        .collect();
    let intent_of = |l: &Labels| -> BTreeMap<String, bool> {
        both_topic
            .iter()
            .map(|k| ((*k).clone(), l[*k].1 == Some(IntentLabel::Intent)))
            .collect()
    };
    let intent = agreement_table(&intent_of(&la), &intent_of(&lb))?;
    Ok(ProtocolAgreement { annotators: (a, b), topic, intent })
}

/// Consensus labels for posts both annotators agree on at the topic phase;
/// posts with conflicting topic labels are left out.
pub fn ground_truth(records: &[AnnotationRecord]) -> Result<BTreeMap<String, GroundTruth>, AnnotationError> {
    let ((_, la), (_, lb)) = split_annotators(records)?;
    let mut out = BTreeMap::new();
    for (id, &(ta, ia)) in &la {
        let Some(&(tb, ib)) = lb.get(id) else { continue };
        if ta != tb {
            continue;
        }
        let topic = ta == TopicLabel::Topic;
        let intent = if !topic {
            Some(false)
        } else if ia.is_some() && ia == ib {
            Some(ia == Some(IntentLabel::Intent))
        } else {
            None
        };
        out.insert(id.clone(), GroundTruth { topic, intent });
    }
    Ok(out)
}

/// Annotation records from two annotators `a` and `b` whose protocol tables
/// are exactly `topic` and `intent`. Post ids are `prefix` followed by a
/// zero-padded index; the both-topic posts come first.
pub fn synthesize_annotations(
    topic: &AgreementTable,
    intent: &AgreementTable,
    prefix: &str,
) -> Result<Vec<AnnotationRecord>, AnnotationError> {
    if intent.total() != topic.both_positive {
        return Err(AnnotationError::InconsistentTables {
            topic: topic.both_positive,
            intent: intent.total(),
        });
    }
    let width = topic.total().to_string().len();
    let mut out = Vec::with_capacity(2 * topic.total() as usize);
    let mut next = 0u64;
    let mut push = |ta: TopicLabel, ia: Option<IntentLabel>, tb: TopicLabel, ib: Option<IntentLabel>| {
        let id = format!("{prefix}{next:0width$}");
        next += 1;
        out.push(AnnotationRecord { post_id: id.clone(), annotator_id: "a".into(), topic_label: ta, intent_label: ia });
        out.push(AnnotationRecord { post_id: id, annotator_id: "b".into(), topic_label: tb, intent_label: ib });
    };
    use IntentLabel::{Intent, Na as INa};
    use TopicLabel::{Na as TNa, Topic};
    let intent_cells = [
        (intent.both_positive, Intent, Intent),
        (intent.a_only, Intent, INa),
        (intent.b_only, INa, Intent),
        (intent.both_negative, INa, INa),
    ];
    for (n, ia, ib) in intent_cells {
        for _ in 0..n {
            push(Topic, Some(ia), Topic, Some(ib));
        }
    }
    for _ in 0..topic.a_only {
        push(Topic, Some(INa), TNa, None);
    }
    for _ in 0..topic.b_only {
        push(TNa, None, Topic, Some(INa));
    }
    for _ in 0..topic.both_negative {
        push(TNa, None, TNa, None);
    }
    Ok(out)
}
