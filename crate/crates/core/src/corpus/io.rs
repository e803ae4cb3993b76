use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use super::{Blogger, CorpusError, Dataset, Post, PostType};

/// Record encodings accepted by [`ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown record format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    MalformedRecord(String),
    MissingField(&'static str),
    InvalidField(&'static str),
    TagCountMismatch,
    UnsupportedPostType(String),
    DuplicatePostId,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::MalformedRecord(detail) => write!(f, "malformed record: {detail}"),
            RejectReason::MissingField(field) => write!(f, "missing field {field}"),
            RejectReason::InvalidField(field) => write!(f, "invalid field {field}"),
            RejectReason::TagCountMismatch => f.write_str("tag count mismatch"),
            RejectReason::UnsupportedPostType(t) => write!(f, "unsupported post type {t}"),
            RejectReason::DuplicatePostId => f.write_str("duplicate post_id"),
        }
    }
}

impl Serialize for RejectReason {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// One input record that could not be turned into a [`Post`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reject {
    pub line_number: u64,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub dataset: Dataset,
    pub rejects: Vec<Reject>,
}

/// Loose view of one record; every field except the two required ones is
/// optional on input.
#[derive(Debug, Default, Deserialize)]
struct RawPost {
    post_id: Option<Value>,
    timestamp: Option<i64>,
    gmt: Option<i32>,
    blogger: Option<String>,
    url: Option<String>,
    #[serde(rename = "type")]
    post_type: Option<String>,
    tags: Option<Vec<String>>,
    num_tags: Option<usize>,
    notes: Option<u64>,
    reblogged_from: Option<String>,
    title: Option<String>,
    description: Option<String>,
}

impl RawPost {
    fn into_post(self) -> Result<Post, RejectReason> {
        let post_id = match self.post_id {
            Some(Value::String(s)) if !s.trim().is_empty() => s,
            Some(Value::Number(n)) => n.to_string(),
            Some(_) => return Err(RejectReason::InvalidField("post_id")),
            None => return Err(RejectReason::MissingField("post_id")),
        };
        let description = self
            .description
            .ok_or(RejectReason::MissingField("description"))?;
        let post_type = match self.post_type {
            None => PostType::Text,
            Some(t) => PostType::parse(&t).ok_or(RejectReason::UnsupportedPostType(t))?,
        };
        let tags = self.tags.unwrap_or_default();
        let num_tags = self.num_tags.unwrap_or(tags.len());
        if num_tags != tags.len() {
            return Err(RejectReason::TagCountMismatch);
        }
        Ok(Post {
            post_id,
            timestamp: self.timestamp.unwrap_or(0),
            gmt_offset: self.gmt.unwrap_or(0),
            blogger_id: self.blogger.unwrap_or_default(),
            url: self.url.unwrap_or_default(),
            post_type,
            tags,
            num_tags,
            notes: self.notes.unwrap_or(0),
            reblogged_from: self.reblogged_from,
            title: self.title,
            description,
        })
    }
}

struct Collector {
    posts: Vec<Post>,
    seen: HashSet<String>,
    rejects: Vec<Reject>,
}

impl Collector {
    fn new() -> Self {
        Collector {
            posts: Vec::new(),
            seen: HashSet::new(),
            rejects: Vec::new(),
        }
    }

    fn push(&mut self, line_number: u64, parsed: Result<Post, RejectReason>) {
        let reason = match parsed {
            Ok(post) if self.seen.contains(&post.post_id) => RejectReason::DuplicatePostId,
            Ok(post) => {
                self.seen.insert(post.post_id.clone());
                self.posts.push(post);
                return;
            }
            Err(reason) => reason,
        };
        self.rejects.push(Reject { line_number, reason });
    }

    fn finish(self) -> Result<Ingested, CorpusError> {
        Ok(Ingested {
            dataset: Dataset::from_posts(self.posts)?,
            rejects: self.rejects,
        })
    }
}

/// Read posts from a JSONL or CSV stream.
///
/// Well-formed records become posts; malformed ones are reported in
/// [`Ingested::rejects`] with their 1-based line number. A second record with
/// an already-seen `post_id` is rejected. Stream and UTF-8 failures are fatal.
/// JSONL lines starting with `#` are comments.
pub fn ingest<R: BufRead>(source: R, format: Format) -> Result<Ingested, CorpusError> {
    match format {
        Format::Jsonl => ingest_jsonl(source),
        Format::Csv => ingest_csv(source),
    }
}

fn ingest_jsonl<R: BufRead>(source: R) -> Result<Ingested, CorpusError> {
    let mut out = Collector::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed = serde_json::from_str::<RawPost>(&line)
            .map_err(|e| RejectReason::MalformedRecord(e.to_string()))
            .and_then(RawPost::into_post);
        out.push(idx as u64 + 1, parsed);
    }
    out.finish()
}

const CSV_HEADER: [&str; 12] = [
    "post_id",
    "timestamp",
    "gmt",
    "blogger",
    "url",
    "type",
    "tags",
    "num_tags",
    "notes",
    "reblogged_from",
    "title",
    "description",
];

fn ingest_csv<R: BufRead>(source: R) -> Result<Ingested, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let cols: Vec<Option<usize>> = CSV_HEADER.iter().map(|h| column(h)).collect();

    let mut out = Collector::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                out.push(line, raw_from_csv(&record, &cols).and_then(RawPost::into_post));
            }
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) | csv::ErrorKind::Utf8 { .. } => return Err(e.into()),
                _ => {
                    let line = e.position().map_or(0, |p| p.line());
                    out.push(line, Err(RejectReason::MalformedRecord(e.to_string())));
                }
            },
        }
    }
    out.finish()
}

fn raw_from_csv(record: &csv::StringRecord, cols: &[Option<usize>]) -> Result<RawPost, RejectReason> {
    let cell = |i: usize| cols[i].and_then(|c| record.get(c));
    let text = |i: usize| cell(i).filter(|s| !s.is_empty()).map(str::to_owned);
    fn number<T: std::str::FromStr>(raw: Option<&str>, field: &'static str) -> Result<Option<T>, RejectReason> {
        match raw.map(str::trim).filter(|s| !s.is_empty()) {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| RejectReason::InvalidField(field)),
        }
    }
    let tags = cell(6).map(|s| {
        if s.is_empty() {
            Vec::new()
        } else {
            s.split(';').map(str::to_owned).collect()
        }
    });
    Ok(RawPost {
        post_id: text(0).map(Value::String),
        timestamp: number(cell(1), "timestamp")?,
        gmt: number(cell(2), "gmt")?,
        blogger: text(3),
        url: text(4),
        post_type: text(5),
        tags,
        num_tags: number(cell(7), "num_tags")?,
        notes: number(cell(8), "notes")?,
        reblogged_from: text(9),
        title: text(10),
        // An empty description is still a description.
        description: cell(11).map(str::to_owned),
    })
}

pub fn write_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<(), CorpusError> {
    for post in dataset.posts() {
        serde_json::to_writer(&mut out, post)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// CSV with the same column names as the JSONL form; tags are joined with `;`.
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in dataset.posts() {
        w.write_record([
            p.post_id.as_str(),
            &p.timestamp.to_string(),
            &p.gmt_offset.to_string(),
            &p.blogger_id,
            &p.url,
            p.post_type.as_str(),
            &p.tags.join(";"),
            &p.num_tags.to_string(),
            &p.notes.to_string(),
            p.reblogged_from.as_deref().unwrap_or(""),
            p.title.as_deref().unwrap_or(""),
            &p.description,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rejects<W: Write>(rejects: &[Reject], mut out: W) -> Result<(), CorpusError> {
    for r in rejects {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read bloggers from JSONL. Duplicate ids are an error.
pub fn ingest_bloggers<R: BufRead>(source: R) -> Result<BTreeMap<String, Blogger>, CorpusError> {
    let mut out = BTreeMap::new();
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let b: Blogger = serde_json::from_str(&line)?;
        if out.contains_key(&b.blogger_id) {
            return Err(CorpusError::DuplicateBloggerId(b.blogger_id));
        }
        out.insert(b.blogger_id.clone(), b);
    }
    Ok(out)
}
