//! Post and blogger records, ingestion, normalization, deduplication and
//! language filtering.

mod dedup;
mod io;
mod language;
mod stats;
mod text;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dedup::deduplicate;
pub use io::{
    ingest, ingest_bloggers, write_csv, write_jsonl, write_rejects, Format, Ingested, Reject,
    RejectReason,
};
pub(crate) use language::BUNDLED_SAMPLES;
pub use language::{detect_language, filter_english, Language, LanguageDetector, LanguageProfile};
pub use stats::{compute_stats, is_url_token, word_count, CorpusStats, LengthHistogram, BUCKET_EDGES};
pub use text::{is_emoticon, normalize_text, EmoticonRange, emoticon_ranges};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate post_id {0:?}")]
    DuplicatePostId(String),
    #[error("duplicate blogger_id {0:?}")]
    DuplicateBloggerId(String),
    #[error("post {post_id:?}: num_tags is {num_tags} but {actual} tags are present")]
    TagCountMismatch {
        post_id: String,
        num_tags: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostType {
    Text,
    Quote,
}

impl PostType {
    pub fn as_str(self) -> &'static str {
        match self {
            PostType::Text => "text",
            PostType::Quote => "quote",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Some(PostType::Text),
            "quote" => Some(PostType::Quote),
            _ => None,
        }
    }
}

/// A single textual post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    /// Offset from GMT in minutes.
    #[serde(rename = "gmt")]
    pub gmt_offset: i32,
    #[serde(rename = "blogger")]
    pub blogger_id: String,
    pub url: String,
    #[serde(rename = "type")]
    pub post_type: PostType,
    pub tags: Vec<String>,
    pub num_tags: usize,
    /// Reblog plus like count.
    pub notes: u64,
    pub reblogged_from: Option<String>,
    pub title: Option<String>,
    pub description: String,
}

impl Post {
    /// A text post with only an id and a description; every other field is
    /// left at its neutral value.
    pub fn new(post_id: impl Into<String>, description: impl Into<String>) -> Self {
        Post {
            post_id: post_id.into(),
            timestamp: 0,
            gmt_offset: 0,
            blogger_id: String::new(),
            url: String::new(),
            post_type: PostType::Text,
            tags: Vec::new(),
            num_tags: 0,
            notes: 0,
            reblogged_from: None,
            title: None,
            description: description.into(),
        }
    }

    pub fn with_timestamp(mut self, timestamp: i64) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self.num_tags = self.tags.len();
        self
    }

    pub fn with_blogger(mut self, blogger_id: impl Into<String>) -> Self {
        self.blogger_id = blogger_id.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blogger {
    pub blogger_id: String,
    pub ask: bool,
    pub ask_anon: bool,
    #[serde(rename = "likes")]
    pub like_count: u64,
    #[serde(rename = "posts")]
    pub post_count: u64,
    pub title: Option<String>,
    pub description: Option<String>,
}

impl Blogger {
    pub fn new(blogger_id: impl Into<String>) -> Self {
        Blogger {
            blogger_id: blogger_id.into(),
            ask: false,
            ask_anon: false,
            like_count: 0,
            post_count: 0,
            title: None,
            description: None,
        }
    }
}

/// An immutable collection of posts with unique ids, plus the bloggers that
/// wrote them. Posts whose blogger is not present are permitted and counted as
/// orphans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    posts: Vec<Post>,
    bloggers: BTreeMap<String, Blogger>,
}

impl Dataset {
    pub fn new(posts: Vec<Post>, bloggers: BTreeMap<String, Blogger>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(posts.len());
        for post in &posts {
            if !seen.insert(post.post_id.as_str()) {
                return Err(CorpusError::DuplicatePostId(post.post_id.clone()));
            }
            if post.num_tags != post.tags.len() {
                return Err(CorpusError::TagCountMismatch {
                    post_id: post.post_id.clone(),
                    num_tags: post.num_tags,
                    actual: post.tags.len(),
                });
            }
        }
        for (key, blogger) in &bloggers {
            if key != &blogger.blogger_id {
                return Err(CorpusError::DuplicateBloggerId(blogger.blogger_id.clone()));
            }
        }
        Ok(Dataset { posts, bloggers })
    }

    pub fn from_posts(posts: Vec<Post>) -> Result<Self, CorpusError> {
        Self::new(posts, BTreeMap::new())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn bloggers(&self) -> &BTreeMap<String, Blogger> {
        &self.bloggers
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn get(&self, post_id: &str) -> Option<&Post> {
        self.posts.iter().find(|p| p.post_id == post_id)
    }

    /// Number of posts whose blogger id does not resolve.
    pub fn orphan_count(&self) -> usize {
        self.posts
            .iter()
            .filter(|p| !self.bloggers.contains_key(&p.blogger_id))
            .count()
    }

    /// A dataset holding only the posts accepted by `keep`, in their original
    /// order, and the bloggers those posts reference.
    pub fn retain<F>(&self, mut keep: F) -> Dataset
    where
        F: FnMut(&Post) -> bool,
    {
        let posts: Vec<Post> = self.posts.iter().filter(|p| keep(p)).cloned().collect();
        self.with_posts(posts)
    }

    /// Replace the post list, keeping only bloggers referenced by the new posts.
    /// The caller guarantees the posts came from this dataset.
    pub(crate) fn with_posts(&self, posts: Vec<Post>) -> Dataset {
        let bloggers = posts
            .iter()
            .filter_map(|p| self.bloggers.get(&p.blogger_id))
            .map(|b| (b.blogger_id.clone(), b.clone()))
            .collect();
        Dataset { posts, bloggers }
    }

    pub fn with_bloggers(mut self, bloggers: impl IntoIterator<Item = Blogger>) -> Result<Self, CorpusError> {
        for b in bloggers {
            if self.bloggers.contains_key(&b.blogger_id) {
                return Err(CorpusError::DuplicateBloggerId(b.blogger_id));
            }
            self.bloggers.insert(b.blogger_id.clone(), b);
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = Dataset::from_posts(vec![Post::new("1", "a"), Post::new("1", "b")]).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicatePostId(id) if id == "1"));
    }

    #[test]
    fn orphans_are_counted() {
        let ds = Dataset::from_posts(vec![
            Post::new("1", "a").with_blogger("alice"),
            Post::new("2", "b").with_blogger("bob"),
        ])
        .unwrap()
        .with_bloggers([Blogger::new("alice")])
        .unwrap();
        assert_eq!(ds.orphan_count(), 1);
    }

    #[test]
    fn retain_drops_unreferenced_bloggers() {
        let ds = Dataset::from_posts(vec![
            Post::new("1", "a").with_blogger("alice"),
            Post::new("2", "b").with_blogger("bob"),
        ])
        .unwrap()
        .with_bloggers([Blogger::new("alice"), Blogger::new("bob")])
        .unwrap();
        let kept = ds.retain(|p| p.post_id == "2");
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.bloggers().keys().collect::<Vec<_>>(), vec!["bob"]);
    }
}
