use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::language::{default_detector, Language, LanguageDetector};
use super::{normalize_text, Dataset};

/// Lower edges of the word-length buckets; the last bucket is unbounded.
pub const BUCKET_EDGES: [usize; 7] = [0, 5, 10, 20, 30, 100, 1000];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthHistogram {
    pub counts: [u64; 7],
}

impl LengthHistogram {
    pub fn bucket_of(words: usize) -> usize {
        BUCKET_EDGES.partition_point(|&edge| edge <= words) - 1
    }

    pub fn add(&mut self, words: usize) {
        self.counts[Self::bucket_of(words)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Share of entries in bucket `idx`; zero for an empty histogram.
    pub fn fraction(&self, idx: usize) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.counts[idx] as f64 / n as f64,
        }
    }

    pub fn label(idx: usize) -> String {
        match BUCKET_EDGES.get(idx + 1) {
            Some(hi) => format!("[{},{})", BUCKET_EDGES[idx], hi),
            None => format!("[{},inf)", BUCKET_EDGES[idx]),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_posts: u64,
    pub english_posts: u64,
    pub non_english_posts: u64,
    pub unknown_language_posts: u64,
    pub url_only_posts: u64,
    /// Word counts of normalized descriptions.
    pub description_lengths: LengthHistogram,
    /// Word counts of unique (normalized, case-folded) tags.
    pub tag_lengths: LengthHistogram,
}

pub fn is_url_token(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")
}

pub fn word_count(text: &str) -> usize {
    normalize_text(text).split_whitespace().count()
}

fn is_url_only(text: &str) -> bool {
    let mut tokens = text.split_whitespace().peekable();
    tokens.peek().is_some() && tokens.all(is_url_token)
}

pub fn compute_stats(dataset: &Dataset) -> CorpusStats {
    compute_stats_with(default_detector(), dataset)
}

pub(crate) fn compute_stats_with(detector: &LanguageDetector, dataset: &Dataset) -> CorpusStats {
    let mut stats = CorpusStats::default();
    let mut tags = BTreeSet::new();
    for post in dataset.posts() {
        stats.total_posts += 1;
        match detector.detect(&post.description) {
            Language::English => stats.english_posts += 1,
            Language::Other(_) => stats.non_english_posts += 1,
            Language::Unknown => stats.unknown_language_posts += 1,
        }
        if is_url_only(&post.description) {
            stats.url_only_posts += 1;
        }
        stats.description_lengths.add(word_count(&post.description));
        for tag in &post.tags {
            let t = normalize_text(tag).to_lowercase();
            if !t.is_empty() {
                tags.insert(t);
            }
        }
    }
    for tag in &tags {
        stats.tag_lengths.add(tag.split_whitespace().count());
    }
    stats
}
