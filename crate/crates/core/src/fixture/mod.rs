//! Seeded synthetic corpora with known ground truth.
//!
//! [`generate_corpus`] builds a raw mixed-language corpus with planted
//! duplicates and a manifest of the counts the cleaning stages should report.
//! [`generate_cascade`] builds an English corpus whose topic and intent labels,
//! stage-one outcome and tone signal are planted per post.

mod cascade;
mod corpus;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use cascade::{generate_cascade, generate_cascade_with, CascadeFixture, CascadeManifest, CascadeSpec, PlantedPost, Role, SEED_TAGS};
pub use corpus::{generate_corpus, CorpusFixture, CorpusManifest, CorpusSpec};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
    #[error("could not generate {what} after {tries} attempts")]
    Exhausted { what: String, tries: usize },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

pub(crate) const MAX_TRIES: usize = 10_000;

pub(crate) const GENERIC_TAGS: &[&str] = &[
    "lol", "art", "music", "food", "travel", "football", "news", "politics", "aesthetic", "life",
    "photography", "books", "fashion", "gaming", "nature", "personal", "quotes", "movies",
];

/// Lowercased letter-only words of a sample text, deduplicated and sorted.
pub(crate) fn vocabulary(sample: &str) -> Vec<String> {
    let mut v: Vec<String> = sample
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphabetic()).to_lowercase())
        .filter(|t| !t.is_empty() && t.chars().all(char::is_alphabetic))
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Join words into lowercase sentences of 8 to 14 words ending in `.`.
pub(crate) fn sentences(words: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut left = rng.gen_range(8..=14);
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(w);
        left -= 1;
        if left == 0 || i + 1 == words.len() {
            out.push('.');
            left = rng.gen_range(8..=14);
        }
    }
    out
}

pub(crate) fn pick<'a, T>(items: &'a [T], rng: &mut ChaCha8Rng) -> &'a T {
    items.choose(rng).expect("non-empty word list")
}

pub(crate) fn tags(pool: &[&str], n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    pool.choose_multiple(rng, n).map(|t| t.to_string()).collect()
}
