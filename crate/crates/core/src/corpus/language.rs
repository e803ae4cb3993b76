//! Rank-order character trigram language identification.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::stats::{compute_stats_with, is_url_token};
use super::{CorpusStats, Dataset};

const PROFILE_SIZE: usize = 300;

pub(crate) const BUNDLED_SAMPLES: &[(&str, &str)] = &[
    ("en", include_str!("../../data/lang/en.txt")),
    ("es", include_str!("../../data/lang/es.txt")),
    ("fr", include_str!("../../data/lang/fr.txt")),
    ("de", include_str!("../../data/lang/de.txt")),
    ("it", include_str!("../../data/lang/it.txt")),
    ("pt", include_str!("../../data/lang/pt.txt")),
    ("nl", include_str!("../../data/lang/nl.txt")),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Language {
    English,
    /// Any other bundled language, by its ISO 639-1 code.
    Other(String),
    /// Too little alphabetic content to decide.
    Unknown,
}

impl Language {
    pub fn code(&self) -> &str {
        match self {
            Language::English => "en",
            Language::Other(code) => code,
            Language::Unknown => "unknown",
        }
    }

    pub fn from_code(code: &str) -> Self {
        match code {
            "en" => Language::English,
            "unknown" => Language::Unknown,
            other => Language::Other(other.to_owned()),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for Language {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Language {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = String::deserialize(d)?;
        Ok(Language::from_code(&code))
    }
}

/// Letters-only words of `text`, lowercased, with URL tokens skipped.
fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .filter(|t| !is_url_token(t))
        .flat_map(|t| t.split(|c: char| !c.is_alphabetic()))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Trigram frequency ranks, most frequent first (ties broken by the trigram).
fn ranked_trigrams(text: &str, limit: usize) -> Vec<String> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for word in words(text) {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.chars())
            .chain(std::iter::once(' '))
            .collect();
        for w in padded.windows(3) {
            *counts.entry(w.iter().collect()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(limit).map(|(g, _)| g).collect()
}

#[derive(Debug, Clone)]
pub struct LanguageProfile {
    pub code: String,
    ranks: HashMap<String, usize>,
}

impl LanguageProfile {
    pub fn from_sample(code: impl Into<String>, sample: &str) -> Self {
        let ranks = ranked_trigrams(sample, PROFILE_SIZE)
            .into_iter()
            .enumerate()
            .map(|(rank, g)| (g, rank))
            .collect();
        LanguageProfile { code: code.into(), ranks }
    }

    /// Out-of-place distance from a document's ranked trigrams to this profile.
    fn distance(&self, doc: &[String]) -> usize {
        doc.iter()
            .enumerate()
            .map(|(rank, g)| match self.ranks.get(g) {
                Some(&r) => rank.abs_diff(r),
                None => PROFILE_SIZE,
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct LanguageDetector {
    profiles: Vec<LanguageProfile>,
    min_tokens: usize,
}

impl LanguageDetector {
    pub const DEFAULT_MIN_TOKENS: usize = 3;

    pub fn new(profiles: Vec<LanguageProfile>, min_tokens: usize) -> Self {
        LanguageDetector { profiles, min_tokens }
    }

    /// Profiles for English, Spanish, French, German, Italian, Portuguese and
    /// Dutch built from the bundled sample texts.
    pub fn bundled() -> Self {
        let profiles = BUNDLED_SAMPLES
            .iter()
            .map(|(code, sample)| LanguageProfile::from_sample(*code, sample))
            .collect();
        Self::new(profiles, Self::DEFAULT_MIN_TOKENS)
    }

    pub fn with_min_tokens(mut self, min_tokens: usize) -> Self {
        self.min_tokens = min_tokens;
        self
    }

    pub fn detect(&self, text: &str) -> Language {
        if alphabetic_tokens(text) < self.min_tokens {
            return Language::Unknown;
        }
        let doc = ranked_trigrams(text, PROFILE_SIZE);
        self.profiles
            .iter()
            .map(|p| (p.distance(&doc), p))
            .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.code.cmp(&b.1.code)))
            .map_or(Language::Unknown, |(_, p)| Language::from_code(&p.code))
    }

    /// Keep only English posts. The returned stats describe the whole input.
    pub fn filter_english(&self, dataset: &Dataset) -> (Dataset, CorpusStats) {
        let stats = compute_stats_with(self, dataset);
        let english = dataset.retain(|p| self.detect(&p.description) == Language::English);
        (english, stats)
    }
}

/// Whitespace tokens that are not URLs and consist of letters, optionally
/// with inner apostrophes or hyphens, once surrounding punctuation is trimmed.
fn alphabetic_tokens(text: &str) -> usize {
    text.split_whitespace()
        .filter(|t| !is_url_token(t))
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| {
            t.chars().any(char::is_alphabetic)
                && t.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '-')
        })
        .count()
}

pub(crate) fn default_detector() -> &'static LanguageDetector {
    static DETECTOR: OnceLock<LanguageDetector> = OnceLock::new();
    DETECTOR.get_or_init(LanguageDetector::bundled)
}

/// Detect with the bundled profiles and the default three-token minimum.
pub fn detect_language(text: &str) -> Language {
    default_detector().detect(text)
}

pub fn filter_english(dataset: &Dataset) -> (Dataset, CorpusStats) {
    default_detector().filter_english(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Post;

    #[test]
    fn url_only_is_unknown() {
        assert_eq!(detect_language("http://x.y/z"), Language::Unknown);
        assert_eq!(detect_language("https://a.b/c www.d.e"), Language::Unknown);
    }

    #[test]
    fn canonical_english() {
        assert_eq!(
            detect_language("the quick brown fox jumps over the lazy dog"),
            Language::English
        );
    }

    #[test]
    fn too_few_tokens_is_unknown() {
        assert_eq!(detect_language("hello there"), Language::Unknown);
        assert_eq!(detect_language("2016 #tbt 100"), Language::Unknown);
        let lenient = LanguageDetector::bundled().with_min_tokens(1);
        assert_ne!(lenient.detect("hello there"), Language::Unknown);
    }

    #[test]
    fn recognizes_other_bundled_languages() {
        let cases = [
            ("es", "los niños caminan hacia la escuela por el camino de la ciudad con sus padres"),
            ("fr", "les enfants marchent vers l'école avec leurs parents pendant que le soleil se lève"),
            ("de", "die Kinder gehen mit ihren Eltern auf der Straße zur Schule und sprechen über das Wetter"),
            ("it", "i bambini vanno a scuola con i loro genitori lungo la strada del paese"),
            ("pt", "as crianças caminham para a escola com os pais pela estrada da vila"),
            ("nl", "de kinderen lopen met hun ouders over de weg naar school in het dorp"),
        ];
        for (code, text) in cases {
            assert_eq!(detect_language(text).code(), code, "{text}");
        }
    }

    #[test]
    fn filter_all_english_is_identity() {
        let d = Dataset::from_posts(vec![
            Post::new("1", "this is a post about the weather and the river"),
            Post::new("2", "we went to the market in the morning with friends"),
        ])
        .unwrap();
        let (out, stats) = filter_english(&d);
        assert_eq!(out, d);
        assert_eq!(stats.non_english_posts, 0);
        assert_eq!(stats.english_posts, 2);
    }

    #[test]
    fn filter_empty_dataset() {
        let (out, stats) = filter_english(&Dataset::empty());
        assert!(out.is_empty());
        assert_eq!(stats, CorpusStats::default());
    }

    #[test]
    fn language_codes_round_trip_through_json() {
        for lang in [Language::English, Language::Other("de".into()), Language::Unknown] {
            let json = serde_json::to_string(&lang).unwrap();
            assert_eq!(serde_json::from_str::<Language>(&json).unwrap(), lang);
        }
    }
}
