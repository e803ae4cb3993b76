//! Lexicon-driven taxonomy, concept, sentiment, tone and semantic-tag
//! features, grouped into the F1-F5 vector space.

mod bins;
mod lexicon;
mod semtag;
mod sentiment;
mod tokenize;
mod tone;
mod topic;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize_text, Dataset, Post};

pub use bins::{bin_confidence, bin_polarity, ConfidenceBin, Polarity, CONFIDENCE_EDGES, POLARITY_EDGES};
pub use lexicon::{
    parse_concepts, parse_semantic, parse_taxonomy, parse_tone, parse_valence, Lexicons, WeightedRule,
    MAX_TAXONOMY_DEPTH,
};
pub use semtag::{
    category_counts, semantic_tag, Modifier, Multiword, SemanticLexicon, SemanticTag, TagCode, TagSegment,
    MAJOR_LABELS, UNMATCHED,
};
pub use sentiment::{document_sentiment, SentimentScore, NEGATION_WINDOW, NEGATORS};
pub use tokenize::{tokenize, words, Token, TokenKind};
pub use tone::{tone_profile, Emotion, Social, ToneDimension, ToneGroup, ToneProfile, ToneScore, Writing};
pub use topic::{
    assign_concepts, assign_taxonomy, saturating_density, ConceptAssignment, TaxonomyAssignment,
    CONFIDENCE_CUTOFF,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("{value} is outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("invalid semantic tag code {0:?}")]
    BadTagCode(String),
    #[error("{file}:{line}: {reason}")]
    Lexicon { file: String, line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureGroup {
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [FeatureGroup::F1, FeatureGroup::F2, FeatureGroup::F3, FeatureGroup::F4, FeatureGroup::F5];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::F1 => "F1",
            FeatureGroup::F2 => "F2",
            FeatureGroup::F3 => "F3",
            FeatureGroup::F4 => "F4",
            FeatureGroup::F5 => "F5",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.as_str().eq_ignore_ascii_case(s.trim()))
    }

    pub fn description(self) -> &'static str {
        match self {
            FeatureGroup::F1 => "document sentiment",
            FeatureGroup::F2 => "semantic tags",
            FeatureGroup::F3 => "emotion tone",
            FeatureGroup::F4 => "writing tone",
            FeatureGroup::F5 => "social tone",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One post in the F1-F5 space. A group is `None` once removed for ablation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<Polarity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f3: Option<Emotion<ConfidenceBin>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f4: Option<Writing<ConfidenceBin>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f5: Option<Social<ConfidenceBin>>,
}

/// Names of the categorical components, in vector order.
pub const F1_COMPONENTS: [&str; 1] = ["polarity"];
pub const F3_COMPONENTS: [&str; 5] = ["anger", "fear", "joy", "disgust", "sadness"];
pub const F4_COMPONENTS: [&str; 3] = ["analytical", "confident", "tentative"];
pub const F5_COMPONENTS: [&str; 5] = ["openness", "conscientiousness", "extraversion", "agreeableness", "emotional_range"];

impl FeatureVector {
    pub fn has(&self, group: FeatureGroup) -> bool {
        match group {
            FeatureGroup::F1 => self.f1.is_some(),
            FeatureGroup::F2 => self.f2.is_some(),
            FeatureGroup::F3 => self.f3.is_some(),
            FeatureGroup::F4 => self.f4.is_some(),
            FeatureGroup::F5 => self.f5.is_some(),
        }
    }

    /// Groups present, in order.
    pub fn groups(&self) -> Vec<FeatureGroup> {
        FeatureGroup::ALL.into_iter().filter(|g| self.has(*g)).collect()
    }

    pub fn without(&self, removed: &[FeatureGroup]) -> FeatureVector {
        let mut v = self.clone();
        for g in removed {
            match g {
                FeatureGroup::F1 => v.f1 = None,
                FeatureGroup::F2 => v.f2 = None,
                FeatureGroup::F3 => v.f3 = None,
                FeatureGroup::F4 => v.f4 = None,
                FeatureGroup::F5 => v.f5 = None,
            }
        }
        v
    }

    /// Present categorical components as `(group, name, bin index)`.
    pub fn categorical(&self) -> Vec<(FeatureGroup, &'static str, usize)> {
        let mut out = Vec::with_capacity(14);
        if let Some(p) = self.f1 {
            out.push((FeatureGroup::F1, F1_COMPONENTS[0], p.index()));
        }
        if let Some(e) = &self.f3 {
            out.extend(F3_COMPONENTS.iter().zip(e.to_array()).map(|(n, b)| (FeatureGroup::F3, *n, b.index())));
        }
        if let Some(w) = &self.f4 {
            out.extend(F4_COMPONENTS.iter().zip(w.to_array()).map(|(n, b)| (FeatureGroup::F4, *n, b.index())));
        }
        if let Some(s) = &self.f5 {
            out.extend(F5_COMPONENTS.iter().zip(s.to_array()).map(|(n, b)| (FeatureGroup::F5, *n, b.index())));
        }
        out
    }
}

/// Assemble F1-F5 from one post's analyses.
pub fn build_feature_vector(sentiment: &SentimentScore, tone: &ToneProfile, tags: &[SemanticTag]) -> FeatureVector {
    FeatureVector {
        f1: Some(sentiment.polarity),
        f2: Some(category_counts(tags)),
        f3: Some(tone.emotion.map(|s| s.bin)),
        f4: Some(tone.writing.map(|s| s.bin)),
        f5: Some(tone.social.map(|s| s.bin)),
    }
}

/// Everything extracted from one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostFeatures {
    pub post_id: String,
    pub taxonomy: Vec<TaxonomyAssignment>,
    pub concepts: Vec<ConceptAssignment>,
    pub sentiment: SentimentScore,
    pub tone: ToneProfile,
    #[serde(flatten)]
    pub vector: FeatureVector,
}

/// Taxonomy, concepts, sentiment and tone read the normalized description;
/// the semantic tagger reads it raw.
pub fn extract_post(post: &Post, lexicons: &Lexicons) -> PostFeatures {
    let normalized = normalize_text(&post.description);
    let tokens = words(&normalized);
    let sentiment = sentiment::sentiment_tokens(&tokens, lexicons);
    let tone = tone::tone_tokens(&tokens, lexicons);
    let tags = semantic_tag(&post.description, lexicons);
    PostFeatures {
        post_id: post.post_id.clone(),
        taxonomy: topic::assign_taxonomy_tokens(&tokens, lexicons),
        concepts: topic::assign_concepts_tokens(&tokens, lexicons),
        vector: build_feature_vector(&sentiment, &tone, &tags),
        sentiment,
        tone,
    }
}

pub fn extract_dataset(dataset: &Dataset, lexicons: &Lexicons) -> Vec<PostFeatures> {
    dataset.posts().iter().map(|p| extract_post(p, lexicons)).collect()
}

pub fn write_features_jsonl<W: Write>(mut w: W, features: &[PostFeatures]) -> std::io::Result<()> {
    for f in features {
        serde_json::to_writer(&mut w, f)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_features_jsonl<R: BufRead>(r: R) -> Result<Vec<PostFeatures>, FeatureError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|source| FeatureError::Io { path: "<features>".into(), source })?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| FeatureError::Json { line: i + 1, source })?);
    }
    Ok(out)
}
