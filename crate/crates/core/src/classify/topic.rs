use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{ConceptAssignment, PostFeatures, TaxonomyAssignment, CONFIDENCE_CUTOFF};

pub const DEFAULT_WHITELIST: [&str; 6] = [
    "religion and spirituality",
    "society/unrest and war",
    "society/racism",
    "society/personal offense/hate crime",
    "law, govt & politics/espionage and intelligence/terrorism",
    "law, govt & politics/legal issues/human rights",
];

/// Posts with more taxonomy assignments than this fall back to concepts.
pub const FALLBACK_MIN_ASSIGNMENTS: usize = 5;
pub const DEFAULT_TOP_K: usize = 3;
pub const DEFAULT_CONCEPT_SAMPLE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicClass {
    Topic,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntentClass {
    Intent,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicWhitelist {
    pub paths: BTreeSet<String>,
    pub concept_lexicon: BTreeSet<String>,
}

impl Default for TopicWhitelist {
    fn default() -> Self {
        TopicWhitelist {
            paths: DEFAULT_WHITELIST.iter().map(|s| s.to_string()).collect(),
            concept_lexicon: BTreeSet::new(),
        }
    }
}

impl TopicWhitelist {
    pub fn with_concepts(mut self, concepts: impl IntoIterator<Item = String>) -> Self {
        self.concept_lexicon.extend(concepts);
        self
    }

    /// A path matches when it equals a whitelisted path or lies beneath one,
    /// so `religion and spirituality/islam` matches `religion and spirituality`.
    pub fn matches(&self, path: &str) -> bool {
        self.paths.iter().any(|w| path == w || path.strip_prefix(w.as_str()).is_some_and(|rest| rest.starts_with('/')))
    }
}

/// Stage one. Topic when any taxonomy assignment is whitelisted; otherwise,
/// for posts spread over more than five taxonomies, topic when one of the
/// `top_k` most confident concepts is in the concept lexicon.
pub fn topic_classify(
    taxonomy: &[TaxonomyAssignment],
    concepts: &[ConceptAssignment],
    whitelist: &TopicWhitelist,
    top_k: usize,
) -> TopicClass {
    let kept: Vec<&TaxonomyAssignment> = taxonomy.iter().filter(|a| a.confidence >= CONFIDENCE_CUTOFF).collect();
    if kept.iter().any(|a| whitelist.matches(&a.path)) {
        return TopicClass::Topic;
    }
    if kept.len() > FALLBACK_MIN_ASSIGNMENTS {
        let mut ranked: Vec<&ConceptAssignment> = concepts.iter().filter(|c| c.confidence >= CONFIDENCE_CUTOFF).collect();
        ranked.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then_with(|| a.concept.cmp(&b.concept)));
        if ranked.iter().take(top_k).any(|c| whitelist.concept_lexicon.contains(&c.concept)) {
            return TopicClass::Topic;
        }
    }
    TopicClass::Unknown
}

/// Concepts of a seeded random sample of `sample_size` labeled topic posts.
/// Sampling is over the posts sorted by id, so input order does not matter.
pub fn harvest_concepts(topic_posts: &[&PostFeatures], sample_size: usize, seed: u64) -> BTreeSet<String> {
    let mut pool: Vec<&PostFeatures> = topic_posts.to_vec();
    pool.sort_by(|a, b| a.post_id.cmp(&b.post_id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.iter()
        .take(sample_size)
        .flat_map(|f| f.concepts.iter())
        .filter(|c| c.confidence >= CONFIDENCE_CUTOFF)
        .map(|c| c.concept.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tax(path: &str, confidence: f64) -> TaxonomyAssignment {
        TaxonomyAssignment { path: path.into(), confidence }
    }

    fn concept(name: &str, confidence: f64) -> ConceptAssignment {
        ConceptAssignment { concept: name.into(), confidence }
    }

    #[test]
    fn default_whitelist_has_six_paths() {
        assert_eq!(TopicWhitelist::default().paths.len(), 6);
    }

    #[test]
    fn whitelisted_assignment() {
        let w = TopicWhitelist::default();
        assert_eq!(topic_classify(&[tax("society/racism", 0.55)], &[], &w, 3), TopicClass::Topic);
        assert_eq!(topic_classify(&[tax("religion and spirituality/islam", 0.5)], &[], &w, 3), TopicClass::Topic);
        assert_eq!(topic_classify(&[tax("society/racism", 0.39)], &[], &w, 3), TopicClass::Unknown);
        assert_eq!(topic_classify(&[tax("society/racismo", 0.9)], &[], &w, 3), TopicClass::Unknown);
        assert_eq!(topic_classify(&[tax("society", 0.9)], &[], &w, 3), TopicClass::Unknown);
    }

    #[test]
    fn nothing_is_unknown() {
        assert_eq!(topic_classify(&[], &[], &TopicWhitelist::default(), 3), TopicClass::Unknown);
    }

    #[test]
    fn concept_fallback() {
        let w = TopicWhitelist::default().with_concepts(["Caliphate".to_string()]);
        let six: Vec<_> = ["a", "b", "c", "d", "e", "f"].iter().map(|p| tax(p, 0.5)).collect();
        let concepts = [concept("Caliphate", 0.6), concept("FIFA", 0.5)];
        assert_eq!(topic_classify(&six, &concepts, &w, 3), TopicClass::Topic);
        // five assignments do not trigger the fallback
        assert_eq!(topic_classify(&six[..5], &concepts, &w, 3), TopicClass::Unknown);
        // the lexicon concept must be within the top k
        let concepts = [concept("Caliphate", 0.45), concept("FIFA", 0.5), concept("NASA", 0.6)];
        assert_eq!(topic_classify(&six, &concepts, &w, 2), TopicClass::Unknown);
        assert_eq!(topic_classify(&six, &concepts, &w, 3), TopicClass::Topic);
    }
}
