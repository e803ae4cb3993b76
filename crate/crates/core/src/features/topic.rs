use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lexicon::{occurrences, Lexicons, WeightedRule};
use super::tokenize::words;

/// Assignments scoring below this are discarded.
pub const CONFIDENCE_CUTOFF: f64 = 0.40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyAssignment {
    /// Levels joined by `/`, e.g. `society/racism`.
    pub path: String,
    pub confidence: f64,
}

impl TaxonomyAssignment {
    pub fn levels(&self) -> impl Iterator<Item = &str> {
        self.path.split('/')
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptAssignment {
    pub concept: String,
    pub confidence: f64,
}

/// `min(1, sum(weight * occurrences) / max(1, sqrt(word_count)))`.
pub fn saturating_density(weighted_hits: f64, word_count: usize) -> f64 {
    let norm = (word_count as f64).sqrt().max(1.0);
    (weighted_hits / norm).min(1.0)
}

/// Score every rule target against `tokens`, keep those at or above
/// `cutoff`, sorted by confidence descending then target ascending.
pub(crate) fn score_targets(rules: &[WeightedRule<String>], tokens: &[String], cutoff: f64) -> Vec<(String, f64)> {
    let mut hits: BTreeMap<&str, f64> = BTreeMap::new();
    for rule in rules {
        let n = occurrences(tokens, &rule.pattern);
        if n > 0 {
            *hits.entry(&rule.target).or_default() += rule.weight * n as f64;
        }
    }
    let mut out: Vec<(String, f64)> = hits
        .into_iter()
        .map(|(t, h)| (t.to_owned(), saturating_density(h, tokens.len())))
        .filter(|(_, c)| *c >= cutoff)
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn assign_taxonomy(text: &str, lexicons: &Lexicons) -> Vec<TaxonomyAssignment> {
    assign_taxonomy_tokens(&words(text), lexicons)
}

pub fn assign_concepts(text: &str, lexicons: &Lexicons) -> Vec<ConceptAssignment> {
    assign_concepts_tokens(&words(text), lexicons)
}

pub(crate) fn assign_taxonomy_tokens(tokens: &[String], lexicons: &Lexicons) -> Vec<TaxonomyAssignment> {
    score_targets(&lexicons.taxonomy, tokens, CONFIDENCE_CUTOFF)
        .into_iter()
        .map(|(path, confidence)| TaxonomyAssignment { path, confidence })
        .collect()
}

pub(crate) fn assign_concepts_tokens(tokens: &[String], lexicons: &Lexicons) -> Vec<ConceptAssignment> {
    score_targets(&lexicons.concepts, tokens, CONFIDENCE_CUTOFF)
        .into_iter()
        .map(|(concept, confidence)| ConceptAssignment { concept, confidence })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::lexicon::{parse_concepts, parse_taxonomy};

    fn lex(taxonomy: &str, concepts: &str) -> Lexicons {
        Lexicons {
            taxonomy: parse_taxonomy(taxonomy).unwrap(),
            concepts: parse_concepts(concepts).unwrap(),
            ..Lexicons::default()
        }
    }

    #[test]
    fn no_match_is_empty() {
        let lx = Lexicons::bundled();
        assert!(assign_taxonomy("the weather was mild", &lx).is_empty());
        assert!(assign_concepts("", &lx).is_empty());
    }

    #[test]
    fn single_rule_scores_its_weight() {
        let lx = lex("jihad\tlaw, govt & politics/espionage and intelligence/terrorism\t0.6\n", "");
        let a = assign_taxonomy("jihad", &lx);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].path, "law, govt & politics/espionage and intelligence/terrorism");
        assert!((a[0].confidence - 0.6).abs() < 1e-12);
        assert_eq!(a[0].levels().count(), 3);
    }

    #[test]
    fn below_cutoff_is_dropped() {
        let lx = lex("jihad\tsociety\t0.3\n", "");
        assert!(assign_taxonomy("jihad", &lx).is_empty());
        let lx = lex("jihad\tsociety\t0.4\n", "");
        assert_eq!(assign_taxonomy("jihad", &lx).len(), 1);
    }

    #[test]
    fn density_divides_by_root_length() {
        // 16 words, 2 hits of weight 1.5: 3.0 / 4 = 0.75
        let lx = lex("racism\tsociety/racism\t1.5\n", "");
        let text = "racism a b c d e f g h i j k l m n racism";
        let a = assign_taxonomy(text, &lx);
        assert!((a[0].confidence - 0.75).abs() < 1e-12);
    }

    #[test]
    fn arabs_and_jews_example() {
        let text = "If the Arabs put down their weapons today, there would be no more violence. \
                    If the Jews put down their weapons today, there would be no more Israel.";
        let n = words(text).len();
        assert_eq!(n, 28);
        let root = (n as f64).sqrt();
        let concepts = format!(
            "jews\tAshkenazi Jews\t{}\narabs\tPalestinian people\t{}\njews\tJewish ethnic divisions\t{}\n",
            0.74 * root,
            0.78 * root,
            0.70 * root
        );
        let got = assign_concepts(text, &lex("", &concepts));
        let names: Vec<&str> = got.iter().map(|c| c.concept.as_str()).collect();
        assert_eq!(names, vec!["Palestinian people", "Ashkenazi Jews", "Jewish ethnic divisions"]);
        for (c, want) in got.iter().zip([0.78, 0.74, 0.70]) {
            assert!((c.confidence - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_are_lexicographic() {
        let lx = lex("", "x\tzeta\t0.5\nx\talpha\t0.5\n");
        let got = assign_concepts("x", &lx);
        assert_eq!(got[0].concept, "alpha");
        assert_eq!(got[1].concept, "zeta");
    }

    #[test]
    fn multiword_patterns_and_saturation() {
        let lx = lex("hate crime\tsociety/personal offense/hate crime\t3\n", "");
        let a = assign_taxonomy("a hate crime", &lx);
        assert_eq!(a[0].confidence, 1.0);
        assert!(assign_taxonomy("hate and crime", &lx).is_empty());
    }
}
