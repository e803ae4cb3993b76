use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ConfusionMatrix;
use crate::annotation::GroundTruth;
use crate::classify::{harvest_concepts, topic_classify, TopicClass, TopicWhitelist};
use crate::features::{FeatureVector, PostFeatures};

/// Which posts the intent stage is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestCondition {
    /// Every post stage one labels topic, whatever its true topic.
    Td1,
    /// Stage-one topic posts that are truly on topic.
    Td2,
}

impl fmt::Display for TestCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestCondition::Td1 => "td1",
            TestCondition::Td2 => "td2",
        })
    }
}

impl FromStr for TestCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "td1" => Ok(TestCondition::Td1),
            "td2" => Ok(TestCondition::Td2),
            other => Err(format!("unknown test condition {other:?}, expected td1 or td2")),
        }
    }
}

/// Parallel vectors of intent examples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntentSet {
    pub post_ids: Vec<String>,
    pub vectors: Vec<FeatureVector>,
    pub labels: Vec<bool>,
}

impl IntentSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

/// Whitelist whose concept lexicon is harvested from the labeled topic posts.
pub fn harvested_whitelist(
    features: &[PostFeatures],
    truth: &BTreeMap<String, GroundTruth>,
    sample_size: usize,
    seed: u64,
) -> TopicWhitelist {
    let topic: Vec<&PostFeatures> =
        features.iter().filter(|f| truth.get(&f.post_id).is_some_and(|t| t.topic)).collect();
    TopicWhitelist::default().with_concepts(harvest_concepts(&topic, sample_size, seed))
}

pub fn stage_one(features: &[PostFeatures], whitelist: &TopicWhitelist, top_k: usize) -> BTreeMap<String, TopicClass> {
    features
        .iter()
        .map(|f| (f.post_id.clone(), topic_classify(&f.taxonomy, &f.concepts, whitelist, top_k)))
        .collect()
}

/// Stage-one confusion over the posts that have ground truth.
pub fn topic_confusion(stage: &BTreeMap<String, TopicClass>, truth: &BTreeMap<String, GroundTruth>) -> ConfusionMatrix {
    ConfusionMatrix::from_pairs(
        stage.iter().filter_map(|(id, c)| truth.get(id).map(|t| (*c == TopicClass::Topic, t.topic))),
    )
}

/// Intent examples for a test condition. A post is positive when it is truly
/// on topic with intent. Posts without ground truth, and topic posts whose
/// intent label was discarded, are left out.
pub fn intent_set(
    features: &[PostFeatures],
    stage: &BTreeMap<String, TopicClass>,
    truth: &BTreeMap<String, GroundTruth>,
    condition: TestCondition,
) -> IntentSet {
    let mut set = IntentSet::default();
    for f in features {
        if stage.get(&f.post_id) != Some(&TopicClass::Topic) {
            continue;
        }
        let Some(t) = truth.get(&f.post_id) else { continue };
        let label = match (t.topic, t.intent) {
            (true, Some(i)) => i,
            (true, None) => continue,
            (false, _) if condition == TestCondition::Td1 => false,
            (false, _) => continue,
        };
        set.post_ids.push(f.post_id.clone());
        set.vectors.push(f.vector.clone());
        set.labels.push(label);
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{SentimentScore, TaxonomyAssignment, ToneProfile};

    fn feats(id: &str, path: &str) -> PostFeatures {
        PostFeatures {
            post_id: id.into(),
            taxonomy: vec![TaxonomyAssignment { path: path.into(), confidence: 0.6 }],
            concepts: vec![],
            sentiment: SentimentScore::NEUTRAL,
            tone: ToneProfile::from_raw([0.0; 13]),
            vector: FeatureVector::default(),
        }
    }

    fn gt(topic: bool, intent: Option<bool>) -> GroundTruth {
        GroundTruth { topic, intent }
    }

    #[test]
    fn td1_keeps_false_topic_posts_as_negatives() {
        let f = vec![feats("a", "society/racism"), feats("b", "society/racism"), feats("c", "sports/football"), feats("d", "society/racism")];
        let truth: BTreeMap<String, GroundTruth> = [
            ("a".into(), gt(true, Some(true))),
            ("b".into(), gt(false, None)),
            ("c".into(), gt(true, Some(true))),
            ("d".into(), gt(true, None)),
        ]
        .into();
        let stage = stage_one(&f, &TopicWhitelist::default(), 3);
        let td1 = intent_set(&f, &stage, &truth, TestCondition::Td1);
        assert_eq!(td1.post_ids, vec!["a", "b"]);
        assert_eq!(td1.labels, vec![true, false]);
        let td2 = intent_set(&f, &stage, &truth, TestCondition::Td2);
        assert_eq!(td2.post_ids, vec!["a"]);
        let m = topic_confusion(&stage, &truth);
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (2, 1, 1, 0));
    }

    #[test]
    fn condition_round_trip() {
        for c in [TestCondition::Td1, TestCondition::Td2] {
            assert_eq!(c.to_string().parse::<TestCondition>().unwrap(), c);
        }
        assert!("td3".parse::<TestCondition>().is_err());
    }
}
