use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pick, sentences, tags, FixtureError, GENERIC_TAGS, MAX_TRIES};
use crate::annotation::{AnnotationRecord, GroundTruth, IntentLabel, TopicLabel};
use crate::classify::TopicWhitelist;
use crate::corpus::{Blogger, Dataset, Post};
use crate::features::{bin_polarity, FeatureGroup, Lexicons, ToneDimension, NEGATORS};

pub const SEED_TAGS: [&str; 8] = [
    "islamophobia",
    "islam is evil",
    "supremacy",
    "blacklivesmatter",
    "white racism",
    "jihad",
    "isis",
    "white genocide",
];

const BRIDGE_TAGS: &[&str] = &["muslims", "racism", "terrorism", "refugees", "faith", "politics", "news"];

const TOPIC_CONCEPTS: &[&str] = &["isis", "quran", "kkk", "hijab", "caliphate", "nazis"];
const OTHER_CONCEPTS: &[&str] = &["fifa", "hollywood", "netflix", "nasa", "playstation", "vegan"];

/// Informal words outside every lexicon.
const SLANG: &[&str] = &["yeah", "honestly", "literally", "stuff", "anyway", "tonight", "pretty", "really", "kinda", "gonna"];

pub const POST_WORDS: usize = 100;

/// How a post was built and what stage one should make of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// On topic, three or four whitelisted taxonomy triggers.
    TopicDetected,
    /// On topic, too few triggers to pass the confidence cutoff.
    TopicMissed,
    /// On topic, spread over six other taxonomies, with a topic concept.
    TopicFallback,
    /// Off topic, yet carrying enough whitelisted triggers to pass.
    OffTopicFlagged,
    OffTopic,
    /// Off topic, spread over six taxonomies, with an unrelated concept.
    OffTopicFallback,
}

impl Role {
    pub fn is_topic(self) -> bool {
        matches!(self, Role::TopicDetected | Role::TopicMissed | Role::TopicFallback)
    }

    /// Stage-one outcome the post was built for. Fallback topic posts rely on
    /// their concept being harvested into the concept lexicon.
    pub fn expected_stage_one(self) -> bool {
        matches!(self, Role::TopicDetected | Role::TopicFallback | Role::OffTopicFlagged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub seed: u64,
    pub topic_detected: usize,
    pub topic_missed: usize,
    pub topic_fallback: usize,
    pub off_topic_flagged: usize,
    pub off_topic: usize,
    pub off_topic_fallback: usize,
    /// Share of topic posts labeled intent.
    pub intent_rate: f64,
    /// Share of topic posts whose tone contradicts their label.
    pub label_noise: f64,
    /// Groups whose values carry the intent signal; the rest are noise.
    pub signal: Vec<FeatureGroup>,
    /// Share of flagged off-topic posts written in an intent-like tone.
    pub flagged_heated: f64,
    pub bloggers: usize,
}

impl Default for CascadeSpec {
    fn default() -> Self {
        CascadeSpec {
            seed: 7,
            topic_detected: 130,
            topic_missed: 18,
            topic_fallback: 12,
            off_topic_flagged: 45,
            off_topic: 280,
            off_topic_fallback: 15,
            intent_rate: 0.45,
            label_noise: 0.05,
            signal: vec![FeatureGroup::F3, FeatureGroup::F4],
            flagged_heated: 0.5,
            bloggers: 40,
        }
    }
}

impl CascadeSpec {
    /// Only emotion carries signal and labels are clean.
    pub fn ablation() -> Self {
        CascadeSpec { seed: 11, label_noise: 0.0, signal: vec![FeatureGroup::F3], ..CascadeSpec::default() }
    }

    pub fn total(&self) -> usize {
        self.topic_detected
            + self.topic_missed
            + self.topic_fallback
            + self.off_topic_flagged
            + self.off_topic
            + self.off_topic_fallback
    }

    fn validate(&self) -> Result<(), FixtureError> {
        for (name, p) in [("intent_rate", self.intent_rate), ("label_noise", self.label_noise), ("flagged_heated", self.flagged_heated)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(FixtureError::InvalidSpec(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.signal.contains(&FeatureGroup::F2) {
            return Err(FixtureError::InvalidSpec("F2 cannot carry planted signal".into()));
        }
        if self.bloggers == 0 {
            return Err(FixtureError::InvalidSpec("need at least one blogger".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedPost {
    pub post_id: String,
    pub role: Role,
    pub topic: bool,
    /// Always false off topic.
    pub intent: bool,
    /// `Some(true)` when the tone was drawn from the intent profile,
    /// `Some(false)` for the opposite profile, `None` for uniform noise.
    pub intent_tone: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeManifest {
    pub spec: CascadeSpec,
    pub posts: Vec<PlantedPost>,
}

impl CascadeManifest {
    pub fn count(&self, role: Role) -> usize {
        self.posts.iter().filter(|p| p.role == role).count()
    }

    pub fn truth(&self) -> BTreeMap<String, GroundTruth> {
        self.posts
            .iter()
            .map(|p| (p.post_id.clone(), GroundTruth { topic: p.topic, intent: p.topic.then_some(p.intent) }))
            .collect()
    }

    /// Two annotators who agree on every post.
    pub fn annotations(&self) -> Vec<AnnotationRecord> {
        let mut out = Vec::with_capacity(2 * self.posts.len());
        for p in &self.posts {
            for a in ["a", "b"] {
                out.push(AnnotationRecord {
                    post_id: p.post_id.clone(),
                    annotator_id: a.into(),
                    topic_label: if p.topic { TopicLabel::Topic } else { TopicLabel::Na },
                    intent_label: p.topic.then_some(if p.intent { IntentLabel::Intent } else { IntentLabel::Na }),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CascadeFixture {
    pub dataset: Dataset,
    pub manifest: CascadeManifest,
}

/// Word lists drawn from the lexicons, kept apart so that every planted
/// word moves exactly one feature.
struct Vocab {
    whitelisted: Vec<Vec<String>>,
    other_paths: Vec<Vec<String>>,
    tone: Vec<Vec<String>>,
    valence: Vec<Vec<String>>,
    fillers: Vec<String>,
}

impl Vocab {
    fn new(lex: &Lexicons) -> Result<Self, FixtureError> {
        let whitelist = TopicWhitelist::default();
        let mut by_path: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for r in lex.taxonomy.iter().filter(|r| r.pattern.len() == 1) {
            by_path.entry(r.target.as_str()).or_default().push(r.pattern[0].clone());
        }
        let (whitelisted, other_paths): (Vec<_>, Vec<_>) = by_path.into_iter().partition(|(p, _)| whitelist.matches(p));
        let tone = ToneDimension::ALL
            .iter()
            .map(|d| lex.tone.iter().filter(|r| r.target == *d && r.pattern.len() == 1).map(|r| r.pattern[0].clone()).collect())
            .collect::<Vec<Vec<String>>>();
        let mut valence = vec![Vec::new(); 5];
        for (w, &v) in &lex.valence {
            if let Ok(p) = bin_polarity(v) {
                valence[p.index()].push(w.clone());
            }
        }
        let mut taken: BTreeSet<&str> = BTreeSet::new();
        let mut heads: BTreeSet<&str> = BTreeSet::new();
        let patterns = lex
            .taxonomy
            .iter()
            .chain(&lex.concepts)
            .map(|r| &r.pattern)
            .chain(lex.tone.iter().map(|r| &r.pattern));
        for p in patterns {
            taken.extend(p.iter().map(String::as_str));
        }
        taken.extend(lex.valence.keys().map(String::as_str));
        taken.extend(NEGATORS.iter().copied());
        for p in lex.semantic.phrases().filter(|p| p.len() > 1) {
            heads.insert(p[0].as_str());
        }
        for r in lex.taxonomy.iter().chain(&lex.concepts).filter(|r| r.pattern.len() > 1) {
            heads.insert(r.pattern[0].as_str());
        }
        let mut fillers: Vec<String> = lex
            .semantic
            .phrases()
            .filter(|p| p.len() == 1)
            .map(|p| p[0].as_str())
            .chain(SLANG.iter().copied())
            .filter(|w| !taken.contains(w) && !heads.contains(w))
            .map(str::to_owned)
            .collect();
        fillers.sort();
        fillers.dedup();
        let v = Vocab {
            whitelisted: whitelisted.into_iter().map(|(_, w)| w).collect(),
            other_paths: other_paths.into_iter().map(|(_, w)| w).collect(),
            tone,
            valence,
            fillers,
        };
        let empty = v.whitelisted.is_empty()
            || v.other_paths.len() < 6
            || v.tone.iter().any(Vec::is_empty)
            || v.valence.iter().any(Vec::is_empty)
            || v.fillers.len() < 20;
        if empty {
            return Err(FixtureError::InvalidSpec("lexicons lack the word lists the cascade fixture needs".into()));
        }
        Ok(v)
    }
}

const HIGH: [usize; 2] = [3, 4];
const LOW: [usize; 2] = [0, 1];

/// Direction of each dimension in the intent profile: `Some(true)` high,
/// `Some(false)` low, `None` when the dimension stays noise.
fn profile(dim: ToneDimension) -> Option<bool> {
    use ToneDimension::*;
    match dim {
        Anger | Disgust | Confident | EmotionalRange => Some(true),
        Joy | Sadness | Tentative | Openness | Agreeableness | Conscientiousness => Some(false),
        Fear | Analytical | Extraversion => None,
    }
}

fn group_of(dim: ToneDimension) -> FeatureGroup {
    match dim.group() {
        crate::features::ToneGroup::Emotion => FeatureGroup::F3,
        crate::features::ToneGroup::Writing => FeatureGroup::F4,
        crate::features::ToneGroup::Social => FeatureGroup::F5,
    }
}

struct Generator<'a> {
    vocab: &'a Vocab,
    spec: &'a CascadeSpec,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn tone_bins(&mut self, intent_tone: Option<bool>) -> [usize; 13] {
        let mut bins = [0; 13];
        for (i, dim) in ToneDimension::ALL.into_iter().enumerate() {
            let dir = match (intent_tone, profile(dim)) {
                (Some(t), Some(high)) if self.spec.signal.contains(&group_of(dim)) => Some(t == high),
                _ => None,
            };
            bins[i] = match dir {
                Some(true) => HIGH[self.rng.gen_range(0..2)],
                Some(false) => LOW[self.rng.gen_range(0..2)],
                None => self.rng.gen_range(0..5),
            };
        }
        bins
    }

    fn polarity_bin(&mut self, intent_tone: Option<bool>) -> usize {
        match intent_tone {
            Some(t) if self.spec.signal.contains(&FeatureGroup::F1) => {
                if t {
                    self.rng.gen_range(0..2)
                } else {
                    self.rng.gen_range(3..5)
                }
            }
            _ => self.rng.gen_range(0..5),
        }
    }

    fn triggers(&mut self, paths: &[Vec<String>], n: usize) -> Vec<String> {
        let path = pick(paths, &mut self.rng).clone();
        (0..n).map(|_| pick(&path, &mut self.rng).clone()).collect()
    }

    /// Three triggers from each of six distinct non-whitelisted paths.
    fn spread(&mut self) -> Vec<String> {
        let paths: Vec<Vec<String>> = self.vocab.other_paths.choose_multiple(&mut self.rng, 6).cloned().collect();
        paths.iter().flat_map(|p| (0..3).map(|_| pick(p, &mut self.rng).clone()).collect::<Vec<_>>()).collect()
    }

    fn topical_words(&mut self, role: Role) -> Vec<String> {
        let vocab = self.vocab;
        let mut w = Vec::new();
        match role {
            Role::TopicDetected => {
                let n = self.rng.gen_range(3..=4);
                w.extend(self.triggers(&vocab.whitelisted, n));
            }
            Role::TopicMissed => {
                let k = self.rng.gen_range(1..=2);
                for path in vocab.whitelisted.choose_multiple(&mut self.rng, k).cloned().collect::<Vec<_>>() {
                    let n = self.rng.gen_range(1..=2);
                    w.extend((0..n).map(|_| pick(&path, &mut self.rng).clone()));
                }
            }
            Role::TopicFallback => {
                w.extend(self.spread());
                w.extend(self.triggers(&vocab.whitelisted, 1));
            }
            Role::OffTopicFlagged => {
                w.extend(self.triggers(&vocab.whitelisted, 3));
                let n = self.rng.gen_range(3..=4);
                w.extend(self.triggers(&vocab.other_paths, n));
            }
            Role::OffTopic => {
                if self.rng.gen_bool(0.7) {
                    let n = self.rng.gen_range(3..=4);
                    w.extend(self.triggers(&vocab.other_paths, n));
                }
            }
            Role::OffTopicFallback => w.extend(self.spread()),
        }
        let concept = match role {
            Role::TopicFallback => Some(*pick(TOPIC_CONCEPTS, &mut self.rng)),
            Role::OffTopicFallback => Some(*pick(OTHER_CONCEPTS, &mut self.rng)),
            r if r.is_topic() && self.rng.gen_bool(0.6) => Some(*pick(TOPIC_CONCEPTS, &mut self.rng)),
            r if !r.is_topic() && self.rng.gen_bool(0.2) => Some(*pick(OTHER_CONCEPTS, &mut self.rng)),
            _ => None,
        };
        w.extend(concept.map(str::to_owned));
        w
    }

    /// A 100-word post. Tone bin `b` is planted as `2b` words of that
    /// dimension, which scores exactly `b / 5`.
    fn text(&mut self, role: Role, intent_tone: Option<bool>) -> Result<String, FixtureError> {
        let base = self.topical_words(role);
        for _ in 0..MAX_TRIES {
            let mut words = base.clone();
            let bins = self.tone_bins(intent_tone);
            for (d, &b) in bins.iter().enumerate() {
                for _ in 0..2 * b {
                    words.push(pick(&self.vocab.tone[d], &mut self.rng).clone());
                }
            }
            let pb = self.polarity_bin(intent_tone);
            for _ in 0..self.rng.gen_range(1..=3) {
                words.push(pick(&self.vocab.valence[pb], &mut self.rng).clone());
            }
            if words.len() > POST_WORDS {
                continue;
            }
            while words.len() < POST_WORDS {
                words.push(pick(&self.vocab.fillers, &mut self.rng).clone());
            }
            words.shuffle(&mut self.rng);
            return Ok(sentences(&words, &mut self.rng));
        }
        Err(FixtureError::Exhausted { what: format!("{role:?} post"), tries: MAX_TRIES })
    }

    fn tags(&mut self, role: Role) -> Vec<String> {
        let rng = &mut self.rng;
        let mut t = Vec::new();
        if role.is_topic() {
            let n = rng.gen_range(1..=2);
            t.extend(tags(&SEED_TAGS, n, rng));
            if rng.gen_bool(0.5) {
                t.extend(tags(BRIDGE_TAGS, 1, rng));
            }
            if rng.gen_bool(0.3) {
                t.extend(tags(GENERIC_TAGS, 1, rng));
            }
        } else {
            let n = rng.gen_range(1..=3);
            t.extend(tags(GENERIC_TAGS, n, rng));
            if role == Role::OffTopicFlagged && rng.gen_bool(0.4) {
                t.extend(tags(BRIDGE_TAGS, 1, rng));
            }
        }
        t.sort();
        t.dedup();
        t
    }
}

/// Generate the cascade corpus with the bundled lexicons.
pub fn generate_cascade(spec: &CascadeSpec) -> Result<CascadeFixture, FixtureError> {
    generate_cascade_with(spec, &Lexicons::bundled())
}

pub fn generate_cascade_with(spec: &CascadeSpec, lexicons: &Lexicons) -> Result<CascadeFixture, FixtureError> {
    spec.validate()?;
    let vocab = Vocab::new(lexicons)?;
    let mut g = Generator { vocab: &vocab, spec, rng: ChaCha8Rng::seed_from_u64(spec.seed) };
    let mut roles: Vec<Role> = [
        (Role::TopicDetected, spec.topic_detected),
        (Role::TopicMissed, spec.topic_missed),
        (Role::TopicFallback, spec.topic_fallback),
        (Role::OffTopicFlagged, spec.off_topic_flagged),
        (Role::OffTopic, spec.off_topic),
        (Role::OffTopicFallback, spec.off_topic_fallback),
    ]
    .into_iter()
    .flat_map(|(r, n)| std::iter::repeat_n(r, n))
    .collect();
    roles.shuffle(&mut g.rng);

    let blogger_ids: Vec<String> = (0..spec.bloggers).map(|i| format!("blog{i:02}")).collect();
    let mut posts = Vec::with_capacity(roles.len());
    let mut planted = Vec::with_capacity(roles.len());
    for (i, role) in roles.into_iter().enumerate() {
        let post_id = format!("c{i:04}");
        let (intent, intent_tone) = if role.is_topic() {
            let intent = g.rng.gen_bool(spec.intent_rate);
            let flipped = g.rng.gen_bool(spec.label_noise);
            (intent, Some(intent != flipped))
        } else if role == Role::OffTopicFlagged && g.rng.gen_bool(spec.flagged_heated) {
            (false, Some(true))
        } else {
            (false, None)
        };
        let text = g.text(role, intent_tone)?;
        let tags = g.tags(role);
        let blogger = pick(&blogger_ids, &mut g.rng).clone();
        let mut post = Post::new(post_id.clone(), text)
            .with_timestamp(1_483_228_800 + g.rng.gen_range(0..365 * 86_400))
            .with_blogger(blogger.clone())
            .with_tags(tags);
        post.url = format!("https://{blogger}.tumblr.com/post/{post_id}");
        post.notes = g.rng.gen_range(0..2000);
        posts.push(post);
        planted.push(PlantedPost { post_id, role, topic: role.is_topic(), intent, intent_tone });
    }
    let dataset = Dataset::from_posts(posts)?.with_bloggers(blogger_ids.iter().map(Blogger::new).collect::<Vec<_>>())?;
    Ok(CascadeFixture { dataset, manifest: CascadeManifest { spec: spec.clone(), posts: planted } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_post, words, ConfidenceBin};

    fn small() -> CascadeSpec {
        CascadeSpec {
            topic_detected: 20,
            topic_missed: 5,
            topic_fallback: 5,
            off_topic_flagged: 10,
            off_topic: 30,
            off_topic_fallback: 5,
            ..CascadeSpec::default()
        }
    }

    #[test]
    fn every_post_has_one_hundred_words() {
        let f = generate_cascade(&small()).unwrap();
        assert_eq!(f.dataset.len(), 75);
        for p in f.dataset.posts() {
            assert_eq!(words(&p.description).len(), POST_WORDS, "{}", p.post_id);
        }
    }

    #[test]
    fn planted_tone_reaches_the_features() {
        let lex = Lexicons::bundled();
        let f = generate_cascade(&small()).unwrap();
        for (post, plan) in f.dataset.posts().iter().zip(&f.manifest.posts) {
            let Some(t) = plan.intent_tone else { continue };
            let feats = extract_post(post, &lex);
            let anger = feats.tone.emotion.anger.bin;
            let high = matches!(anger, ConfidenceBin::High | ConfidenceBin::VeryHigh);
            assert_eq!(high, t, "{}", plan.post_id);
        }
    }

    #[test]
    fn roles_match_spec_counts() {
        let f = generate_cascade(&small()).unwrap();
        assert_eq!(f.manifest.count(Role::OffTopicFlagged), 10);
        assert_eq!(f.manifest.truth().values().filter(|t| t.topic).count(), 30);
    }

    #[test]
    fn fillers_avoid_every_other_lexicon() {
        let lex = Lexicons::bundled();
        let v = Vocab::new(&lex).unwrap();
        assert!(v.fillers.iter().all(|w| !lex.valence.contains_key(w)));
        assert!(!v.fillers.iter().any(|w| w == "new" || w == "in"));
        assert_eq!(v.whitelisted.len() + v.other_paths.len(), 21);
    }

    #[test]
    fn bad_spec() {
        let spec = CascadeSpec { label_noise: 1.5, ..CascadeSpec::default() };
        assert!(matches!(generate_cascade(&spec), Err(FixtureError::InvalidSpec(_))));
    }
}
