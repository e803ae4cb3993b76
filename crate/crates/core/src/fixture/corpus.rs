use std::collections::{BTreeMap, HashSet};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pick, sentences, tags, vocabulary, FixtureError, GENERIC_TAGS, MAX_TRIES};
use crate::corpus::{
    normalize_text, Blogger, Dataset, Language, LanguageDetector, Post, BUNDLED_SAMPLES,
};

/// Counts for a raw corpus. English counts include the planted duplicates,
/// which are always copies of short English posts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub english: usize,
    pub duplicates: usize,
    pub non_english: usize,
    pub url_only: usize,
    /// One or two words: too short to detect.
    pub too_short: usize,
    /// English posts with 100 to 999 words.
    pub mid_length: usize,
    /// English posts with 1000 words or more.
    pub long: usize,
    pub bloggers: usize,
}

impl CorpusSpec {
    /// 2955 posts: 2456 English (273 of them duplicates), 459 in other
    /// languages, 35 URL-only and 5 too short to detect.
    pub fn full() -> Self {
        CorpusSpec {
            seed: 2955,
            english: 2456,
            duplicates: 273,
            non_english: 459,
            url_only: 35,
            too_short: 5,
            mid_length: 516,
            long: 25,
            bloggers: 120,
        }
    }

    pub fn small() -> Self {
        CorpusSpec {
            seed: 100,
            english: 80,
            duplicates: 5,
            non_english: 15,
            url_only: 3,
            too_short: 2,
            mid_length: 10,
            long: 1,
            bloggers: 12,
        }
    }

    pub fn total(&self) -> usize {
        self.english + self.non_english + self.url_only + self.too_short
    }

    fn validate(&self) -> Result<(), FixtureError> {
        let short = self.english.checked_sub(self.mid_length + self.long + self.duplicates);
        match short {
            Some(s) if s >= self.duplicates => {}
            _ => return Err(FixtureError::InvalidSpec("too few short English posts to copy as duplicates".into())),
        }
        if self.bloggers == 0 {
            return Err(FixtureError::InvalidSpec("need at least one blogger".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub spec: CorpusSpec,
    pub total_posts: usize,
    pub english: usize,
    pub non_english: usize,
    pub unknown: usize,
    pub url_only: usize,
    pub duplicates: usize,
    pub after_dedup: usize,
    pub english_mid_length: usize,
    pub english_long: usize,
    /// Detected language code to post count, over every post.
    pub by_language: BTreeMap<String, usize>,
    pub duplicate_ids: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CorpusFixture {
    pub dataset: Dataset,
    pub manifest: CorpusManifest,
}

struct Draft {
    text: String,
    timestamp: i64,
    duplicate: bool,
}

const EPOCH: i64 = 1_483_228_800;
const SPAN: i64 = 180 * 86_400;

fn short_length(rng: &mut ChaCha8Rng) -> usize {
    match rng.gen_range(0..20) {
        0..=4 => rng.gen_range(5..10),
        5..=9 => rng.gen_range(10..20),
        10..=12 => rng.gen_range(20..30),
        _ => rng.gen_range(30..100),
    }
}

fn key(text: &str) -> String {
    normalize_text(text).to_lowercase()
}

/// Retry `make` until `accept` holds and the text is new.
fn unique(
    what: &str,
    seen: &mut HashSet<String>,
    rng: &mut ChaCha8Rng,
    mut make: impl FnMut(&mut ChaCha8Rng) -> String,
    accept: impl Fn(&str) -> bool,
) -> Result<String, FixtureError> {
    for _ in 0..MAX_TRIES {
        let text = make(rng);
        if accept(&text) && seen.insert(key(&text)) {
            return Ok(text);
        }
    }
    Err(FixtureError::Exhausted { what: what.into(), tries: MAX_TRIES })
}

fn words(vocab: &[String], n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..n).map(|_| pick(vocab, rng).clone()).collect()
}

/// A copy that differs only in case, spacing and trailing emoji.
fn variant(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = match rng.gen_range(0..3) {
        0 => text.to_uppercase(),
        1 => text.replace(' ', "  "),
        _ => {
            let mut c = text.chars();
            c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap_or_default()
        }
    };
    out.push_str([" \u{1F600}", " \u{1F525}\u{1F525}", " \u{2764}", " \u{1F602}"][rng.gen_range(0..4)]);
    out
}

/// Generate a raw corpus. Every text's detected language is checked while
/// generating, so the manifest counts are exact for the bundled detector.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<CorpusFixture, FixtureError> {
    spec.validate()?;
    let detector = LanguageDetector::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocabs: BTreeMap<&str, Vec<String>> = BUNDLED_SAMPLES.iter().map(|(c, s)| (*c, vocabulary(s))).collect();
    let en = &vocabs["en"];
    let foreign: Vec<&str> = vocabs.keys().copied().filter(|c| *c != "en").collect();
    let mut seen = HashSet::new();
    let mut drafts: Vec<Draft> = Vec::with_capacity(spec.total());

    let originals = spec.english - spec.duplicates;
    let short = originals - spec.mid_length - spec.long;
    let mut lengths: Vec<usize> = (0..short).map(|_| short_length(&mut rng)).collect();
    lengths.extend((0..spec.mid_length).map(|_| rng.gen_range(100..1000)));
    lengths.extend((0..spec.long).map(|_| rng.gen_range(1000..1400)));
    let is_english = |t: &str| detector.detect(t) == Language::English;
    for (i, &n) in lengths.iter().enumerate() {
        let text = unique(&format!("English post {i}"), &mut seen, &mut rng, |r| sentences(&words(en, n, r), r), is_english)?;
        let timestamp = EPOCH + rng.gen_range(0..SPAN);
        drafts.push(Draft { text, timestamp, duplicate: false });
    }
    for src in (0..short).choose_multiple(&mut rng, spec.duplicates) {
        let original = drafts[src].text.clone();
        let mut text = original.clone();
        for _ in 0..MAX_TRIES {
            let v = variant(&original, &mut rng);
            if is_english(&v) {
                text = v;
                break;
            }
        }
        debug_assert_eq!(key(&text), key(&original));
        let timestamp = drafts[src].timestamp + rng.gen_range(60..3 * 86_400);
        drafts.push(Draft { text, timestamp, duplicate: true });
    }
    for i in 0..spec.non_english {
        let code = *pick(&foreign, &mut rng);
        let vocab = &vocabs[code];
        let n = rng.gen_range(8..60);
        let want = Language::from_code(code);
        let text = unique(&format!("{code} post {i}"), &mut seen, &mut rng, |r| sentences(&words(vocab, n, r), r), |t| {
            detector.detect(t) == want
        })?;
        let timestamp = EPOCH + rng.gen_range(0..SPAN);
        drafts.push(Draft { text, timestamp, duplicate: false });
    }
    for i in 0..spec.url_only {
        let text = unique(&format!("url post {i}"), &mut seen, &mut rng, |r| {
            let n = r.gen_range(1..=2);
            (0..n).map(|_| format!("https://t.co/{:010x}", r.gen::<u64>() >> 24)).collect::<Vec<_>>().join(" ")
        }, |_| true)?;
        let timestamp = EPOCH + rng.gen_range(0..SPAN);
        drafts.push(Draft { text, timestamp, duplicate: false });
    }
    for i in 0..spec.too_short {
        let text = unique(&format!("short post {i}"), &mut seen, &mut rng, |r| {
            let n = r.gen_range(1..=2);
            words(en, n, r).join(" ")
        }, |t| detector.detect(t) == Language::Unknown)?;
        let timestamp = EPOCH + rng.gen_range(0..SPAN);
        drafts.push(Draft { text, timestamp, duplicate: false });
    }

    drafts.shuffle(&mut rng);
    let blogger_ids: Vec<String> = (0..spec.bloggers).map(|i| format!("blog{i:03}")).collect();
    let mut posts = Vec::with_capacity(drafts.len());
    let mut duplicate_ids = Vec::new();
    let mut by_language: BTreeMap<String, usize> = BTreeMap::new();
    for (i, d) in drafts.into_iter().enumerate() {
        let id = format!("p{i:05}");
        if d.duplicate {
            duplicate_ids.push(id.clone());
        }
        *by_language.entry(detector.detect(&d.text).code().to_string()).or_default() += 1;
        let blogger = pick(&blogger_ids, &mut rng).clone();
        let n_tags = rng.gen_range(0..=4);
        let mut post = Post::new(id.clone(), d.text)
            .with_timestamp(d.timestamp)
            .with_blogger(blogger.clone())
            .with_tags(tags(GENERIC_TAGS, n_tags, &mut rng));
        post.url = format!("https://{blogger}.tumblr.com/post/{id}");
        post.notes = rng.gen_range(0..500);
        posts.push(post);
    }
    let bloggers: Vec<Blogger> = blogger_ids
        .iter()
        .map(|b| {
            let mut x = Blogger::new(b.clone());
            x.post_count = posts.iter().filter(|p| &p.blogger_id == b).count() as u64;
            x
        })
        .collect();
    let dataset = Dataset::from_posts(posts)?.with_bloggers(bloggers)?;
    let unknown = by_language.get("unknown").copied().unwrap_or(0);
    let english = by_language.get("en").copied().unwrap_or(0);
    let manifest = CorpusManifest {
        total_posts: spec.total(),
        english,
        non_english: spec.total() - english - unknown,
        unknown,
        url_only: spec.url_only,
        duplicates: spec.duplicates,
        after_dedup: spec.total() - spec.duplicates,
        english_mid_length: spec.mid_length,
        english_long: spec.long,
        by_language,
        duplicate_ids,
        spec: spec.clone(),
    };
    Ok(CorpusFixture { dataset, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{deduplicate, filter_english, word_count};

    #[test]
    fn small_fixture_matches_manifest() {
        let f = generate_corpus(&CorpusSpec::small()).unwrap();
        let m = &f.manifest;
        assert_eq!(f.dataset.len(), 100);
        assert_eq!(m.english, 80);
        assert_eq!(m.unknown, 5);
        let (deduped, removed) = deduplicate(&f.dataset);
        assert_eq!(removed, 5);
        assert_eq!(deduped.len(), m.after_dedup);
        let (english, _) = filter_english(&f.dataset);
        assert_eq!(english.len(), 80);
        let mid = english.posts().iter().filter(|p| (100..1000).contains(&word_count(&p.description))).count();
        assert_eq!(mid, 10);
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_corpus(&CorpusSpec::small()).unwrap();
        let b = generate_corpus(&CorpusSpec::small()).unwrap();
        assert_eq!(a.dataset.posts(), b.dataset.posts());
    }

    #[test]
    fn rejects_impossible_spec() {
        let spec = CorpusSpec { duplicates: 80, ..CorpusSpec::small() };
        assert!(matches!(generate_corpus(&spec), Err(FixtureError::InvalidSpec(_))));
    }
}
