use serde::{Deserialize, Serialize};

use super::bins::{bin_confidence, ConfidenceBin};
use super::lexicon::{occurrences, Lexicons};
use super::tokenize::words;
use super::topic::saturating_density;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToneDimension {
    Anger,
    Fear,
    Joy,
    Disgust,
    Sadness,
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    EmotionalRange,
    Analytical,
    Confident,
    Tentative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToneGroup {
    Emotion,
    Social,
    Writing,
}

impl ToneDimension {
    pub const ALL: [ToneDimension; 13] = [
        ToneDimension::Anger,
        ToneDimension::Fear,
        ToneDimension::Joy,
        ToneDimension::Disgust,
        ToneDimension::Sadness,
        ToneDimension::Openness,
        ToneDimension::Conscientiousness,
        ToneDimension::Extraversion,
        ToneDimension::Agreeableness,
        ToneDimension::EmotionalRange,
        ToneDimension::Analytical,
        ToneDimension::Confident,
        ToneDimension::Tentative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ToneDimension::Anger => "anger",
            ToneDimension::Fear => "fear",
            ToneDimension::Joy => "joy",
            ToneDimension::Disgust => "disgust",
            ToneDimension::Sadness => "sadness",
            ToneDimension::Openness => "openness",
            ToneDimension::Conscientiousness => "conscientiousness",
            ToneDimension::Extraversion => "extraversion",
            ToneDimension::Agreeableness => "agreeableness",
            ToneDimension::EmotionalRange => "emotional_range",
            ToneDimension::Analytical => "analytical",
            ToneDimension::Confident => "confident",
            ToneDimension::Tentative => "tentative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == s.trim())
    }

    pub fn group(self) -> ToneGroup {
        match self as usize {
            0..=4 => ToneGroup::Emotion,
            5..=9 => ToneGroup::Social,
            _ => ToneGroup::Writing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Emotion<T> {
    pub anger: T,
    pub fear: T,
    pub joy: T,
    pub disgust: T,
    pub sadness: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Social<T> {
    pub openness: T,
    pub conscientiousness: T,
    pub extraversion: T,
    pub agreeableness: T,
    pub emotional_range: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Writing<T> {
    pub analytical: T,
    pub confident: T,
    pub tentative: T,
}

impl<T: Copy> Emotion<T> {
    pub fn to_array(&self) -> [T; 5] {
        [self.anger, self.fear, self.joy, self.disgust, self.sadness]
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Emotion<U> {
        Emotion { anger: f(self.anger), fear: f(self.fear), joy: f(self.joy), disgust: f(self.disgust), sadness: f(self.sadness) }
    }
}

impl<T: Copy> Social<T> {
    pub fn to_array(&self) -> [T; 5] {
        [self.openness, self.conscientiousness, self.extraversion, self.agreeableness, self.emotional_range]
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Social<U> {
        Social {
            openness: f(self.openness),
            conscientiousness: f(self.conscientiousness),
            extraversion: f(self.extraversion),
            agreeableness: f(self.agreeableness),
            emotional_range: f(self.emotional_range),
        }
    }
}

impl<T: Copy> Writing<T> {
    pub fn to_array(&self) -> [T; 3] {
        [self.analytical, self.confident, self.tentative]
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Writing<U> {
        Writing { analytical: f(self.analytical), confident: f(self.confident), tentative: f(self.tentative) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneScore {
    pub raw: f64,
    pub bin: ConfidenceBin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneProfile {
    pub emotion: Emotion<ToneScore>,
    pub social: Social<ToneScore>,
    pub writing: Writing<ToneScore>,
}

impl ToneProfile {
    /// Build from raw scores in [`ToneDimension::ALL`] order.
    pub fn from_raw(raw: [f64; 13]) -> Self {
        let s = |i: usize| ToneScore { raw: raw[i], bin: bin_confidence(raw[i]).expect("tone score in [0, 1]") };
        ToneProfile {
            emotion: Emotion { anger: s(0), fear: s(1), joy: s(2), disgust: s(3), sadness: s(4) },
            social: Social {
                openness: s(5),
                conscientiousness: s(6),
                extraversion: s(7),
                agreeableness: s(8),
                emotional_range: s(9),
            },
            writing: Writing { analytical: s(10), confident: s(11), tentative: s(12) },
        }
    }

    pub fn get(&self, dim: ToneDimension) -> ToneScore {
        let e = self.emotion.to_array();
        let so = self.social.to_array();
        let w = self.writing.to_array();
        let i = dim as usize;
        match i {
            0..=4 => e[i],
            5..=9 => so[i - 5],
            _ => w[i - 10],
        }
    }

    pub fn raw_scores(&self) -> [f64; 13] {
        ToneDimension::ALL.map(|d| self.get(d).raw)
    }
}

pub fn tone_profile(text: &str, lexicons: &Lexicons) -> ToneProfile {
    tone_tokens(&words(text), lexicons)
}

pub(crate) fn tone_tokens(tokens: &[String], lexicons: &Lexicons) -> ToneProfile {
    let mut hits = [0.0f64; 13];
    for rule in &lexicons.tone {
        let n = occurrences(tokens, &rule.pattern);
        hits[rule.target as usize] += rule.weight * n as f64;
    }
    ToneProfile::from_raw(hits.map(|h| saturating_density(h, tokens.len())))
}
