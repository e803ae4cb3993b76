use serde::{Deserialize, Serialize};

use super::bins::{bin_polarity, Polarity};
use super::lexicon::Lexicons;
use super::tokenize::words;

/// A negator this many tokens or fewer before a valence term flips its sign.
pub const NEGATION_WINDOW: usize = 2;

pub const NEGATORS: &[&str] = &[
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "cannot", "without",
    "don't", "doesn't", "didn't", "isn't", "wasn't", "aren't", "won't", "can't", "hardly",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub raw: f64,
    pub polarity: Polarity,
}

impl SentimentScore {
    pub const NEUTRAL: SentimentScore = SentimentScore { raw: 0.0, polarity: Polarity::Neutral };
}

pub fn document_sentiment(text: &str, lexicons: &Lexicons) -> SentimentScore {
    sentiment_tokens(&words(text), lexicons)
}

/// Mean signed valence of matched terms, clamped to [-1, 1].
pub(crate) fn sentiment_tokens(tokens: &[String], lexicons: &Lexicons) -> SentimentScore {
    let mut sum = 0.0;
    let mut matched = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(&v) = lexicons.valence.get(tok) else { continue };
        let negated = tokens[i.saturating_sub(NEGATION_WINDOW)..i]
            .iter()
            .any(|t| NEGATORS.contains(&t.as_str()));
        sum += if negated { -v } else { v };
        matched += 1;
    }
    if matched == 0 {
        return SentimentScore::NEUTRAL;
    }
    let raw = (sum / matched as f64).clamp(-1.0, 1.0);
    SentimentScore { raw, polarity: bin_polarity(raw).expect("clamped") }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::lexicon::parse_valence;
    use proptest::prelude::*;

    fn lex(valence: &str) -> Lexicons {
        Lexicons { valence: parse_valence(valence).unwrap(), ..Lexicons::default() }
    }

    #[test]
    fn empty_is_neutral() {
        assert_eq!(document_sentiment("", &Lexicons::bundled()), SentimentScore::NEUTRAL);
    }

    #[test]
    fn single_term() {
        let s = document_sentiment("simply superb", &lex("superb\t0.8\n"));
        assert_eq!(s.raw, 0.8);
        assert_eq!(s.polarity, Polarity::StronglyPositive);
    }

    #[test]
    fn negation_flips() {
        let s = document_sentiment("not good", &lex("good\t0.5\n"));
        assert_eq!(s.raw, -0.5);
        assert_eq!(s.polarity, Polarity::Negative);
        let s = document_sentiment("not very good", &lex("good\t0.5\n"));
        assert_eq!(s.raw, -0.5);
        let s = document_sentiment("not at all good", &lex("good\t0.5\n"));
        assert_eq!(s.raw, 0.5);
        let s = document_sentiment("it isn't good", &lex("good\t0.5\n"));
        assert_eq!(s.raw, -0.5);
    }

    #[test]
    fn mean_of_matches() {
        let s = document_sentiment("good and bad and bad", &lex("good\t0.6\nbad\t-0.3\n"));
        assert!(s.raw.abs() < 1e-12);
        assert_eq!(s.polarity, Polarity::Neutral);
    }

    proptest! {
        #[test]
        fn raw_is_bounded(text in "[a-z ]{0,60}") {
            let s = document_sentiment(&text, &Lexicons::bundled());
            prop_assert!((-1.0..=1.0).contains(&s.raw));
            prop_assert_eq!(s.polarity, bin_polarity(s.raw).unwrap());
        }
    }
}
