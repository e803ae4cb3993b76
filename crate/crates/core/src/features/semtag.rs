//! USAS-style semantic tagging against a phrase lexicon.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::lexicon::Lexicons;
use super::tokenize::{tokenize, TokenKind};
use super::FeatureError;

pub const MAJOR_LABELS: [char; 21] = [
    'A', 'B', 'C', 'E', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'O', 'P', 'Q', 'S', 'T', 'W', 'X', 'Y', 'Z',
];

/// Code given to tokens the lexicon does not cover.
pub const UNMATCHED: &str = "Z99";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modifier {
    /// `mf`: the referent may be male or female.
    GenderMf,
    /// `c`: potential antecedent of conceptual anaphora.
    Anaphora,
}

/// One `/`-separated part of a tag code, e.g. `S2mf` or `A11.1+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagSegment {
    pub major: char,
    /// Digits and dots after the major letter.
    pub subdivision: String,
    /// Run of `+` or `-` marks.
    pub polarity: String,
    pub modifiers: BTreeSet<Modifier>,
}

impl TagSegment {
    /// Major letter plus subdivision, e.g. `S2` for `S2mf`.
    pub fn base(&self) -> String {
        format!("{}{}", self.major, self.subdivision)
    }
}

impl fmt::Display for TagSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.major, self.subdivision, self.polarity)?;
        for m in &self.modifiers {
            f.write_str(match m {
                Modifier::GenderMf => "mf",
                Modifier::Anaphora => "c",
            })?;
        }
        Ok(())
    }
}

impl FromStr for TagSegment {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, FeatureError> {
        let bad = || FeatureError::BadTagCode(s.to_owned());
        let mut chars = s.chars().peekable();
        let major = chars.next().ok_or_else(bad)?;
        let mut subdivision = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_ascii_digit() || c == '.' {
                subdivision.push(c);
                chars.next();
            } else {
                break;
            }
        }
        let unmatched = major == 'Z' && subdivision == "99";
        if !MAJOR_LABELS.contains(&major)
            || !subdivision.starts_with(|c: char| c.is_ascii_digit())
            || subdivision.ends_with('.')
        {
            return Err(bad());
        }
        let mut polarity = String::new();
        while let Some(&c) = chars.peek() {
            if c == '+' || c == '-' {
                polarity.push(c);
                chars.next();
            } else {
                break;
            }
        }
        let rest: String = chars.collect();
        let mut modifiers = BTreeSet::new();
        let mut r = rest.as_str();
        while !r.is_empty() {
            if let Some(t) = r.strip_prefix("mf") {
                modifiers.insert(Modifier::GenderMf);
                r = t;
            } else if let Some(t) = r.strip_prefix('c') {
                modifiers.insert(Modifier::Anaphora);
                r = t;
            } else {
                return Err(bad());
            }
        }
        if unmatched && !(polarity.is_empty() && modifiers.is_empty()) {
            return Err(bad());
        }
        Ok(TagSegment { major, subdivision, polarity, modifiers })
    }
}

/// A full tag code such as `M1/S2mf`: one or more segments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagCode {
    pub segments: Vec<TagSegment>,
}

impl TagCode {
    pub fn unmatched() -> Self {
        UNMATCHED.parse().expect("Z99 parses")
    }

    pub fn is_unmatched(&self) -> bool {
        self.segments.len() == 1 && self.segments[0].base() == UNMATCHED
    }

    pub fn primary(&self) -> &TagSegment {
        &self.segments[0]
    }
}

impl fmt::Display for TagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for TagCode {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, FeatureError> {
        let segments = s
            .trim()
            .split('/')
            .map(|p| p.parse().map_err(|_| FeatureError::BadTagCode(s.to_owned())))
            .collect::<Result<Vec<TagSegment>, _>>()?;
        Ok(TagCode { segments })
    }
}

impl Serialize for TagCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TagCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiword {
    /// 1-based index of the unit within the document.
    pub group_id: usize,
    /// 1-based position of this word within the unit.
    pub position: usize,
    pub group_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticTag {
    pub token: String,
    pub code: TagCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiword: Option<Multiword>,
}

impl SemanticTag {
    /// One of [`MAJOR_LABELS`], or `Z99` for unmatched tokens.
    pub fn major_label(&self) -> String {
        if self.code.is_unmatched() {
            UNMATCHED.to_owned()
        } else {
            self.code.primary().major.to_string()
        }
    }

    /// Base code of the first segment, e.g. `M1`.
    pub fn subdivision(&self) -> String {
        self.code.primary().base()
    }

    pub fn modifiers(&self) -> BTreeSet<Modifier> {
        self.code.segments.iter().flat_map(|s| s.modifiers.iter().copied()).collect()
    }

    /// Category keys counted in the semantic bag: the base code of every
    /// segment.
    pub fn categories(&self) -> impl Iterator<Item = String> + '_ {
        self.code.segments.iter().map(TagSegment::base)
    }
}

/// Renders as `token_CODE`, with `[iG.N.P` appended for multiword units.
impl fmt::Display for SemanticTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.token, self.code)?;
        if let Some(m) = self.multiword {
            write!(f, "[i{}.{}.{}", m.group_id, m.group_size, m.position)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SemanticLexicon {
    /// Phrases keyed by first word, longest first.
    by_head: HashMap<String, Vec<(Vec<String>, TagCode)>>,
    len: usize,
}

impl SemanticLexicon {
    /// Later entries for an already-listed phrase are ignored.
    pub fn new(entries: Vec<(Vec<String>, TagCode)>) -> Self {
        let mut by_head: HashMap<String, Vec<(Vec<String>, TagCode)>> = HashMap::new();
        let mut len = 0;
        for (phrase, code) in entries {
            let Some(head) = phrase.first().cloned() else { continue };
            let list = by_head.entry(head).or_default();
            if list.iter().any(|(p, _)| *p == phrase) {
                continue;
            }
            list.push((phrase, code));
            len += 1;
        }
        for list in by_head.values_mut() {
            list.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
        SemanticLexicon { by_head, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Every listed phrase, in no particular order.
    pub fn phrases(&self) -> impl Iterator<Item = &[String]> + '_ {
        self.by_head.values().flatten().map(|(p, _)| p.as_slice())
    }

    pub fn majors(&self) -> BTreeSet<char> {
        self.by_head.values().flatten().flat_map(|(_, c)| c.segments.iter().map(|s| s.major)).collect()
    }

    fn candidates(&self, head: &str) -> &[(Vec<String>, TagCode)] {
        self.by_head.get(head).map_or(&[], Vec::as_slice)
    }
}

/// Tag every word of `text`. Longest lexicon phrase wins at each position;
/// punctuation is dropped and breaks phrases; uncovered words get `Z99`.
pub fn semantic_tag(text: &str, lexicons: &Lexicons) -> Vec<SemanticTag> {
    let tokens = tokenize(text);
    let lower: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
    let mut out = Vec::new();
    let mut groups = 0;
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].kind == TokenKind::Punct {
            i += 1;
            continue;
        }
        let hit = lexicons.semantic.candidates(&lower[i]).iter().find(|(phrase, _)| {
            i + phrase.len() <= tokens.len()
                && phrase.iter().enumerate().all(|(k, w)| tokens[i + k].kind == TokenKind::Word && lower[i + k] == *w)
        });
        match hit {
            Some((phrase, code)) if phrase.len() > 1 => {
                groups += 1;
                for k in 0..phrase.len() {
                    out.push(SemanticTag {
                        token: tokens[i + k].text.to_owned(),
                        code: code.clone(),
                        multiword: Some(Multiword { group_id: groups, position: k + 1, group_size: phrase.len() }),
                    });
                }
                i += phrase.len();
            }
            Some((_, code)) => {
                out.push(SemanticTag { token: tokens[i].text.to_owned(), code: code.clone(), multiword: None });
                i += 1;
            }
            None => {
                out.push(SemanticTag { token: tokens[i].text.to_owned(), code: TagCode::unmatched(), multiword: None });
                i += 1;
            }
        }
    }
    out
}

/// Count of every category key over `tags`.
pub fn category_counts(tags: &[SemanticTag]) -> BTreeMap<String, u32> {
    let mut bag = BTreeMap::new();
    for t in tags {
        for c in t.categories() {
            *bag.entry(c).or_insert(0) += 1;
        }
    }
    bag
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn code_round_trip() {
        for code in ["M1/S2mf", "Z3c", "A11.1+", "G2.1-", "S5+c", "Z99", "A1.1.1", "N5++"] {
            let parsed: TagCode = code.parse().unwrap();
            assert_eq!(parsed.to_string(), code);
        }
        for bad in ["", "Q", "R1", "M", "M1x", "M1.", "Z99+", "/S2"] {
            assert!(bad.parse::<TagCode>().is_err(), "{bad}");
        }
    }

    #[test]
    fn refugee() {
        let tags = semantic_tag("refugee", &Lexicons::bundled());
        assert_eq!(tags.len(), 1);
        assert_eq!(tags[0].code.to_string(), "M1/S2mf");
        assert_eq!(tags[0].major_label(), "M");
        assert_eq!(tags[0].subdivision(), "M1");
        assert!(tags[0].modifiers().contains(&Modifier::GenderMf));
    }

    #[test]
    fn new_york_times_is_one_unit() {
        let tags = semantic_tag("I read the New York Times today", &Lexicons::bundled());
        let unit: Vec<_> = tags.iter().filter(|t| t.multiword.is_some()).collect();
        assert_eq!(unit.len(), 3);
        for (k, t) in unit.iter().enumerate() {
            assert_eq!(t.code.to_string(), "Z3c");
            let m = t.multiword.unwrap();
            assert_eq!((m.group_id, m.position, m.group_size), (1, k + 1, 3));
        }
        assert_eq!(unit[0].to_string(), "New_Z3c[i1.3.1");
        assert_eq!(unit[2].to_string(), "Times_Z3c[i1.3.3");
    }

    #[test]
    fn punctuation_breaks_units_and_is_dropped() {
        let tags = semantic_tag("New York, Times!", &Lexicons::bundled());
        let tokens: Vec<&str> = tags.iter().map(|t| t.token.as_str()).collect();
        assert_eq!(tokens, vec!["New", "York", "Times"]);
        assert_eq!(tags[0].code.to_string(), "Z2");
        assert_eq!(tags[0].multiword.unwrap().group_size, 2);
        assert!(tags[2].code.is_unmatched());
    }

    #[test]
    fn unknown_join_word() {
        let tags = semantic_tag("BlackLivesStillMatter", &Lexicons::bundled());
        assert_eq!(tags.len(), 1);
        assert_eq!(tags[0].token, "BlackLivesStillMatter");
        assert_eq!(tags[0].major_label(), "Z99");
    }

    #[test]
    fn bag_counts_segments() {
        let tags = semantic_tag("people people xq zv yw", &Lexicons::bundled());
        let bag = category_counts(&tags);
        assert_eq!(bag, BTreeMap::from([("S2".into(), 2), ("Z99".into(), 3)]));
        let bag = category_counts(&semantic_tag("refugee", &Lexicons::bundled()));
        assert_eq!(bag, BTreeMap::from([("M1".into(), 1), ("S2".into(), 1)]));
    }

    proptest! {
        #[test]
        fn tags_cover_words_and_units_are_complete(text in "(new|york|times|the|refugee|,|xyz| ){0,20}") {
            let tags = semantic_tag(&text, &Lexicons::bundled());
            let word_tokens: Vec<&str> = tokenize(&text)
                .into_iter()
                .filter(|t| t.kind == TokenKind::Word)
                .map(|t| t.text)
                .collect();
            let tagged: Vec<&str> = tags.iter().map(|t| t.token.as_str()).collect();
            prop_assert_eq!(tagged, word_tokens);
            let mut i = 0;
            while i < tags.len() {
                if let Some(m) = tags[i].multiword {
                    prop_assert_eq!(m.position, 1);
                    for k in 0..m.group_size {
                        let mk = tags[i + k].multiword.unwrap();
                        prop_assert_eq!((mk.group_id, mk.position, mk.group_size), (m.group_id, k + 1, m.group_size));
                    }
                    i += m.group_size;
                } else {
                    i += 1;
                }
            }
        }
    }
}
