//! Tab-separated lexicon files. Blank lines and lines starting with `#` are
//! ignored; patterns are matched case-insensitively on word tokens.

use std::collections::BTreeMap;
use std::path::Path;

use super::semtag::{SemanticLexicon, TagCode};
use super::tokenize::words;
use super::tone::ToneDimension;
use super::FeatureError;

const BUNDLED_TAXONOMY: &str = include_str!("../../data/lexicons/taxonomy.tsv");
const BUNDLED_CONCEPTS: &str = include_str!("../../data/lexicons/concepts.tsv");
const BUNDLED_VALENCE: &str = include_str!("../../data/lexicons/valence.tsv");
const BUNDLED_TONE: &str = include_str!("../../data/lexicons/tone.tsv");
const BUNDLED_SEMANTIC: &str = include_str!("../../data/lexicons/semantic.tsv");

pub const MAX_TAXONOMY_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRule<T> {
    /// Lowercased word tokens.
    pub pattern: Vec<String>,
    pub target: T,
    pub weight: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicons {
    pub taxonomy: Vec<WeightedRule<String>>,
    pub concepts: Vec<WeightedRule<String>>,
    pub valence: BTreeMap<String, f64>,
    pub tone: Vec<WeightedRule<ToneDimension>>,
    pub semantic: SemanticLexicon,
}

fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> + '_ {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| (n, l.split('\t').map(str::trim).collect()))
}

fn parse_err(file: &str, line: usize, reason: impl Into<String>) -> FeatureError {
    FeatureError::Lexicon { file: file.to_owned(), line, reason: reason.into() }
}

fn pattern(file: &str, line: usize, raw: &str) -> Result<Vec<String>, FeatureError> {
    let p = words(raw);
    if p.is_empty() {
        return Err(parse_err(file, line, format!("pattern {raw:?} has no words")));
    }
    Ok(p)
}

fn number(file: &str, line: usize, raw: &str) -> Result<f64, FeatureError> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(file, line, format!("invalid number {raw:?}"))),
    }
}

fn weight(file: &str, line: usize, raw: &str) -> Result<f64, FeatureError> {
    let w = number(file, line, raw)?;
    if w < 0.0 {
        return Err(parse_err(file, line, "negative weight"));
    }
    Ok(w)
}

fn expect_fields(file: &str, line: usize, fields: &[&str], n: usize) -> Result<(), FeatureError> {
    if fields.len() != n {
        return Err(parse_err(file, line, format!("expected {n} tab-separated fields, found {}", fields.len())));
    }
    Ok(())
}

/// `pattern<TAB>path<TAB>weight`, paths of 1 to 5 `/`-separated levels.
pub fn parse_taxonomy(text: &str) -> Result<Vec<WeightedRule<String>>, FeatureError> {
    const F: &str = "taxonomy.tsv";
    rows(text)
        .map(|(n, f)| {
            expect_fields(F, n, &f, 3)?;
            let levels: Vec<&str> = f[1].split('/').map(str::trim).collect();
            if levels.len() > MAX_TAXONOMY_DEPTH || levels.iter().any(|l| l.is_empty()) {
                return Err(parse_err(F, n, format!("bad taxonomy path {:?}", f[1])));
            }
            Ok(WeightedRule { pattern: pattern(F, n, f[0])?, target: levels.join("/"), weight: weight(F, n, f[2])? })
        })
        .collect()
}

/// `pattern<TAB>concept<TAB>weight`.
pub fn parse_concepts(text: &str) -> Result<Vec<WeightedRule<String>>, FeatureError> {
    const F: &str = "concepts.tsv";
    rows(text)
        .map(|(n, f)| {
            expect_fields(F, n, &f, 3)?;
            if f[1].is_empty() {
                return Err(parse_err(F, n, "empty concept"));
            }
            Ok(WeightedRule { pattern: pattern(F, n, f[0])?, target: f[1].to_owned(), weight: weight(F, n, f[2])? })
        })
        .collect()
}

/// `term<TAB>value`, value in [-1, 1].
pub fn parse_valence(text: &str) -> Result<BTreeMap<String, f64>, FeatureError> {
    const F: &str = "valence.tsv";
    let mut out = BTreeMap::new();
    for (n, f) in rows(text) {
        expect_fields(F, n, &f, 2)?;
        let term = pattern(F, n, f[0])?;
        if term.len() != 1 {
            return Err(parse_err(F, n, "valence terms are single words"));
        }
        let v = number(F, n, f[1])?;
        if !(-1.0..=1.0).contains(&v) {
            return Err(parse_err(F, n, format!("valence {v} outside [-1, 1]")));
        }
        out.insert(term.into_iter().next().unwrap(), v);
    }
    Ok(out)
}

/// `term<TAB>dimension<TAB>weight`.
pub fn parse_tone(text: &str) -> Result<Vec<WeightedRule<ToneDimension>>, FeatureError> {
    const F: &str = "tone.tsv";
    rows(text)
        .map(|(n, f)| {
            expect_fields(F, n, &f, 3)?;
            let dim = ToneDimension::parse(f[1])
                .ok_or_else(|| parse_err(F, n, format!("unknown tone dimension {:?}", f[1])))?;
            Ok(WeightedRule { pattern: pattern(F, n, f[0])?, target: dim, weight: weight(F, n, f[2])? })
        })
        .collect()
}

/// `phrase<TAB>tag_code`.
pub fn parse_semantic(text: &str) -> Result<SemanticLexicon, FeatureError> {
    const F: &str = "semantic.tsv";
    let mut entries = Vec::new();
    for (n, f) in rows(text) {
        expect_fields(F, n, &f, 2)?;
        let code: TagCode = f[1].parse().map_err(|e: FeatureError| parse_err(F, n, e.to_string()))?;
        entries.push((pattern(F, n, f[0])?, code));
    }
    Ok(SemanticLexicon::new(entries))
}

impl Lexicons {
    /// The lexicons shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_strs(BUNDLED_TAXONOMY, BUNDLED_CONCEPTS, BUNDLED_VALENCE, BUNDLED_TONE, BUNDLED_SEMANTIC)
            .expect("bundled lexicons parse")
    }

    pub fn from_strs(
        taxonomy: &str,
        concepts: &str,
        valence: &str,
        tone: &str,
        semantic: &str,
    ) -> Result<Self, FeatureError> {
        Ok(Lexicons {
            taxonomy: parse_taxonomy(taxonomy)?,
            concepts: parse_concepts(concepts)?,
            valence: parse_valence(valence)?,
            tone: parse_tone(tone)?,
            semantic: parse_semantic(semantic)?,
        })
    }

    /// Load `taxonomy.tsv`, `concepts.tsv`, `valence.tsv`, `tone.tsv` and
    /// `semantic.tsv` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, FeatureError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| FeatureError::Io { path: path.display().to_string(), source })
        };
        Self::from_strs(
            &read("taxonomy.tsv")?,
            &read("concepts.tsv")?,
            &read("valence.tsv")?,
            &read("tone.tsv")?,
            &read("semantic.tsv")?,
        )
    }
}

/// Number of positions where `pattern` occurs in `tokens`.
pub(crate) fn occurrences(tokens: &[String], pattern: &[String]) -> usize {
    if pattern.is_empty() || pattern.len() > tokens.len() {
        return 0;
    }
    tokens.windows(pattern.len()).filter(|w| *w == pattern).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicons_load() {
        let lx = Lexicons::bundled();
        assert!(!lx.taxonomy.is_empty());
        assert!(!lx.concepts.is_empty());
        assert!(!lx.valence.is_empty());
        assert!(!lx.semantic.is_empty());
        for dim in ToneDimension::ALL {
            assert!(lx.tone.iter().any(|r| r.target == dim), "{dim:?}");
        }
    }

    #[test]
    fn bundled_semantic_lexicon_covers_every_major() {
        let lx = Lexicons::bundled();
        for major in super::super::semtag::MAJOR_LABELS {
            assert!(lx.semantic.majors().contains(&major), "{major}");
        }
    }

    #[test]
    fn bundled_word_lists_do_not_overlap() {
        // A word shared between lexicons would couple feature groups.
        let lx = Lexicons::bundled();
        let single = |rules: &[WeightedRule<String>]| -> Vec<String> {
            rules.iter().filter(|r| r.pattern.len() == 1).map(|r| r.pattern[0].clone()).collect()
        };
        let tone: Vec<String> = lx.tone.iter().map(|r| r.pattern.join(" ")).collect();
        for w in &tone {
            assert!(!lx.valence.contains_key(w), "{w} is both tone and valence");
        }
        for w in single(&lx.taxonomy).iter().chain(single(&lx.concepts).iter()) {
            assert!(!tone.contains(w), "{w} is both topic and tone");
            assert!(!lx.valence.contains_key(w), "{w} is both topic and valence");
        }
        let mut seen = std::collections::BTreeSet::new();
        for w in &tone {
            assert!(seen.insert(w), "{w} listed under two tone dimensions");
        }
    }

    #[test]
    fn malformed_rows_report_line() {
        let err = parse_taxonomy("# header\nfoo\tsports\n").unwrap_err();
        assert!(matches!(err, FeatureError::Lexicon { line: 2, .. }), "{err}");
        assert!(parse_taxonomy("x\ta/b/c/d/e/f\t1\n").is_err());
        assert!(parse_valence("x\t1.5\n").is_err());
        assert!(parse_tone("x\tboredom\t1\n").is_err());
        assert!(parse_semantic("x\tQQ9\n").is_err());
    }

    #[test]
    fn occurrence_counting() {
        let toks: Vec<String> = "a b a b a".split(' ').map(String::from).collect();
        assert_eq!(occurrences(&toks, &["a".into(), "b".into()]), 2);
        assert_eq!(occurrences(&toks, &["a".into()]), 3);
        assert_eq!(occurrences(&toks, &["c".into()]), 0);
    }
}
