use std::sync::OnceLock;

const EMOTICON_TABLE: &str = include_str!("../../data/emoji_ranges.txt");

/// An inclusive codepoint range stripped during normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmoticonRange {
    pub first: u32,
    pub last: u32,
    pub label: &'static str,
}

impl EmoticonRange {
    pub fn contains(&self, c: char) -> bool {
        (self.first..=self.last).contains(&(c as u32))
    }
}

/// The bundled emoticon/pictograph range table, sorted by first codepoint.
pub fn emoticon_ranges() -> &'static [EmoticonRange] {
    static TABLE: OnceLock<Vec<EmoticonRange>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut ranges: Vec<EmoticonRange> = EMOTICON_TABLE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|line| {
                let mut cols = line.split('\t');
                let first = cols.next().and_then(|h| u32::from_str_radix(h, 16).ok());
                let last = cols.next().and_then(|h| u32::from_str_radix(h, 16).ok());
                let label = cols.next().unwrap_or("").trim();
                match (first, last) {
                    (Some(first), Some(last)) if first <= last => EmoticonRange { first, last, label },
                    _ => panic!("malformed emoticon range line: {line:?}"),
                }
            })
            .collect();
        ranges.sort_by_key(|r| r.first);
        ranges
    })
}

pub fn is_emoticon(c: char) -> bool {
    let table = emoticon_ranges();
    let cp = c as u32;
    let idx = table.partition_point(|r| r.last < cp);
    table.get(idx).is_some_and(|r| r.contains(c))
}

fn is_kept(c: char) -> bool {
    !is_emoticon(c) && (c.is_alphanumeric() || c.is_ascii_punctuation())
}

/// Strip emoticons and characters outside letters, digits and ASCII
/// punctuation, collapse whitespace runs to one space and trim.
///
/// Pure removal: the result never has more characters than the input, and
/// applying the function twice gives the same result as applying it once.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if is_kept(c) {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}
