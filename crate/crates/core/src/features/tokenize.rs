#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub kind: TokenKind,
}

/// Split on whitespace and punctuation boundaries.
///
/// A word is a run of letters and digits; an apostrophe or hyphen stays inside
/// a word when it sits between two alphanumerics ("don't", "anti-war"). Every
/// other non-space character is a punctuation token of its own.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < chars.len() {
                let d = chars[j].1;
                let joins = (d == '\'' || d == '-')
                    && chars.get(j + 1).is_some_and(|n| n.1.is_alphanumeric());
                if d.is_alphanumeric() {
                    j += 1;
                } else if joins {
                    j += 2;
                } else {
                    break;
                }
            }
            let end = chars.get(j).map_or(text.len(), |n| n.0);
            out.push(Token { text: &text[start..end], kind: TokenKind::Word });
            i = j;
        } else {
            let end = chars.get(i + 1).map_or(text.len(), |n| n.0);
            out.push(Token { text: &text[start..end], kind: TokenKind::Punct });
            i += 1;
        }
    }
    out
}

/// Lowercased word tokens, punctuation dropped.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.text.to_lowercase())
        .collect()
}
