use std::sync::LazyLock;

use regex::Regex;

static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{P}+").unwrap());

/// How punctuation inside a whitespace-delimited token is treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PunctuationMode {
    /// Delete punctuation characters in place: `a--b` becomes `ab`.
    #[default]
    Delete,
    /// Treat runs of punctuation as token boundaries: `a--b` becomes `a b`.
    Split,
}

/// Tokenize natural-language text: whitespace split, punctuation removal,
/// lowercasing. Scripts without case are left untouched.
pub fn tokenize_natural(text: &str) -> Vec<String> {
    tokenize_with(text, PunctuationMode::Delete)
}

pub fn tokenize_with(text: &str, mode: PunctuationMode) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        match mode {
            PunctuationMode::Delete => {
                let token = PUNCT.replace_all(raw, "").to_lowercase();
                if !token.is_empty() {
                    out.push(token);
                }
            }
            PunctuationMode::Split => {
                out.extend(
                    PUNCT
                        .split(raw)
                        .filter(|piece| !piece.is_empty())
                        .map(str::to_lowercase),
                );
            }
        }
    }
    out
}
