//! Lemma and token normalization shared by every lookup table in the crate.
//!
//! A lemma is normalized by applying Unicode NFC, lowercasing, trimming, and
//! collapsing each run of internal whitespace into a single underscore. The
//! same rule keys the taxonomy lemma index, the embedding vocabulary, and the
//! Wiktionary store, so a surface form resolves identically everywhere.

use unicode_normalization::UnicodeNormalization;

/// Normalize a lemma or token.
///
/// ```
/// assert_eq!(taxenrich::text::normalize("  Massif   Central "), "massif_central");
/// assert_eq!(taxenrich::text::normalize("Duck"), "duck");
/// ```
pub fn normalize(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    let mut out = String::with_capacity(composed.len());
    for (i, part) in composed.split_whitespace().enumerate() {
        if i > 0 {
            out.push('_');
        }
        out.extend(part.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Split a normalized multiword token into its parts (underscore or hyphen).
pub fn subtokens(normalized: &str) -> impl Iterator<Item = &str> {
    normalized.split(['_', '-']).filter(|s| !s.is_empty())
}

/// Tokenize free text into normalized word tokens.
///
/// Any character that is not alphanumeric separates tokens, so punctuation,
/// underscores and hyphens never end up inside a token.
pub fn text_tokens(text: &str) -> Vec<String> {
    let composed: String = text.nfc().collect();
    composed
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(|s| s.chars().flat_map(char::to_lowercase).collect())
        .collect()
}

/// Word tokens of a surface form, splitting on whitespace, underscores and hyphens.
pub fn surface_tokens(surface: &str) -> impl Iterator<Item = &str> {
    surface.split(|c: char| c.is_whitespace() || c == '_' || c == '-').filter(|s| !s.is_empty())
}

/// Capitalization heuristic for proper names: any token starts with an uppercase letter.
pub fn looks_like_named_entity(surface: &str) -> bool {
    surface_tokens(surface).any(|tok| tok.chars().next().is_some_and(char::is_uppercase))
}

/// Number of alphabetic characters in a surface form.
pub fn letter_count(surface: &str) -> usize {
    surface.chars().filter(|c| c.is_alphabetic()).count()
}

/// A surface form made of more than one word.
pub fn is_multiword(surface: &str) -> bool {
    surface.split(|c: char| c.is_whitespace() || c == '_').filter(|s| !s.is_empty()).count() > 1
}
