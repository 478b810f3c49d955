//! Shared tokenization used by both sentiment engines, word counting and
//! cohort matching.

/// Punctuation class used throughout the crate: ASCII punctuation plus the
/// common Unicode quotation marks, dashes and ellipses found in Reddit text.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{00A1}'
                | '\u{00A7}'
                | '\u{00AB}'
                | '\u{00B6}'
                | '\u{00B7}'
                | '\u{00BB}'
                | '\u{00BF}'
                | '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
                | '\u{3001}'..='\u{3003}'
                | '\u{FF01}'..='\u{FF0F}'
        )
}

/// Splits on whitespace and strips leading/trailing punctuation from each
/// token. Tokens made only of punctuation (emoticons such as `:)` or `</3`
/// minus the digit) are kept verbatim so lexicon entries for them still match.
///
/// Inner punctuation survives: `hamas-led` and `don't` are single tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().map(strip_token).collect()
}

fn strip_token(raw: &str) -> &str {
    let stripped = raw.trim_matches(is_punctuation);
    if stripped.is_empty() {
        raw
    } else {
        stripped
    }
}

/// True when the token carries at least one non-punctuation character.
pub fn is_word(token: &str) -> bool {
    token.chars().any(|c| !is_punctuation(c))
}

/// Word count `L`: whitespace tokens of the clean text, excluding tokens that
/// consist solely of punctuation.
pub fn word_count(clean_text: &str) -> usize {
    clean_text
        .split_whitespace()
        .filter(|t| is_word(t))
        .count()
}

/// Python-style `str.isupper`: at least one cased character and no lowercase
/// ones.
pub fn is_all_caps(token: &str) -> bool {
    let mut cased = false;
    for c in token.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}
