//! Rule-based valence scoring over a token lexicon. The negative proportion
//! of the result is the anger score.
//!
//! For every token found in the lexicon the engine starts from its lexicon
//! valence and applies, in this order:
//!
//! 1. degree modifiers among the three preceding tokens, each contributing
//!    its increment (signed to push away from zero) scaled by 1.0 / 0.95 / 0.9
//!    with distance, plus the caps bonus when the modifier itself is shouted;
//! 2. the ALL-CAPS bonus when the token is capitalised and the text is not
//!    capitalised throughout;
//! 3. a single negation flip when a negator occurs within the three preceding
//!    tokens.
//!
//! Afterwards the first `but` dampens everything before it and amplifies
//! everything after it, and `!`/`?` emphasis is added to the total.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{is_all_caps, tokenize};

pub const BOOSTER_INCREMENT: f64 = 0.293;
pub const CAPS_INCREMENT: f64 = 0.733;
pub const NEGATION_SCALAR: f64 = -0.74;
pub const BUT_BEFORE_WEIGHT: f64 = 0.5;
pub const BUT_AFTER_WEIGHT: f64 = 1.5;
pub const EXCLAMATION_STEP: f64 = 0.292;
pub const MAX_EXCLAMATIONS: usize = 3;
pub const QUESTION_STEP: f64 = 0.18;
pub const QUESTION_CAP: f64 = 0.96;
pub const COMPOUND_ALPHA: f64 = 15.0;
pub const VALENCE_LIMIT: f64 = 4.0;

const DISTANCE_SCALE: [f64; 3] = [1.0, 0.95, 0.9];

pub const BUNDLED_LEXICON: &str = include_str!("../data/vader_lexicon.txt");
pub const BUNDLED_BOOSTERS: &str = include_str!("../data/boosters.txt");
pub const BUNDLED_NEGATORS: &str = include_str!("../data/negators.txt");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file} line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
}

impl LexiconError {
    pub(crate) fn parse(file: &str, line: usize, message: impl Into<String>) -> Self {
        LexiconError::Parse {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty, non-comment lines with their 1-based numbers.
pub(crate) fn data_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Parses a one-token-per-line list.
pub fn parse_token_list(src: &str) -> HashSet<String> {
    data_lines(src).map(|(_, l)| l.trim().to_lowercase()).collect()
}

#[derive(Clone, Debug, Default)]
pub struct ValenceLexicon {
    valences: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negators: HashSet<String>,
}

impl ValenceLexicon {
    /// Builds the lexicon from file contents: a `token<TAB>valence` TSV, a
    /// booster list (`token` or `token<TAB>increment`) and a negator list.
    pub fn from_sources(lexicon: &str, boosters: &str, negators: &str) -> Result<Self, LexiconError> {
        let mut valences = HashMap::new();
        for (n, line) in data_lines(lexicon) {
            let mut cols = line.split('\t');
            let token = cols.next().unwrap_or_default();
            let value = cols
                .next()
                .ok_or_else(|| LexiconError::parse("valence lexicon", n, "missing valence column"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| LexiconError::parse("valence lexicon", n, format!("bad valence {value:?}")))?;
            if !(-VALENCE_LIMIT..=VALENCE_LIMIT).contains(&value) {
                return Err(LexiconError::parse("valence lexicon", n, format!("valence {value} outside [-4, 4]")));
            }
            valences.insert(token.to_lowercase(), value);
        }

        let mut booster_map = HashMap::new();
        for (n, line) in data_lines(boosters) {
            let mut cols = line.split('\t');
            let token = cols.next().unwrap_or_default().trim().to_lowercase();
            let inc = match cols.next() {
                None => BOOSTER_INCREMENT,
                Some(v) => v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| LexiconError::parse("boosters", n, format!("bad increment {v:?}")))?,
            };
            if !(-1.0..=1.0).contains(&inc) {
                return Err(LexiconError::parse("boosters", n, format!("increment {inc} outside [-1, 1]")));
            }
            booster_map.insert(token, inc);
        }

        Ok(Self {
            valences,
            boosters: booster_map,
            negators: parse_token_list(negators),
        })
    }

    pub fn load(lexicon: &Path, boosters: &Path, negators: &Path) -> Result<Self, LexiconError> {
        Self::from_sources(&read_file(lexicon)?, &read_file(boosters)?, &read_file(negators)?)
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_sources(BUNDLED_LEXICON, BUNDLED_BOOSTERS, BUNDLED_NEGATORS)
            .expect("bundled valence lexicon is valid")
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(token).copied()
    }

    pub fn booster(&self, token: &str) -> Option<f64> {
        self.boosters.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn negators(&self) -> &HashSet<String> {
        &self.negators
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    pub fn score(&self, raw_text: &str) -> ValenceScores {
        score_valence(self, raw_text)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValenceScores {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
}

/// Anger score: the negative proportion.
pub fn anger(v: &ValenceScores) -> f64 {
    v.neg
}

fn lower(token: &str) -> std::borrow::Cow<'_, str> {
    if token.chars().any(char::is_uppercase) {
        token.to_lowercase().into()
    } else {
        token.into()
    }
}

fn emphasis(raw_text: &str) -> f64 {
    let bangs = raw_text.matches('!').count().min(MAX_EXCLAMATIONS);
    let questions = raw_text.matches('?').count();
    let q = match questions {
        0 | 1 => 0.0,
        2 | 3 => questions as f64 * QUESTION_STEP,
        _ => QUESTION_CAP,
    };
    bangs as f64 * EXCLAMATION_STEP + q
}

/// Scores raw (case-preserved) text. Text without any lexicon token scores
/// all zeros.
pub fn score_valence(lex: &ValenceLexicon, raw_text: &str) -> ValenceScores {
    let tokens = tokenize(raw_text);
    let lowered: Vec<_> = tokens.iter().map(|t| lower(t)).collect();
    let shouted: Vec<bool> = tokens.iter().map(|t| is_all_caps(t)).collect();
    let caps_count = shouted.iter().filter(|s| **s).count();
    let caps_differ = caps_count > 0 && caps_count < tokens.len();

    let mut matched = false;
    let mut sentiments = Vec::with_capacity(tokens.len());
    for i in 0..tokens.len() {
        let word = lowered[i].as_ref();
        if lex.boosters.contains_key(word) {
            sentiments.push(0.0);
            continue;
        }
        let Some(base) = lex.valence(word) else {
            sentiments.push(0.0);
            continue;
        };
        matched = true;
        let mut v = base;

        for (d, scale) in DISTANCE_SCALE.iter().enumerate() {
            let Some(j) = i.checked_sub(d + 1) else { break };
            if let Some(inc) = lex.booster(&lowered[j]) {
                let mut s = if v < 0.0 { -inc } else { inc };
                if shouted[j] && caps_differ {
                    s += if v > 0.0 { CAPS_INCREMENT } else { -CAPS_INCREMENT };
                }
                v += s * scale;
            }
        }

        if shouted[i] && caps_differ {
            v += if v > 0.0 { CAPS_INCREMENT } else { -CAPS_INCREMENT };
        }

        let negated = (1..=3)
            .filter_map(|d| i.checked_sub(d))
            .any(|j| lex.is_negator(&lowered[j]));
        if negated {
            v *= NEGATION_SCALAR;
        }
        sentiments.push(v);
    }

    if !matched {
        return ValenceScores::default();
    }

    if let Some(b) = lowered.iter().position(|t| t == "but") {
        for (k, s) in sentiments.iter_mut().enumerate() {
            if k < b {
                *s *= BUT_BEFORE_WEIGHT;
            } else if k > b {
                *s *= BUT_AFTER_WEIGHT;
            }
        }
    }

    let amp = emphasis(raw_text);
    let mut total: f64 = sentiments.iter().sum();
    if total > 0.0 {
        total += amp;
    } else if total < 0.0 {
        total -= amp;
    }
    let compound = (total / (total * total + COMPOUND_ALPHA).sqrt()).clamp(-1.0, 1.0);

    let (mut pos_sum, mut neg_sum, mut neutral) = (0.0f64, 0.0f64, 0usize);
    for &s in &sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        } else if s < 0.0 {
            neg_sum += s - 1.0;
        } else {
            neutral += 1;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += amp;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= amp;
    }
    let denom = pos_sum + neg_sum.abs() + neutral as f64;
    ValenceScores {
        neg: (neg_sum / denom).abs(),
        neu: neutral as f64 / denom,
        pos: (pos_sum / denom).abs(),
        compound,
    }
}
