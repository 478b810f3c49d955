//! Polarity and subjectivity by averaging word-level lexicon assessments.
//!
//! A lexicon word whose intensity differs from 1.0 and that directly
//! precedes another lexicon word acts as a modifier: it scales the
//! following word's polarity and yields no assessment of its own. A
//! negator directly before a word multiplies its polarity by -0.5.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;
use crate::valence::{parse_token_list, read_file, LexiconError, BUNDLED_NEGATORS};

pub const NEGATION_FACTOR: f64 = -0.5;

pub const BUNDLED_PATTERN: &str = include_str!("../data/pattern_lexicon.csv");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternEntry {
    pub polarity: f64,
    pub subjectivity: f64,
    pub intensity: f64,
}

impl PatternEntry {
    fn is_modifier(&self) -> bool {
        self.intensity != 1.0
    }
}

#[derive(Clone, Debug, Default)]
pub struct PatternLexicon {
    entries: HashMap<String, PatternEntry>,
    negators: HashSet<String>,
}

#[derive(Deserialize)]
struct Row {
    word: String,
    polarity: f64,
    subjectivity: f64,
    intensity: Option<f64>,
}

impl PatternLexicon {
    /// Parses a `word,polarity,subjectivity,intensity` CSV (header required,
    /// intensity may be blank) and a negator list. Later duplicates win.
    pub fn from_sources(csv_src: &str, negators: &str) -> Result<Self, LexiconError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(csv_src.as_bytes());
        let mut entries = HashMap::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| LexiconError::parse("pattern lexicon", line, e.to_string()))?;
            let entry = PatternEntry {
                polarity: row.polarity,
                subjectivity: row.subjectivity,
                intensity: row.intensity.unwrap_or(1.0),
            };
            if !(-1.0..=1.0).contains(&entry.polarity)
                || !(0.0..=1.0).contains(&entry.subjectivity)
                || !(entry.intensity > 0.0 && entry.intensity.is_finite())
            {
                return Err(LexiconError::parse(
                    "pattern lexicon",
                    line,
                    format!("entry for {:?} out of range", row.word),
                ));
            }
            entries.insert(row.word.to_lowercase(), entry);
        }
        Ok(Self {
            entries,
            negators: parse_token_list(negators),
        })
    }

    pub fn load(csv_path: &Path, negators: &Path) -> Result<Self, LexiconError> {
        Self::from_sources(&read_file(csv_path)?, &read_file(negators)?)
    }

    pub fn bundled() -> Self {
        Self::from_sources(BUNDLED_PATTERN, BUNDLED_NEGATORS).expect("bundled pattern lexicon is valid")
    }

    pub fn get(&self, word: &str) -> Option<&PatternEntry> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score(&self, clean_text: &str) -> PatternScores {
        score_pattern(self, clean_text)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternScores {
    pub polarity: f64,
    pub subjectivity: f64,
}

/// Scores lowercase clean text. No lexicon matches gives `(0.0, 0.0)`.
pub fn score_pattern(lex: &PatternLexicon, clean_text: &str) -> PatternScores {
    let tokens = tokenize(clean_text);
    let hits: Vec<Option<&PatternEntry>> = tokens.iter().map(|t| lex.get(t)).collect();

    let (mut pol_sum, mut subj_sum, mut n) = (0.0, 0.0, 0usize);
    for (i, hit) in hits.iter().enumerate() {
        let Some(entry) = hit else { continue };
        if entry.is_modifier() && hits.get(i + 1).is_some_and(Option::is_some) {
            continue;
        }
        let mut polarity = entry.polarity;
        if i > 0 {
            if lex.negators.contains(tokens[i - 1]) {
                polarity *= NEGATION_FACTOR;
            } else if let Some(m) = hits[i - 1].filter(|m| m.is_modifier()) {
                polarity = (polarity * m.intensity).clamp(-1.0, 1.0);
            }
        }
        pol_sum += polarity;
        subj_sum += entry.subjectivity;
        n += 1;
    }
    if n == 0 {
        return PatternScores::default();
    }
    PatternScores {
        polarity: (pol_sum / n as f64).clamp(-1.0, 1.0),
        subjectivity: (subj_sum / n as f64).clamp(0.0, 1.0),
    }
}
