//! Term-frequency tables for top-scoring corpora and their Jaccard overlap.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use thiserror::Error;

use crate::analytics::{top_n, LabeledMatrix, Selector};
use crate::extremism::ScoredSubmission;
use crate::ingest::preprocess;
use crate::text::is_punctuation;
use crate::valence::{data_lines, read_file, LexiconError};

pub const DEFAULT_CORPUS_SIZE: usize = 1000;

pub const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TextStatsError {
    #[error("need at least 2 tables, got {0}")]
    TooFewTables(usize),
    #[error("duplicate table name {0:?}")]
    DuplicateName(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn parse(src: &str) -> Self {
        Self(data_lines(src).map(|(_, l)| l.to_lowercase()).collect())
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Ok(Self::parse(&read_file(path)?))
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

/// Removes every punctuation character (so `don't` becomes `dont`), splits on
/// whitespace and drops stopwords.
pub fn clean_tokens(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let stripped: String = text.chars().filter(|c| !is_punctuation(*c)).collect();
    stripped
        .split_whitespace()
        .filter(|t| !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

/// Token counts. Keys are never empty and counts are always positive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreqTable {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl FreqTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str) {
        if token.is_empty() {
            return;
        }
        *self.counts.entry(token.to_string()).or_default() += 1;
        self.total += 1;
    }

    pub fn merge(mut self, other: FreqTable) -> FreqTable {
        for (token, count) in other.counts {
            *self.counts.entry(token).or_default() += count;
        }
        self.total += other.total;
        self
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: AsRef<str>> FromIterator<S> for FreqTable {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut table = FreqTable::new();
        for t in iter {
            table.add(t.as_ref());
        }
        table
    }
}

/// Token frequencies over the `n` top-ranked items by `selector`.
pub fn build_corpus(items: &[ScoredSubmission], selector: Selector, n: usize, stopwords: &Stopwords) -> FreqTable {
    top_n(items, selector, n.max(1))
        .into_iter()
        .filter_map(|item| preprocess(&item.submission.text).as_text().map(str::to_string))
        .map(|clean| clean_tokens(&clean, stopwords).into_iter().collect::<FreqTable>())
        .fold(FreqTable::new(), FreqTable::merge)
}

/// Overlap of unique-token sets; two empty tables give 0.
pub fn jaccard(a: &FreqTable, b: &FreqTable) -> f64 {
    let ka: BTreeSet<&str> = a.keys().collect();
    let kb: BTreeSet<&str> = b.keys().collect();
    let union = ka.union(&kb).count();
    if union == 0 {
        return 0.0;
    }
    ka.intersection(&kb).count() as f64 / union as f64
}

pub fn jaccard_matrix(tables: &[(String, FreqTable)]) -> Result<LabeledMatrix, TextStatsError> {
    if tables.len() < 2 {
        return Err(TextStatsError::TooFewTables(tables.len()));
    }
    let mut seen = HashSet::new();
    for (name, _) in tables {
        if !seen.insert(name.as_str()) {
            return Err(TextStatsError::DuplicateName(name.clone()));
        }
    }
    let cells = tables
        .iter()
        .map(|(_, a)| tables.iter().map(|(_, b)| Some(jaccard(a, b))).collect())
        .collect();
    Ok(LabeledMatrix {
        labels: tables.iter().map(|(n, _)| n.clone()).collect(),
        cells,
    })
}

/// The `k` most frequent tokens, count descending then token ascending.
pub fn export_frequencies(table: &FreqTable, k: usize) -> Vec<(String, u64)> {
    let mut ranked: Vec<(String, u64)> = table.iter().map(|(t, c)| (t.to_string(), c)).collect();
    ranked.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    ranked.truncate(k);
    ranked
}
