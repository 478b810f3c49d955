//! Extremism scoring.
//!
//! ```text
//! chi      = a * |p| * s
//! chi_norm = chi / (mean(a) * mean(|p|) * mean(s))
//! chi_l    = chi_norm / log(L + 1)
//! chi_lu   = chi_l * max(0, 1 + u / n)
//! ```
//!
//! `L` is the word count of the clean text, `u` the upvotes and `n` the
//! number of comments on the thread the submission belongs to (at least 1).
//! Corpus scoring is two passes: sentiment for every item and the corpus
//! means, then normalisation and weighting.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{preprocess, Cleaned};
use crate::model::{Kind, Submission};
use crate::pattern::PatternLexicon;
use crate::text::word_count;
use crate::valence::{anger, ValenceLexicon};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Anger,
    AbsPolarity,
    Subjectivity,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Anger => "mean anger",
            Component::AbsPolarity => "mean |polarity|",
            Component::Subjectivity => "mean subjectivity",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("empty corpus: no scorable submissions{}", scope_suffix(.0))]
    EmptyCorpus(Option<String>),
    #[error("degenerate corpus: {component} is zero{}", scope_suffix(.scope))]
    DegenerateCorpus {
        component: Component,
        scope: Option<String>,
    },
}

fn scope_suffix(scope: &Option<String>) -> String {
    scope.as_ref().map(|s| format!(" in r/{s}")).unwrap_or_default()
}

/// Anger `a`, polarity `p` and subjectivity `s` of one text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    pub a: f64,
    pub p: f64,
    pub s: f64,
}

impl SentimentScores {
    pub fn new(a: f64, p: f64, s: f64) -> Self {
        Self { a, p, s }
    }
}

/// Corpus means of `a`, `|p|` and `s`; all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeans {
    mean_a: f64,
    mean_abs_p: f64,
    mean_s: f64,
}

impl CorpusMeans {
    pub fn new(mean_a: f64, mean_abs_p: f64, mean_s: f64) -> Result<Self, ScoreError> {
        for (v, component) in [
            (mean_a, Component::Anger),
            (mean_abs_p, Component::AbsPolarity),
            (mean_s, Component::Subjectivity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScoreError::DegenerateCorpus { component, scope: None });
            }
        }
        Ok(Self {
            mean_a,
            mean_abs_p,
            mean_s,
        })
    }

    pub fn mean_a(&self) -> f64 {
        self.mean_a
    }

    pub fn mean_abs_p(&self) -> f64 {
        self.mean_abs_p
    }

    pub fn mean_s(&self) -> f64 {
        self.mean_s
    }

    pub fn product(&self) -> f64 {
        self.mean_a * self.mean_abs_p * self.mean_s
    }
}

/// Sum that does not depend on the order of the input.
pub(crate) fn order_free_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

pub fn raw_extremism(sc: &SentimentScores) -> f64 {
    sc.a * sc.p.abs() * sc.s
}

pub fn corpus_means(scores: &[SentimentScores]) -> Result<CorpusMeans, ScoreError> {
    if scores.is_empty() {
        return Err(ScoreError::EmptyCorpus(None));
    }
    let n = scores.len() as f64;
    let mean = |f: fn(&SentimentScores) -> f64| order_free_sum(scores.iter().map(f).collect()) / n;
    CorpusMeans::new(mean(|s| s.a), mean(|s| s.p.abs()), mean(|s| s.s))
}

pub fn normalize(chi: f64, means: &CorpusMeans) -> f64 {
    chi / means.product()
}

/// Base of the logarithm in the length weighting. Any base rescales every
/// `chi_l` by the same constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(format!("unknown log base {other:?} (expected e, 2 or 10)")),
        }
    }
}

/// `chi_norm / ln(L + 1)`; zero for an empty text.
pub fn weight_length(chi_norm: f64, length: usize) -> f64 {
    weight_length_in(chi_norm, length, LogBase::E)
}

pub fn weight_length_in(chi_norm: f64, length: usize, base: LogBase) -> f64 {
    if length == 0 {
        return 0.0;
    }
    chi_norm / base.log(length as f64 + 1.0)
}

/// `chi_l * max(0, 1 + u / n)` with `n` floored at 1.
pub fn weight_upvotes(chi_l: f64, upvotes: i64, n: u64) -> f64 {
    let n = n.max(1) as f64;
    chi_l * (1.0 + upvotes as f64 / n).max(0.0)
}

/// Whether upvote weighting is applied. Validation runs stop at `chi_l`
/// and report `chi_lu == chi_l`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Weighting {
    #[default]
    Full,
    LengthOnly,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeansScope {
    #[default]
    Corpus,
    Subreddit,
}

impl std::str::FromStr for MeansScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corpus" => Ok(MeansScope::Corpus),
            "subreddit" => Ok(MeansScope::Subreddit),
            other => Err(format!("unknown means scope {other:?} (expected corpus or subreddit)")),
        }
    }
}

/// A submission with every scoring stage.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSubmission {
    pub submission: Submission,
    pub scores: SentimentScores,
    /// Word count `L`.
    pub length: usize,
    /// Thread size used for upvote weighting.
    pub n: u64,
    pub chi: f64,
    pub chi_norm: f64,
    pub chi_l: f64,
    pub chi_lu: f64,
    /// Tombstoned: scored zero and left out of all means.
    pub excluded: bool,
}

/// First-pass result for one submission.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Analysis {
    Tombstone,
    Scored { scores: SentimentScores, length: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Means {
    Corpus(CorpusMeans),
    Subreddit(BTreeMap<String, CorpusMeans>),
}

impl Means {
    pub fn for_subreddit(&self, subreddit: &str) -> Option<&CorpusMeans> {
        match self {
            Means::Corpus(m) => Some(m),
            Means::Subreddit(map) => map.get(subreddit),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScoredCorpus {
    pub items: Vec<ScoredSubmission>,
    pub means: Means,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScoreOptions {
    pub scope: MeansScope,
    pub weighting: Weighting,
}

/// Both sentiment engines plus the length-weighting base.
#[derive(Clone, Debug)]
pub struct Scorer {
    pub valence: ValenceLexicon,
    pub pattern: PatternLexicon,
    pub log_base: LogBase,
}

impl Scorer {
    pub fn new(valence: ValenceLexicon, pattern: PatternLexicon) -> Self {
        Self {
            valence,
            pattern,
            log_base: LogBase::E,
        }
    }

    pub fn bundled() -> Self {
        Self::new(ValenceLexicon::bundled(), PatternLexicon::bundled())
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    /// Sentiment and word count; the valence engine sees the raw text so
    /// capitalisation still counts.
    pub fn analyze(&self, sub: &Submission) -> Analysis {
        match preprocess(&sub.text) {
            Cleaned::Tombstone => Analysis::Tombstone,
            Cleaned::Text(clean) => {
                let v = self.valence.score(&sub.text);
                let p = self.pattern.score(&clean);
                Analysis::Scored {
                    scores: SentimentScores::new(anger(&v), p.polarity, p.subjectivity),
                    length: word_count(&clean),
                }
            }
        }
    }

    fn finish(
        &self,
        sub: &Submission,
        analysis: Analysis,
        means: &CorpusMeans,
        n: u64,
        weighting: Weighting,
    ) -> ScoredSubmission {
        let n = n.max(1);
        let (scores, length) = match analysis {
            Analysis::Tombstone => {
                return ScoredSubmission {
                    submission: sub.clone(),
                    scores: SentimentScores::default(),
                    length: 0,
                    n,
                    chi: 0.0,
                    chi_norm: 0.0,
                    chi_l: 0.0,
                    chi_lu: 0.0,
                    excluded: true,
                }
            }
            Analysis::Scored { scores, length } => (scores, length),
        };
        let chi = raw_extremism(&scores);
        let chi_norm = normalize(chi, means);
        let chi_l = weight_length_in(chi_norm, length, self.log_base);
        let chi_lu = match weighting {
            Weighting::Full => weight_upvotes(chi_l, sub.upvotes, n),
            Weighting::LengthOnly => chi_l,
        };
        ScoredSubmission {
            submission: sub.clone(),
            scores,
            length,
            n,
            chi,
            chi_norm,
            chi_l,
            chi_lu,
            excluded: false,
        }
    }

    /// Scores one submission against precomputed means. `n` is the comment
    /// count of its thread: the post's own `n_comments` for posts, the parent
    /// post's for comments.
    pub fn score_submission(&self, sub: &Submission, means: &CorpusMeans, n: u64) -> ScoredSubmission {
        self.finish(sub, self.analyze(sub), means, n, Weighting::Full)
    }

    /// Two-pass scoring of a whole corpus. Output order follows the input
    /// and does not depend on the thread count.
    pub fn score_corpus(&self, subs: &[Submission], opts: ScoreOptions) -> Result<ScoredCorpus, ScoreError> {
        let analyses: Vec<Analysis> = subs.par_iter().map(|s| self.analyze(s)).collect();
        let means = compute_means(subs, &analyses, opts.scope)?;
        let threads = thread_sizes(subs);

        let items = subs
            .par_iter()
            .zip(analyses.par_iter())
            .map(|(sub, analysis)| {
                let m = means
                    .for_subreddit(&sub.subreddit)
                    .copied()
                    // tombstone-only subreddit: nothing in it is scored anyway
                    .unwrap_or(CorpusMeans {
                        mean_a: 1.0,
                        mean_abs_p: 1.0,
                        mean_s: 1.0,
                    });
                self.finish(sub, *analysis, &m, thread_size(sub, &threads), opts.weighting)
            })
            .collect();
        Ok(ScoredCorpus { items, means })
    }
}

/// `n_comments` of each post in the set, keyed by post id.
pub fn thread_sizes(subs: &[Submission]) -> HashMap<&str, u64> {
    subs.iter()
        .filter(|s| s.kind == Kind::Post)
        .map(|s| (s.id.as_str(), s.n_comments.unwrap_or(0)))
        .collect()
}

/// Thread size for weighting; orphan comments (parent not collected) get 1.
pub fn thread_size(sub: &Submission, threads: &HashMap<&str, u64>) -> u64 {
    let n = match sub.kind {
        Kind::Post => sub.n_comments.unwrap_or(0),
        Kind::Comment => threads.get(sub.post_id.as_str()).copied().unwrap_or(1),
    };
    n.max(1)
}

fn compute_means(subs: &[Submission], analyses: &[Analysis], scope: MeansScope) -> Result<Means, ScoreError> {
    let scored = |keep: &dyn Fn(&Submission) -> bool| -> Vec<SentimentScores> {
        subs.iter()
            .zip(analyses)
            .filter(|(s, _)| keep(s))
            .filter_map(|(_, a)| match a {
                Analysis::Scored { scores, .. } => Some(*scores),
                Analysis::Tombstone => None,
            })
            .collect()
    };
    match scope {
        MeansScope::Corpus => corpus_means(&scored(&|_| true)).map(Means::Corpus),
        MeansScope::Subreddit => {
            let mut names: Vec<&str> = subs.iter().map(|s| s.subreddit.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            let mut map = BTreeMap::new();
            for name in names {
                let set = scored(&|s| s.subreddit == name);
                if set.is_empty() {
                    continue;
                }
                let m = corpus_means(&set).map_err(|e| match e {
                    ScoreError::DegenerateCorpus { component, .. } => ScoreError::DegenerateCorpus {
                        component,
                        scope: Some(name.to_string()),
                    },
                    other => other,
                })?;
                map.insert(name.to_string(), m);
            }
            if map.is_empty() {
                return Err(ScoreError::EmptyCorpus(None));
            }
            Ok(Means::Subreddit(map))
        }
    }
}
