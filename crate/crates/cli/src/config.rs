//! Run configuration: a TOML file merged with command-line overrides.
//!
//! Relative paths inside the file resolve against the file's directory.
//! Relative paths given on the command line resolve against the working
//! directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};

use extremis_core::analytics::Selector;
use extremis_core::extremism::{LogBase, MeansScope, Scorer};
use extremis_core::model::FlairPolicy;
use extremis_core::pattern::{PatternLexicon, BUNDLED_PATTERN};
use extremis_core::textstats::{Stopwords, BUNDLED_STOPWORDS, DEFAULT_CORPUS_SIZE};
use extremis_core::valence::{ValenceLexicon, BUNDLED_BOOSTERS, BUNDLED_LEXICON, BUNDLED_NEGATORS};

use crate::error::CliError;
use crate::hashing::sha256_hex;
use crate::GlobalArgs;

pub const DEFAULT_SUBREDDITS: [&str; 4] = ["IsraelPalestine", "worldnews", "Palestine", "Judaism"];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    store: Option<PathBuf>,
    out: Option<PathBuf>,
    fixtures: Option<PathBuf>,
    events: Option<PathBuf>,
    subreddits: Option<Vec<String>>,
    top_limit: Option<usize>,
    poll_time: Option<String>,
    log_base: Option<String>,
    means_scope: Option<String>,
    selectors: Option<Vec<String>>,
    cohorts: Option<Vec<String>>,
    ma_window: Option<usize>,
    invert_subjectivity: Option<bool>,
    top_n: Option<usize>,
    corpus_size: Option<usize>,
    histogram_bins: Option<usize>,
    frequency_k: Option<usize>,
    #[serde(default)]
    lexicons: LexiconPaths,
    #[serde(default)]
    flair: BTreeMap<String, BTreeSet<String>>,
}

/// Optional lexicon overrides; absent entries use the bundled files.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LexiconPaths {
    pub valence: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub pattern: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub store: PathBuf,
    pub out: PathBuf,
    pub fixtures: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub subreddits: Vec<String>,
    pub top_limit: usize,
    pub poll_time: NaiveTime,
    pub log_base: LogBase,
    pub means_scope: MeansScope,
    pub selectors: Vec<Selector>,
    pub cohorts: Vec<String>,
    pub ma_window: usize,
    pub invert_subjectivity: bool,
    pub top_n: usize,
    pub corpus_size: usize,
    pub histogram_bins: usize,
    pub frequency_k: usize,
    pub lexicons: LexiconPaths,
    pub flair: FlairPolicy,
}

fn rebase(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(args: &GlobalArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let file: FileConfig =
                    toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, base)
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let at = |p: Option<PathBuf>| p.map(|p| rebase(&base, p));

        let log_base = match file.log_base.as_deref() {
            None => LogBase::E,
            Some(s) => s.parse().map_err(config_err)?,
        };
        let means_scope = match args.means_scope.as_deref().or(file.means_scope.as_deref()) {
            None => MeansScope::Corpus,
            Some(s) => s.parse().map_err(config_err)?,
        };
        let selector_names: Vec<String> = if !args.selector.is_empty() {
            args.selector.clone()
        } else {
            file.selectors
                .unwrap_or_else(|| ["chi", "chi_norm", "chi_l", "chi_lu"].map(String::from).to_vec())
        };
        let selectors = selector_names
            .iter()
            .map(|s| s.parse::<Selector>().map_err(|e| config_err(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if selectors.is_empty() {
            return Err(config_err("at least one selector is required"));
        }
        let poll_time = match file.poll_time {
            None => NaiveTime::from_hms_opt(12, 0, 0).expect("valid time"),
            Some(s) => NaiveTime::parse_from_str(&s, "%H:%M:%S")
                .or_else(|_| NaiveTime::parse_from_str(&s, "%H:%M"))
                .map_err(|e| config_err(format!("poll_time {s:?}: {e}")))?,
        };
        let ma_window = args.ma_window.or(file.ma_window).unwrap_or(7);
        if ma_window == 0 {
            return Err(config_err("ma_window must be at least 1"));
        }
        let lexicons = LexiconPaths {
            valence: at(file.lexicons.valence),
            boosters: at(file.lexicons.boosters),
            negators: at(file.lexicons.negators),
            pattern: at(file.lexicons.pattern),
            stopwords: at(file.lexicons.stopwords),
        };
        let cfg = RunConfig {
            store: args.store.clone().or(at(file.store)).unwrap_or_else(|| "store.jsonl".into()),
            out: args.out.clone().or(at(file.out)).unwrap_or_else(|| "out".into()),
            fixtures: args.fixtures.clone().or(at(file.fixtures)),
            events: at(file.events),
            subreddits: file
                .subreddits
                .unwrap_or_else(|| DEFAULT_SUBREDDITS.map(String::from).to_vec()),
            top_limit: file.top_limit.unwrap_or(50),
            poll_time,
            log_base,
            means_scope,
            selectors,
            cohorts: file
                .cohorts
                .unwrap_or_else(|| vec!["idf".into(), "hamas".into()]),
            ma_window,
            invert_subjectivity: args.invert_subjectivity || file.invert_subjectivity.unwrap_or(false),
            top_n: file.top_n.unwrap_or(100).max(1),
            corpus_size: file.corpus_size.unwrap_or(DEFAULT_CORPUS_SIZE).max(1),
            histogram_bins: file.histogram_bins.unwrap_or(20).max(1),
            frequency_k: file.frequency_k.unwrap_or(200).max(1),
            lexicons,
            flair: FlairPolicy::new(file.flair).map_err(|e| config_err(e.to_string()))?,
        };
        cfg.check_paths()?;
        Ok(cfg)
    }

    fn check_paths(&self) -> Result<(), CliError> {
        let l = &self.lexicons;
        let files = [&l.valence, &l.boosters, &l.negators, &l.pattern, &l.stopwords, &self.events];
        for p in files.into_iter().flatten() {
            if !p.is_file() {
                return Err(config_err(format!("file not found: {}", p.display())));
            }
        }
        if let Some(dir) = &self.fixtures {
            if !dir.is_dir() {
                return Err(config_err(format!("fixture directory not found: {}", dir.display())));
            }
        }
        Ok(())
    }

    fn source(path: &Option<PathBuf>, bundled: &'static str) -> Result<String, CliError> {
        match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e)),
            None => Ok(bundled.to_string()),
        }
    }

    /// Text of every lexicon in use, keyed by role.
    pub fn lexicon_sources(&self) -> Result<BTreeMap<&'static str, String>, CliError> {
        let l = &self.lexicons;
        Ok(BTreeMap::from([
            ("valence", Self::source(&l.valence, BUNDLED_LEXICON)?),
            ("boosters", Self::source(&l.boosters, BUNDLED_BOOSTERS)?),
            ("negators", Self::source(&l.negators, BUNDLED_NEGATORS)?),
            ("pattern", Self::source(&l.pattern, BUNDLED_PATTERN)?),
            ("stopwords", Self::source(&l.stopwords, BUNDLED_STOPWORDS)?),
        ]))
    }

    pub fn lexicon_hashes(&self) -> Result<BTreeMap<&'static str, String>, CliError> {
        Ok(self
            .lexicon_sources()?
            .into_iter()
            .map(|(k, v)| (k, sha256_hex(v.as_bytes())))
            .collect())
    }

    pub fn scorer(&self) -> Result<Scorer, CliError> {
        let src = self.lexicon_sources()?;
        let bad = |e: extremis_core::valence::LexiconError| config_err(e.to_string());
        let valence = ValenceLexicon::from_sources(&src["valence"], &src["boosters"], &src["negators"]).map_err(bad)?;
        let pattern = PatternLexicon::from_sources(&src["pattern"], &src["negators"]).map_err(bad)?;
        Ok(Scorer::new(valence, pattern).with_log_base(self.log_base))
    }

    pub fn stopwords(&self) -> Result<Stopwords, CliError> {
        Ok(Stopwords::parse(&Self::source(&self.lexicons.stopwords, BUNDLED_STOPWORDS)?))
    }

    pub fn scored_csv(&self) -> PathBuf {
        self.out.join("scored.csv")
    }

    pub fn scored_meta(&self) -> PathBuf {
        self.out.join("scored.meta.json")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out.join("report")
    }

    /// Selectors for descriptive tables: the raw components, then the
    /// configured stages.
    pub fn table_selectors(&self) -> Vec<Selector> {
        let s = if self.invert_subjectivity { Selector::InvS } else { Selector::S };
        let mut out = vec![Selector::A, Selector::AbsP, s];
        for sel in &self.selectors {
            if !out.contains(sel) {
                out.push(*sel);
            }
        }
        out
    }
}
