//! Daily polling of subreddit top posts and their comment threads, plus the
//! text preparation applied before scoring.
//!
//! The client talks to a [`Transport`]; in fixture mode it reads recorded
//! responses from disk and never touches the transport at all.

mod reddit;
mod transport;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use chrono::NaiveTime;
use serde::Serialize;
use thiserror::Error;

pub use reddit::{fixture_dates, fixture_path, Credentials, RedditClient, Source, CLIENT_ID_VAR, CLIENT_SECRET_VAR};
#[cfg(feature = "live")]
pub use transport::ReqwestTransport;
pub use transport::{HttpRequest, HttpResponse, Method, OfflineTransport, Transport};

use crate::model::Submission;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("credential error: {0}")]
    Credential(String),
    #[error("rate limited, retry after {retry_after:?}")]
    RateLimited { retry_after: Duration },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid ingest configuration: {0}")]
    Config(String),
}

/// Bodies that mark a deleted or moderated submission.
pub const DELETION_MARKERS: [&str; 2] = ["[deleted]", "[removed]"];

/// Result of text preparation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cleaned {
    Text(String),
    /// Deleted, removed or empty; excluded from scoring.
    Tombstone,
}

impl Cleaned {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cleaned::Text(t) => Some(t),
            Cleaned::Tombstone => None,
        }
    }
}

/// Lowercases and collapses whitespace runs; deletion markers and blank
/// bodies become [`Cleaned::Tombstone`].
pub fn preprocess(raw: &str) -> Cleaned {
    let trimmed = raw.trim();
    if trimmed.is_empty() || DELETION_MARKERS.iter().any(|m| trimmed.eq_ignore_ascii_case(m)) {
        return Cleaned::Tombstone;
    }
    let lower = trimmed.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    for word in lower.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    Cleaned::Text(out)
}

#[derive(Clone, Debug)]
pub struct IngestConfig {
    pub subreddits: Vec<String>,
    pub top_limit: usize,
    pub poll_time: NaiveTime,
    pub fixture_dir: Option<PathBuf>,
    pub max_retries: u32,
}

impl IngestConfig {
    pub const DEFAULT_TOP_LIMIT: usize = 50;

    pub fn new(subreddits: Vec<String>, top_limit: usize) -> Result<Self, IngestError> {
        if subreddits.is_empty() {
            return Err(IngestError::Config("no subreddits configured".into()));
        }
        if top_limit == 0 {
            return Err(IngestError::Config("top_limit must be at least 1".into()));
        }
        Ok(Self {
            subreddits,
            top_limit,
            poll_time: NaiveTime::from_hms_opt(12, 0, 0).expect("valid time"),
            fixture_dir: None,
            max_retries: 3,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SubredditTally {
    pub posts: usize,
    pub comments: usize,
    /// Posts whose thread could not be retrieved (deleted in between).
    pub missing_threads: usize,
}

#[derive(Debug, Default)]
pub struct PollOutcome {
    pub submissions: Vec<Submission>,
    pub tally: BTreeMap<String, SubredditTally>,
}

/// Retries a call that failed with a rate-limit response, sleeping for the
/// server-requested duration in between.
pub fn with_backoff<R>(
    max_retries: u32,
    sleep: &dyn Fn(Duration),
    mut call: impl FnMut() -> Result<R, IngestError>,
) -> Result<R, IngestError> {
    let mut attempt = 0;
    loop {
        match call() {
            Err(IngestError::RateLimited { retry_after }) if attempt < max_retries => {
                attempt += 1;
                sleep(retry_after);
            }
            other => return other,
        }
    }
}

/// One polling round: for each subreddit in turn, the top posts followed by
/// each post's comment thread. Nothing is written here; the caller appends
/// the result to the store and dedupes.
pub fn poll<T: Transport>(
    client: &RedditClient<T>,
    config: &IngestConfig,
    sleep: &dyn Fn(Duration),
) -> Result<PollOutcome, IngestError> {
    let mut outcome = PollOutcome::default();
    for sub in &config.subreddits {
        let posts = with_backoff(config.max_retries, sleep, || {
            client.fetch_top_posts(sub, config.top_limit)
        })?;
        let tally = outcome.tally.entry(sub.clone()).or_default();
        for mut post in posts {
            // a vanished thread keeps the listing's reported comment count
            let comments = match with_backoff(config.max_retries, sleep, || client.fetch_comments(&post)) {
                Ok(c) => {
                    post.n_comments = Some(c.len() as u64);
                    c
                }
                Err(IngestError::NotFound(_)) => {
                    tally.missing_threads += 1;
                    Default::default()
                }
                Err(e) => return Err(e),
            };
            tally.posts += 1;
            tally.comments += comments.len();
            outcome.submissions.push(post);
            outcome.submissions.extend(comments);
        }
    }
    Ok(outcome)
}
