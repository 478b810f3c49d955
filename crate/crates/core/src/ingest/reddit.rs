use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, NaiveDate, NaiveTime, TimeZone, Utc};
use serde_json::{Map, Value};

use super::transport::{HttpRequest, HttpResponse, Method, Transport};
use super::IngestError;
use crate::model::{Kind, Submission, SubmissionSet};

pub const CLIENT_ID_VAR: &str = "EXTREMIS_CLIENT_ID";
pub const CLIENT_SECRET_VAR: &str = "EXTREMIS_CLIENT_SECRET";

const TOKEN_URL: &str = "https://www.reddit.com/api/v1/access_token";
const API_BASE: &str = "https://oauth.reddit.com";
const USER_AGENT: &str = concat!("extremis/", env!("CARGO_PKG_VERSION"));

#[derive(Clone, PartialEq, Eq)]
pub struct Credentials {
    pub client_id: String,
    pub client_secret: String,
}

impl std::fmt::Debug for Credentials {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Credentials")
            .field("client_id", &self.client_id)
            .finish_non_exhaustive()
    }
}

impl Credentials {
    pub fn from_env() -> Result<Self, IngestError> {
        let get = |name: &str| {
            std::env::var(name)
                .ok()
                .filter(|v| !v.is_empty())
                .ok_or_else(|| IngestError::Credential(format!("{name} is not set")))
        };
        Ok(Self {
            client_id: get(CLIENT_ID_VAR)?,
            client_secret: get(CLIENT_SECRET_VAR)?,
        })
    }
}

/// Where responses come from.
#[derive(Clone, Debug)]
pub enum Source {
    Live(Credentials),
    /// Recorded responses: `<subreddit>_<date>.json` for the top listing and
    /// `<subreddit>_<date>_<post id>.json` for each comment thread.
    Fixture {
        dir: PathBuf,
        date: NaiveDate,
        poll_time: NaiveTime,
    },
}

pub struct RedditClient<T: Transport> {
    transport: T,
    source: Source,
    token: Mutex<Option<String>>,
}

impl<T: Transport> RedditClient<T> {
    pub fn new(transport: T, source: Source) -> Self {
        Self {
            transport,
            source,
            token: Mutex::new(None),
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    fn retrieval_time(&self) -> DateTime<Utc> {
        match &self.source {
            Source::Live(_) => Utc::now(),
            Source::Fixture { date, poll_time, .. } => {
                Utc.from_utc_datetime(&date.and_time(*poll_time))
            }
        }
    }

    /// Top-of-day posts, at most `limit`, in the platform's ranking order.
    pub fn fetch_top_posts(&self, subreddit: &str, limit: usize) -> Result<SubmissionSet, IngestError> {
        let body = match &self.source {
            Source::Live(_) => self.api_get(&format!(
                "/r/{subreddit}/top?t=day&limit={limit}&raw_json=1"
            ))?,
            Source::Fixture { dir, date, .. } => {
                read_fixture(&fixture_path(dir, subreddit, *date, None), subreddit)?
            }
        };
        let listing: Value = parse_body(&body)?;
        let retrieved_at = self.retrieval_time();
        let mut posts = parse_post_listing(&listing, retrieved_at)?;
        if posts.is_empty() && is_subreddit_search(&listing) {
            return Err(IngestError::NotFound(format!("r/{subreddit}")));
        }
        posts.truncate(limit);
        Ok(posts.into_iter().collect())
    }

    /// Every comment in the post's thread, flattened, with `post_id` pointing
    /// at the post. Nodes the API elides behind "load more" links are not
    /// followed.
    pub fn fetch_comments(&self, post: &Submission) -> Result<SubmissionSet, IngestError> {
        let body = match &self.source {
            Source::Live(_) => self.api_get(&format!(
                "/r/{}/comments/{}?raw_json=1&limit=500",
                post.subreddit, post.id
            ))?,
            Source::Fixture { dir, date, .. } => read_fixture(
                &fixture_path(dir, &post.subreddit, *date, Some(&post.id)),
                &post.id,
            )?,
        };
        let thread: Value = parse_body(&body)?;
        let retrieved_at = self.retrieval_time();
        let listing = match &thread {
            Value::Array(parts) if parts.len() >= 2 => &parts[1],
            Value::Object(_) => &thread,
            _ => return Err(IngestError::Malformed("comment thread is not a listing pair".into())),
        };
        let mut out = Vec::new();
        flatten_comments(listing, post, retrieved_at, &mut out)?;
        Ok(out.into_iter().collect())
    }

    /// Fetches comments and records the retrieved count on the post.
    pub fn fetch_thread(&self, post: &mut Submission) -> Result<SubmissionSet, IngestError> {
        let comments = self.fetch_comments(post)?;
        post.n_comments = Some(comments.len() as u64);
        Ok(comments)
    }

    fn bearer(&self) -> Result<String, IngestError> {
        let creds = match &self.source {
            Source::Live(c) => c,
            Source::Fixture { .. } => unreachable!("fixture mode never authenticates"),
        };
        let mut guard = self.token.lock().expect("token lock poisoned");
        if let Some(tok) = guard.as_ref() {
            return Ok(tok.clone());
        }
        let req = HttpRequest {
            method: Method::Post,
            url: TOKEN_URL.to_string(),
            headers: vec![("user-agent".into(), USER_AGENT.into())],
            basic_auth: Some((creds.client_id.clone(), creds.client_secret.clone())),
            form: vec![("grant_type".into(), "client_credentials".into())],
        };
        let resp = check_status(self.transport.send(&req)?, "access token")?;
        let v: Value = parse_body(&resp.body)?;
        let tok = v
            .get("access_token")
            .and_then(Value::as_str)
            .ok_or_else(|| {
                let why = v.get("error").and_then(Value::as_str).unwrap_or("no access_token");
                IngestError::Credential(why.to_string())
            })?
            .to_string();
        *guard = Some(tok.clone());
        Ok(tok)
    }

    fn api_get(&self, path: &str) -> Result<String, IngestError> {
        let token = self.bearer()?;
        let req = HttpRequest::get(format!("{API_BASE}{path}"))
            .header("authorization", format!("bearer {token}"))
            .header("user-agent", USER_AGENT);
        let resp = self.transport.send(&req)?;
        if resp.status == 401 {
            // expired token; drop it so the next call re-authenticates
            *self.token.lock().expect("token lock poisoned") = None;
        }
        Ok(check_status(resp, path)?.body)
    }
}

fn check_status(resp: HttpResponse, what: &str) -> Result<HttpResponse, IngestError> {
    match resp.status {
        200..=299 => Ok(resp),
        401 | 403 => Err(IngestError::Credential(format!("{what}: HTTP {}", resp.status))),
        404 => Err(IngestError::NotFound(what.to_string())),
        429 => Err(IngestError::RateLimited {
            retry_after: resp.retry_after(),
        }),
        s => Err(IngestError::Network(format!("{what}: HTTP {s}"))),
    }
}

fn parse_body(body: &str) -> Result<Value, IngestError> {
    serde_json::from_str(body).map_err(|e| IngestError::Malformed(e.to_string()))
}

pub fn fixture_path(dir: &Path, subreddit: &str, date: NaiveDate, post_id: Option<&str>) -> PathBuf {
    match post_id {
        None => dir.join(format!("{subreddit}_{date}.json")),
        Some(id) => dir.join(format!("{subreddit}_{date}_{id}.json")),
    }
}

fn read_fixture(path: &Path, what: &str) -> Result<String, IngestError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(IngestError::NotFound(format!("{what} (no fixture {})", path.display())))
        }
        Err(source) => Err(IngestError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}

/// Dates for which a top-listing fixture of `subreddit` exists, ascending.
pub fn fixture_dates(dir: &Path, subreddit: &str) -> Result<Vec<NaiveDate>, IngestError> {
    let entries = fs::read_dir(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let prefix = format!("{subreddit}_");
    let mut dates = Vec::new();
    for entry in entries.flatten() {
        let name = entry.file_name();
        let Some(stem) = name.to_str().and_then(|n| n.strip_suffix(".json")) else {
            continue;
        };
        if let Some(rest) = stem.strip_prefix(&prefix) {
            if let Ok(d) = NaiveDate::parse_from_str(rest, "%Y-%m-%d") {
                dates.push(d);
            }
        }
    }
    dates.sort();
    Ok(dates)
}

fn children(listing: &Value) -> Result<&Vec<Value>, IngestError> {
    listing
        .pointer("/data/children")
        .and_then(Value::as_array)
        .ok_or_else(|| IngestError::Malformed("listing without data.children".into()))
}

fn is_subreddit_search(listing: &Value) -> bool {
    children(listing)
        .map(|c| c.iter().any(|ch| ch.get("kind").and_then(Value::as_str) == Some("t5")))
        .unwrap_or(false)
}

fn str_field<'a>(data: &'a Value, key: &str) -> Option<&'a str> {
    data.get(key).and_then(Value::as_str)
}

fn required_str(data: &Value, key: &str) -> Result<String, IngestError> {
    str_field(data, key)
        .map(str::to_string)
        .ok_or_else(|| IngestError::Malformed(format!("missing string field {key}")))
}

fn created(data: &Value) -> Result<DateTime<Utc>, IngestError> {
    let secs = data
        .get("created_utc")
        .and_then(Value::as_f64)
        .ok_or_else(|| IngestError::Malformed("missing created_utc".into()))?;
    DateTime::from_timestamp(secs.floor() as i64, 0)
        .ok_or_else(|| IngestError::Malformed(format!("created_utc out of range: {secs}")))
}

fn keep_extra(data: &Value) -> Map<String, Value> {
    let mut extra = Map::new();
    if let Some(p) = data.get("permalink").filter(|v| v.is_string()) {
        extra.insert("permalink".into(), p.clone());
    }
    extra
}

fn parse_post_listing(listing: &Value, retrieved_at: DateTime<Utc>) -> Result<Vec<Submission>, IngestError> {
    let mut out = Vec::new();
    for child in children(listing)? {
        if child.get("kind").and_then(Value::as_str) != Some("t3") {
            continue;
        }
        let data = &child["data"];
        let id = required_str(data, "id")?;
        let title = str_field(data, "title").map(str::to_string);
        let selftext = str_field(data, "selftext").unwrap_or("");
        // link posts have no body; their title carries the opinion
        let text = if selftext.trim().is_empty() {
            title.clone().unwrap_or_default()
        } else {
            selftext.to_string()
        };
        let created_at = created(data)?;
        out.push(Submission {
            post_id: id.clone(),
            id,
            kind: Kind::Post,
            subreddit: required_str(data, "subreddit")?,
            title,
            text,
            upvotes: data.get("score").and_then(Value::as_i64).unwrap_or(0),
            flair: str_field(data, "link_flair_text")
                .filter(|f| !f.is_empty())
                .map(str::to_string),
            created_at,
            retrieved_at: retrieved_at.max(created_at),
            n_comments: data.get("num_comments").and_then(Value::as_u64),
            extra: keep_extra(data),
        });
    }
    Ok(out)
}

fn flatten_comments(
    listing: &Value,
    post: &Submission,
    retrieved_at: DateTime<Utc>,
    out: &mut Vec<Submission>,
) -> Result<(), IngestError> {
    for child in children(listing)? {
        if child.get("kind").and_then(Value::as_str) != Some("t1") {
            continue;
        }
        let data = &child["data"];
        let created_at = created(data)?;
        out.push(Submission {
            id: required_str(data, "id")?,
            kind: Kind::Comment,
            post_id: post.id.clone(),
            subreddit: str_field(data, "subreddit")
                .map(str::to_string)
                .unwrap_or_else(|| post.subreddit.clone()),
            title: None,
            text: str_field(data, "body").unwrap_or("").to_string(),
            upvotes: data.get("score").and_then(Value::as_i64).unwrap_or(0),
            flair: None,
            created_at,
            retrieved_at: retrieved_at.max(created_at),
            n_comments: None,
            extra: keep_extra(data),
        });
        if let Some(replies) = data.get("replies").filter(|r| r.is_object()) {
            flatten_comments(replies, post, retrieved_at, out)?;
        }
    }
    Ok(())
}
