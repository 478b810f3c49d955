//! Submission records, the JSONL store, deduplication and flair filtering.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::ops::Deref;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot read store {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write store {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("flair allow-list for r/{0} is empty")]
    EmptyAllowList(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Post,
    Comment,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Post => "post",
            Kind::Comment => "comment",
        }
    }
}

/// One post or comment. Keys not modelled here are carried in `extra` and
/// written back unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub id: String,
    pub kind: Kind,
    pub post_id: String,
    pub subreddit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    pub upvotes: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flair: Option<String>,
    pub created_at: DateTime<Utc>,
    pub retrieved_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_comments: Option<u64>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Submission {
    /// Checks the record-level invariants; returns the first violation.
    pub fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        match self.kind {
            Kind::Post if self.post_id != self.id => {
                return Err(format!("post {} has post_id {}", self.id, self.post_id))
            }
            Kind::Comment if self.post_id == self.id => {
                return Err(format!("comment {} is its own parent", self.id))
            }
            _ => {}
        }
        if self.retrieved_at < self.created_at {
            return Err(format!("{} retrieved before it was created", self.id));
        }
        Ok(())
    }

    pub fn is_post(&self) -> bool {
        self.kind == Kind::Post
    }
}

/// Ordered collection of submissions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubmissionSet(Vec<Submission>);

impl SubmissionSet {
    pub fn new(items: Vec<Submission>) -> Self {
        Self(items)
    }

    pub fn into_inner(self) -> Vec<Submission> {
        self.0
    }

    pub fn push(&mut self, sub: Submission) {
        self.0.push(sub);
    }

    pub fn extend(&mut self, subs: impl IntoIterator<Item = Submission>) {
        self.0.extend(subs);
    }
}

impl Deref for SubmissionSet {
    type Target = [Submission];

    fn deref(&self) -> &[Submission] {
        &self.0
    }
}

impl FromIterator<Submission> for SubmissionSet {
    fn from_iter<I: IntoIterator<Item = Submission>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl IntoIterator for SubmissionSet {
    type Item = Submission;
    type IntoIter = std::vec::IntoIter<Submission>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// A skipped input line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineWarning {
    /// 1-based line number in the source file.
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct LoadedStore {
    pub set: SubmissionSet,
    pub warnings: Vec<LineWarning>,
}

/// Reads a JSONL store. Lines that fail to parse or violate a record
/// invariant are skipped and reported; only I/O failures are fatal.
pub fn load_jsonl(path: &Path) -> Result<LoadedStore, StoreError> {
    let read_err = |source| StoreError::Read {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(read_err)?;
    parse_jsonl(BufReader::new(file)).map_err(read_err)
}

/// Parses JSONL from any reader; see [`load_jsonl`].
pub fn parse_jsonl<R: BufRead>(reader: R) -> io::Result<LoadedStore> {
    let mut out = LoadedStore::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Submission>(&line)
            .map_err(|e| e.to_string())
            .and_then(|s| s.validate().map(|_| s));
        match parsed {
            Ok(sub) => out.set.push(sub),
            Err(message) => out.warnings.push(LineWarning {
                line: idx + 1,
                message,
            }),
        }
    }
    Ok(out)
}

fn write_lines<W: Write>(mut w: W, subs: &[Submission]) -> io::Result<W> {
    for sub in subs {
        serde_json::to_writer(&mut w, sub)?;
        w.write_all(b"\n")?;
    }
    Ok(w)
}

/// Rewrites the whole store atomically (temp file + rename).
pub fn write_jsonl(path: &Path, subs: &[Submission]) -> Result<(), StoreError> {
    let write_err = |source| StoreError::Write {
        path: path.to_path_buf(),
        source,
    };
    let tmp = path.with_extension("jsonl.tmp");
    let file = File::create(&tmp).map_err(write_err)?;
    let w = write_lines(BufWriter::new(file), subs).map_err(write_err)?;
    w.into_inner()
        .map_err(|e| write_err(e.into_error()))?
        .sync_all()
        .map_err(write_err)?;
    fs::rename(&tmp, path).map_err(write_err)
}

/// Appends records to the end of the store, creating it if needed.
pub fn append_jsonl(path: &Path, subs: &[Submission]) -> Result<(), StoreError> {
    let write_err = |source| StoreError::Write {
        path: path.to_path_buf(),
        source,
    };
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(write_err)?;
    let mut w = write_lines(BufWriter::new(file), subs).map_err(write_err)?;
    w.flush().map_err(write_err)
}

/// One record per id. The record with the latest `retrieved_at` wins, with
/// ties going to the one later in the input. Output keeps the position of
/// each id's first occurrence.
pub fn dedupe(set: SubmissionSet) -> SubmissionSet {
    let mut slot: HashMap<String, usize> = HashMap::with_capacity(set.len());
    let mut out: Vec<Submission> = Vec::with_capacity(set.len());
    for sub in set {
        match slot.get(&sub.id) {
            Some(&i) => {
                if sub.retrieved_at >= out[i].retrieved_at {
                    out[i] = sub;
                }
            }
            None => {
                slot.insert(sub.id.clone(), out.len());
                out.push(sub);
            }
        }
    }
    SubmissionSet(out)
}

/// Per-subreddit flair allow-lists. Subreddit names are matched
/// case-insensitively; flairs exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, BTreeSet<String>>", into = "BTreeMap<String, BTreeSet<String>>")]
pub struct FlairPolicy {
    allow: BTreeMap<String, BTreeSet<String>>,
}

impl FlairPolicy {
    pub fn new<S, F, I>(entries: I) -> Result<Self, PolicyError>
    where
        I: IntoIterator<Item = (S, F)>,
        S: Into<String>,
        F: IntoIterator,
        F::Item: Into<String>,
    {
        let mut allow = BTreeMap::new();
        for (sub, flairs) in entries {
            let sub: String = sub.into();
            let flairs: BTreeSet<String> = flairs.into_iter().map(Into::into).collect();
            if flairs.is_empty() {
                return Err(PolicyError::EmptyAllowList(sub));
            }
            allow
                .entry(sub.to_lowercase())
                .or_insert_with(BTreeSet::new)
                .extend(flairs);
        }
        Ok(Self { allow })
    }

    pub fn is_empty(&self) -> bool {
        self.allow.is_empty()
    }

    pub fn governs(&self, subreddit: &str) -> bool {
        self.allow.contains_key(&subreddit.to_lowercase())
    }

    /// Whether a post passes the policy.
    pub fn admits(&self, post: &Submission) -> bool {
        match self.allow.get(&post.subreddit.to_lowercase()) {
            None => true,
            Some(flairs) => post.flair.as_ref().is_some_and(|f| flairs.contains(f)),
        }
    }
}

impl TryFrom<BTreeMap<String, BTreeSet<String>>> for FlairPolicy {
    type Error = PolicyError;

    fn try_from(map: BTreeMap<String, BTreeSet<String>>) -> Result<Self, Self::Error> {
        FlairPolicy::new(map)
    }
}

impl From<FlairPolicy> for BTreeMap<String, BTreeSet<String>> {
    fn from(p: FlairPolicy) -> Self {
        p.allow
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FilterDiagnostics {
    pub dropped_posts: usize,
    pub dropped_comments: usize,
    /// Comments kept although their parent post is not in the set.
    pub orphan_comments: usize,
}

/// Drops posts whose flair is not allowed in a governed subreddit, together
/// with their comments. Comments whose parent is missing from the set are
/// kept and tallied as orphans.
pub fn filter_by_flair(set: SubmissionSet, policy: &FlairPolicy) -> (SubmissionSet, FilterDiagnostics) {
    let mut diag = FilterDiagnostics::default();
    let mut present: HashSet<&str> = HashSet::new();
    let mut rejected: HashSet<String> = HashSet::new();
    for sub in set.iter().filter(|s| s.is_post()) {
        present.insert(sub.id.as_str());
        if !policy.admits(sub) {
            rejected.insert(sub.id.clone());
        }
    }
    let orphans = set
        .iter()
        .filter(|s| !s.is_post() && !present.contains(s.post_id.as_str()))
        .count();
    diag.orphan_comments = orphans;

    let kept = set
        .into_iter()
        .filter(|s| {
            let drop = rejected.contains(&s.post_id);
            if drop {
                match s.kind {
                    Kind::Post => diag.dropped_posts += 1,
                    Kind::Comment => diag.dropped_comments += 1,
                }
            }
            !drop
        })
        .collect();
    (kept, diag)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn ts(day: u32, hour: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2023, 10, day, hour, 0, 0).unwrap()
    }

    pub(crate) fn post(id: &str, sub: &str, flair: Option<&str>) -> Submission {
        Submission {
            id: id.into(),
            kind: Kind::Post,
            post_id: id.into(),
            subreddit: sub.into(),
            title: Some(format!("title {id}")),
            text: format!("text of {id}"),
            upvotes: 1,
            flair: flair.map(Into::into),
            created_at: ts(7, 10),
            retrieved_at: ts(7, 12),
            n_comments: Some(0),
            extra: Map::new(),
        }
    }

    pub(crate) fn comment(id: &str, parent: &str, sub: &str) -> Submission {
        Submission {
            id: id.into(),
            kind: Kind::Comment,
            post_id: parent.into(),
            subreddit: sub.into(),
            title: None,
            text: format!("reply {id}"),
            upvotes: 0,
            flair: None,
            created_at: ts(7, 11),
            retrieved_at: ts(7, 12),
            n_comments: None,
            extra: Map::new(),
        }
    }

    fn worldnews_policy() -> FlairPolicy {
        FlairPolicy::new([("worldnews", ["Israel/Palestine", "Israel Megathread"])]).unwrap()
    }

    #[test]
    fn load_counts_bad_lines() {
        let good = serde_json::to_string(&post("a", "worldnews", None)).unwrap();
        let good2 = serde_json::to_string(&post("b", "worldnews", None)).unwrap();
        let truncated = &good[..good.len() / 2];
        let input = format!("{good}\n{truncated}\n{good2}\n");
        let loaded = parse_jsonl(input.as_bytes()).unwrap();
        assert_eq!(loaded.set.len(), 2);
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.warnings[0].line, 2);
    }

    #[test]
    fn load_empty_and_missing_field() {
        let loaded = parse_jsonl(&b""[..]).unwrap();
        assert!(loaded.set.is_empty() && loaded.warnings.is_empty());

        let line = r#"{"id":"x","kind":"post","post_id":"x","subreddit":"s","upvotes":1,"created_at":"2023-10-07T00:00:00Z","retrieved_at":"2023-10-07T00:00:00Z"}"#;
        let loaded = parse_jsonl(line.as_bytes()).unwrap();
        assert_eq!(loaded.set.len(), 0);
        assert!(loaded.warnings[0].message.contains("text"));
    }

    #[test]
    fn invariant_violations_are_warnings() {
        let mut p = post("a", "s", None);
        p.post_id = "other".into();
        let mut c = comment("c", "c", "s");
        c.post_id = "c".into();
        let mut late = post("l", "s", None);
        late.retrieved_at = ts(1, 0);
        let body: String = [p, c, late]
            .iter()
            .map(|s| serde_json::to_string(s).unwrap() + "\n")
            .collect();
        let loaded = parse_jsonl(body.as_bytes()).unwrap();
        assert_eq!(loaded.warnings.len(), 3);
    }

    #[test]
    fn unknown_keys_round_trip() {
        let line = r#"{"id":"x","kind":"post","post_id":"x","subreddit":"s","text":"hi","upvotes":-3,"created_at":"2023-10-07T00:00:00Z","retrieved_at":"2023-10-07T01:00:00Z","permalink":"/r/s/x","score_history":[1,2]}"#;
        let loaded = parse_jsonl(line.as_bytes()).unwrap();
        let sub = &loaded.set[0];
        assert_eq!(sub.extra["permalink"], "/r/s/x");
        let back = serde_json::to_value(sub).unwrap();
        assert_eq!(back, serde_json::from_str::<Value>(line).unwrap());
    }

    #[test]
    fn dedupe_latest_retrieval_wins() {
        let mut a1 = post("a", "s", None);
        a1.upvotes = 1;
        let mut a2 = a1.clone();
        a2.upvotes = 9;
        a2.retrieved_at = ts(8, 12);
        let out = dedupe(SubmissionSet::new(vec![a2.clone(), a1]));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].upvotes, 9);
        assert!(dedupe(SubmissionSet::default()).is_empty());
    }

    #[test]
    fn dedupe_tie_goes_to_later_record() {
        let a1 = post("a", "s", None);
        let mut a2 = a1.clone();
        a2.upvotes = 5;
        let out = dedupe(SubmissionSet::new(vec![a1, a2]));
        assert_eq!(out[0].upvotes, 5);
    }

    #[test]
    fn dedupe_matches_group_by_oracle() {
        // 5 records over 3 ids
        let mut recs = Vec::new();
        for (id, day, up) in [("a", 7, 1), ("b", 8, 2), ("a", 9, 3), ("c", 7, 4), ("b", 7, 5)] {
            let mut p = post(id, "s", None);
            p.retrieved_at = ts(day, 12);
            p.upvotes = up;
            recs.push(p);
        }
        let mut oracle: BTreeMap<String, Submission> = BTreeMap::new();
        for r in &recs {
            let keep = match oracle.get(&r.id) {
                Some(prev) => r.retrieved_at >= prev.retrieved_at,
                None => true,
            };
            if keep {
                oracle.insert(r.id.clone(), r.clone());
            }
        }
        let out = dedupe(SubmissionSet::new(recs));
        assert_eq!(out.len(), 3);
        for s in out.iter() {
            assert_eq!(s, &oracle[&s.id]);
        }
        let ups: Vec<i64> = out.iter().map(|s| s.upvotes).collect();
        assert_eq!(ups, vec![3, 2, 4]);
    }

    #[test]
    fn flair_filter_keeps_relevant_post() {
        let set = SubmissionSet::new(vec![post("p", "worldnews", Some("Israel/Palestine"))]);
        let (out, _) = filter_by_flair(set, &worldnews_policy());
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn flair_filter_drops_post_and_its_comments() {
        let set = SubmissionSet::new(vec![
            post("keep", "worldnews", Some("Israel Megathread")),
            post("sport", "worldnews", Some("Sports")),
            comment("c1", "sport", "worldnews"),
            comment("c2", "sport", "worldnews"),
            comment("c3", "keep", "worldnews"),
        ]);
        let before = set.len();
        let (out, diag) = filter_by_flair(set, &worldnews_policy());
        assert_eq!(before - out.len(), 3);
        assert_eq!(diag.dropped_posts, 1);
        assert_eq!(diag.dropped_comments, 2);
        assert!(out.iter().any(|s| s.id == "c3"));
    }

    #[test]
    fn ungoverned_and_orphans_pass() {
        let set = SubmissionSet::new(vec![
            post("j", "Judaism", None),
            comment("o", "missing", "worldnews"),
        ]);
        let (out, diag) = filter_by_flair(set, &worldnews_policy());
        assert_eq!(out.len(), 2);
        assert_eq!(diag.orphan_comments, 1);
    }

    #[test]
    fn unflaired_post_in_governed_subreddit_dropped() {
        let set = SubmissionSet::new(vec![post("n", "WorldNews", None)]);
        let (out, _) = filter_by_flair(set, &worldnews_policy());
        assert!(out.is_empty());
    }

    #[test]
    fn empty_allow_list_rejected() {
        let err = FlairPolicy::new([("worldnews", Vec::<String>::new())]).unwrap_err();
        assert_eq!(err, PolicyError::EmptyAllowList("worldnews".into()));
    }

    #[test]
    fn write_then_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.jsonl");
        let subs = vec![post("a", "s", Some("f")), comment("b", "a", "s")];
        write_jsonl(&path, &subs).unwrap();
        append_jsonl(&path, &[post("z", "s", None)]).unwrap();
        let loaded = load_jsonl(&path).unwrap();
        assert_eq!(loaded.set.len(), 3);
        assert_eq!(&loaded.set[..2], &subs[..]);
    }

    #[test]
    fn missing_store_is_io_error() {
        let err = load_jsonl(Path::new("/definitely/not/here.jsonl")).unwrap_err();
        assert!(matches!(err, StoreError::Read { .. }));
    }
}
