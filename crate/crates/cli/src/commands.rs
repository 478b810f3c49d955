use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::Deserialize;
use serde_json::json;

use extremis_core::analytics::{label_stats, Label};
use extremis_core::export::write_scored_csv;
use extremis_core::extremism::{MeansScope, ScoreError, ScoreOptions, Weighting};
use extremis_core::ingest::{
    fixture_dates, fixture_path, poll, IngestConfig, OfflineTransport, RedditClient, Source, SubredditTally,
};
use extremis_core::model::{dedupe, filter_by_flair, load_jsonl, write_jsonl, Kind, Submission, SubmissionSet};

use crate::bundle::{num, write_atomic, Bundle};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::hashing::file_sha256;
use crate::lock::StoreLock;

fn load_store(path: &Path) -> Result<SubmissionSet, CliError> {
    let loaded = load_jsonl(path).map_err(|e| CliError::io(path, e))?;
    for w in &loaded.warnings {
        eprintln!("{}", json!({"warning": "skipped store line", "line": w.line, "message": w.message}));
    }
    Ok(loaded.set)
}

fn ingest_config(cfg: &RunConfig, subreddits: Vec<String>) -> Result<IngestConfig, CliError> {
    let mut ic = IngestConfig::new(subreddits, cfg.top_limit)?;
    ic.poll_time = cfg.poll_time;
    ic.fixture_dir = cfg.fixtures.clone();
    Ok(ic)
}

fn merge_tally(into: &mut BTreeMap<String, SubredditTally>, from: BTreeMap<String, SubredditTally>) {
    for (sub, t) in from {
        let e = into.entry(sub).or_default();
        e.posts += t.posts;
        e.comments += t.comments;
        e.missing_threads += t.missing_threads;
    }
}

fn poll_fixtures(
    cfg: &RunConfig,
    dir: &Path,
    only: Option<NaiveDate>,
) -> Result<(Vec<Submission>, BTreeMap<String, SubredditTally>), CliError> {
    let mut dates: Vec<NaiveDate> = Vec::new();
    for sub in &cfg.subreddits {
        dates.extend(fixture_dates(dir, sub)?);
    }
    dates.sort();
    dates.dedup();
    if let Some(d) = only {
        dates.retain(|x| *x == d);
    }
    let mut fetched = Vec::new();
    let mut tally = BTreeMap::new();
    for date in dates {
        let subs: Vec<String> = cfg
            .subreddits
            .iter()
            .filter(|s| fixture_path(dir, s, date, None).is_file())
            .cloned()
            .collect();
        let ic = ingest_config(cfg, subs)?;
        let client = RedditClient::new(
            OfflineTransport,
            Source::Fixture {
                dir: dir.to_path_buf(),
                date,
                poll_time: cfg.poll_time,
            },
        );
        let outcome = poll(&client, &ic, &std::thread::sleep)?;
        fetched.extend(outcome.submissions);
        merge_tally(&mut tally, outcome.tally);
    }
    Ok((fetched, tally))
}

#[cfg(feature = "live")]
fn poll_live(cfg: &RunConfig) -> Result<(Vec<Submission>, BTreeMap<String, SubredditTally>), CliError> {
    use extremis_core::ingest::{Credentials, ReqwestTransport};
    let creds = Credentials::from_env()?;
    let transport = ReqwestTransport::new(concat!("extremis/", env!("CARGO_PKG_VERSION")))?;
    let client = RedditClient::new(transport, Source::Live(creds));
    let outcome = poll(&client, &ingest_config(cfg, cfg.subreddits.clone())?, &std::thread::sleep)?;
    Ok((outcome.submissions, outcome.tally))
}

#[cfg(not(feature = "live"))]
fn poll_live(_cfg: &RunConfig) -> Result<(Vec<Submission>, BTreeMap<String, SubredditTally>), CliError> {
    Err(CliError::Config(
        "built without live polling; pass --fixtures to replay recorded responses".into(),
    ))
}

pub fn ingest(cfg: &RunConfig, date: Option<NaiveDate>) -> Result<(), CliError> {
    let _lock = StoreLock::acquire(&cfg.store)?;
    let (fetched, tally) = match &cfg.fixtures {
        Some(dir) => poll_fixtures(cfg, dir, date)?,
        None => poll_live(cfg)?,
    };
    let mut set = if cfg.store.exists() {
        load_store(&cfg.store)?
    } else {
        SubmissionSet::default()
    };
    let before = set.len();
    let n_fetched = fetched.len();
    set.extend(fetched);
    let set = dedupe(set);
    write_jsonl(&cfg.store, &set).map_err(|e| CliError::io(&cfg.store, e))?;
    println!(
        "{}",
        json!({
            "fetched": n_fetched,
            "store_before": before,
            "store_after": set.len(),
            "subreddits": tally,
        })
    );
    Ok(())
}

pub fn score(cfg: &RunConfig) -> Result<(), CliError> {
    let _lock = StoreLock::acquire(&cfg.store)?;
    let set = load_store(&cfg.store)?;
    let store_hash = file_sha256(&cfg.store)?;
    let total = set.len();
    let (kept, diag) = filter_by_flair(set, &cfg.flair);
    if kept.is_empty() {
        return Err(ScoreError::EmptyCorpus(None).into());
    }
    let scorer = cfg.scorer()?;
    let scored = scorer.score_corpus(
        &kept,
        ScoreOptions {
            scope: cfg.means_scope,
            weighting: Weighting::Full,
        },
    )?;

    let mut buf = Vec::new();
    write_scored_csv(&mut buf, &scored.items).map_err(|e| CliError::io(cfg.scored_csv(), e))?;
    write_atomic(&cfg.scored_csv(), &buf)?;

    let excluded = scored.items.iter().filter(|i| i.excluded).count();
    let meta = json!({
        "rows": scored.items.len(),
        "excluded": excluded,
        "store_records": total,
        "store_sha256": store_hash,
        "flair_filter": diag,
        "means_scope": cfg.means_scope,
        "means": scored.means,
        "log_base": cfg.log_base.label(),
        "lexicons": cfg.lexicon_hashes()?,
    });
    let mut text = serde_json::to_string_pretty(&meta).expect("sidecar serialises");
    text.push('\n');
    write_atomic(&cfg.scored_meta(), text.as_bytes())?;
    println!(
        "{}",
        json!({"scored": scored.items.len(), "excluded": excluded, "csv": cfg.scored_csv()})
    );
    Ok(())
}

#[derive(Deserialize)]
struct LabeledRow {
    text: String,
    subreddit: String,
    label: String,
}

pub fn validate(cfg: &RunConfig, labeled: &Path) -> Result<(), CliError> {
    let file = std::fs::File::open(labeled).map_err(|e| CliError::io(labeled, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let epoch = DateTime::<Utc>::UNIX_EPOCH;
    let mut labels = Vec::new();
    let mut subs = Vec::new();
    for (i, row) in reader.deserialize::<LabeledRow>().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| CliError::Validation {
            row: row_no,
            message: e.to_string(),
        })?;
        let label: Label = row.label.parse().map_err(|e: extremis_core::analytics::AnalyticsError| {
            CliError::Validation {
                row: row_no,
                message: e.to_string(),
            }
        })?;
        let id = format!("row{row_no}");
        labels.push(label);
        subs.push(Submission {
            post_id: id.clone(),
            id,
            kind: Kind::Post,
            subreddit: row.subreddit,
            title: None,
            text: row.text,
            upvotes: 0,
            flair: None,
            created_at: epoch,
            retrieved_at: epoch,
            n_comments: Some(0),
            extra: Default::default(),
        });
    }
    if subs.is_empty() {
        return Err(ScoreError::EmptyCorpus(None).into());
    }
    let scored = cfg.scorer()?.score_corpus(
        &subs,
        ScoreOptions {
            scope: MeansScope::Corpus,
            weighting: Weighting::LengthOnly,
        },
    )?;
    let pairs: Vec<(Label, _)> = labels.into_iter().zip(scored.items).collect();
    let table = label_stats(&pairs);

    let mut bundle = Bundle::create(&cfg.out)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            vec![
                r.label.as_str().to_string(),
                r.count.to_string(),
                num(r.a),
                num(r.abs_p),
                num(r.s),
                num(r.chi_norm),
                num(r.chi_l),
            ]
        })
        .collect();
    println!("{:<10} {:>5} {:>8} {:>8} {:>8} {:>9} {:>9}", "label", "n", "a", "|p|", "s", "chi_norm", "chi_l");
    for r in &table {
        println!(
            "{:<10} {:>5} {:>8.3} {:>8.3} {:>8.3} {:>9.3} {:>9.3}",
            r.label.as_str(),
            r.count,
            r.a,
            r.abs_p,
            r.s,
            r.chi_norm,
            r.chi_l
        );
    }
    bundle.csv("validation.csv", &["label", "count", "a", "abs_p", "s", "chi_norm", "chi_l"], rows)
}
