//! The scored-submission CSV: one row per submission with every stage.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the exact values and rewriting it reproduces the exact bytes.

use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Map;

use crate::extremism::{ScoredSubmission, SentimentScores};
use crate::model::{Kind, Submission};

#[derive(Debug, Serialize, Deserialize)]
struct ScoredRow {
    id: String,
    kind: Kind,
    post_id: String,
    subreddit: String,
    flair: Option<String>,
    created_at: DateTime<Utc>,
    upvotes: i64,
    n: u64,
    #[serde(rename = "L")]
    length: usize,
    a: f64,
    p: f64,
    s: f64,
    chi: f64,
    chi_norm: f64,
    chi_l: f64,
    chi_lu: f64,
    excluded: bool,
    text: String,
}

pub const SCORED_HEADER: &str =
    "id,kind,post_id,subreddit,flair,created_at,upvotes,n,L,a,p,s,chi,chi_norm,chi_l,chi_lu,excluded,text";

pub fn write_scored_csv<W: Write>(out: W, items: &[ScoredSubmission]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for item in items {
        let sub = &item.submission;
        w.serialize(ScoredRow {
            id: sub.id.clone(),
            kind: sub.kind,
            post_id: sub.post_id.clone(),
            subreddit: sub.subreddit.clone(),
            flair: sub.flair.clone(),
            created_at: sub.created_at,
            upvotes: sub.upvotes,
            n: item.n,
            length: item.length,
            a: item.scores.a,
            p: item.scores.p,
            s: item.scores.s,
            chi: item.chi,
            chi_norm: item.chi_norm,
            chi_l: item.chi_l,
            chi_lu: item.chi_lu,
            excluded: item.excluded,
            text: sub.text.clone(),
        })?;
    }
    if items.is_empty() {
        w.write_record(SCORED_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows back. Fields the CSV does not carry (title, retrieval time,
/// extra keys) come back empty, with `retrieved_at` set to `created_at`.
pub fn read_scored_csv<R: Read>(input: R) -> csv::Result<Vec<ScoredSubmission>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<ScoredRow>()
        .map(|row| {
            let row = row?;
            Ok(ScoredSubmission {
                submission: Submission {
                    id: row.id,
                    kind: row.kind,
                    post_id: row.post_id,
                    subreddit: row.subreddit,
                    title: None,
                    text: row.text,
                    upvotes: row.upvotes,
                    flair: row.flair,
                    created_at: row.created_at,
                    retrieved_at: row.created_at,
                    n_comments: None,
                    extra: Map::new(),
                },
                scores: SentimentScores::new(row.a, row.p, row.s),
                length: row.length,
                n: row.n,
                chi: row.chi,
                chi_norm: row.chi_norm,
                chi_l: row.chi_l,
                chi_lu: row.chi_lu,
                excluded: row.excluded,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremism::{ScoreOptions, Scorer};
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn round_trip_is_exact() {
        let subs = generate(&SynthConfig::default());
        let scored = Scorer::bundled().score_corpus(&subs, ScoreOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_scored_csv(&mut buf, &scored.items).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(SCORED_HEADER));

        let back = read_scored_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), scored.items.len());
        for (x, y) in back.iter().zip(&scored.items) {
            assert_eq!((x.chi_lu, x.scores, x.length), (y.chi_lu, y.scores, y.length));
            assert_eq!(x.submission.text, y.submission.text);
        }
        let mut again = Vec::new();
        write_scored_csv(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn empty_file_has_header() {
        let mut buf = Vec::new();
        write_scored_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), SCORED_HEADER);
        assert!(read_scored_csv(SCORED_HEADER.as_bytes()).unwrap().is_empty());
    }
}
