use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("extremis.toml"), config).unwrap();
        std::fs::create_dir(dir.path().join("fixtures")).unwrap();
        Workspace { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_extremis"))
            .arg("--config")
            .arg(self.path("extremis.toml"))
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("EXTREMIS_CLIENT_ID")
            .env_remove("EXTREMIS_CLIENT_SECRET")
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8_lossy(&out.stdout);
        stdout.lines().last().and_then(|l| serde_json::from_str(l).ok()).unwrap_or(Value::Null)
    }

    fn fails(&self, args: &[&str], code: i32) -> Value {
        let out = self.run(args);
        assert_eq!(out.status.code(), Some(code), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).expect("structured error")
    }
}

const CONFIG: &str = r#"
store = "store.jsonl"
out = "out"
fixtures = "fixtures"
subreddits = ["Palestine"]
corpus_size = 3
[flair]
worldnews = ["Israel/Palestine"]
"#;

fn post(id: &str, title: &str, body: &str, comments: usize) -> Value {
    json!({"kind": "t3", "data": {
        "id": id, "title": title, "selftext": body, "subreddit": "Palestine", "score": 40,
        "num_comments": comments, "created_utc": 1696662000.0, "link_flair_text": null,
        "permalink": format!("/r/Palestine/comments/{id}/"),
    }})
}

fn comment(id: &str, body: &str, replies: Value) -> Value {
    json!({"kind": "t1", "data": {"id": id, "body": body, "score": 7, "created_utc": 1696665600.0, "replies": replies}})
}

fn listing(children: Vec<Value>) -> Value {
    json!({"kind": "Listing", "data": {"children": children}})
}

fn write_fixtures(dir: &Path) {
    let posts = [
        post("q1", "The IDF announced new strikes", "This is a terrible and violent escalation.", 2),
        post("q2", "Hamas statement today", "", 2),
        post("q3", "A calm day at the market", "People were happy and kind.", 0),
    ];
    let threads = [
        vec![
            comment("r1", "I hate this awful war, stop the killing!", Value::String(String::new())),
            comment("r2", "The IDF should protect civilians.", Value::String(String::new())),
        ],
        vec![comment(
            "r3",
            "Hamas is evil and cruel.",
            listing(vec![comment("r4", "Not all of them, peace is possible.", Value::String(String::new()))]),
        )],
        vec![],
    ];
    let day = "2023-10-07";
    std::fs::write(dir.join(format!("Palestine_{day}.json")), listing(posts.to_vec()).to_string()).unwrap();
    for (p, t) in posts.iter().zip(threads) {
        let id = p["data"]["id"].as_str().unwrap();
        let thread = json!([listing(vec![p.clone()]), listing(t)]);
        std::fs::write(dir.join(format!("Palestine_{day}_{id}.json")), thread.to_string()).unwrap();
    }
}

fn fixture_workspace() -> Workspace {
    let ws = Workspace::new(CONFIG);
    write_fixtures(&ws.path("fixtures"));
    ws
}

#[test]
fn ingest_adds_posts_and_comments_once() {
    let ws = fixture_workspace();
    let first = ws.ok(&["ingest"]);
    assert_eq!(first["store_before"], 0);
    assert_eq!(first["store_after"], 7);
    let bytes = std::fs::read(ws.path("store.jsonl")).unwrap();
    let second = ws.ok(&["ingest"]);
    assert_eq!(second["store_before"], 7);
    assert_eq!(second["store_after"], 7);
    assert_eq!(std::fs::read(ws.path("store.jsonl")).unwrap(), bytes);
}

#[test]
fn live_ingest_without_credentials_is_a_config_error() {
    let ws = Workspace::new("store = \"store.jsonl\"\n");
    let err = ws.fails(&["ingest"], 2);
    assert_eq!(err["exit_code"], 2);
    assert!(!ws.path("store.jsonl").exists());
}

#[test]
fn empty_corpus_after_flair_filter_exits_3() {
    let ws = Workspace::new(CONFIG);
    let record = json!({
        "id": "s1", "kind": "post", "post_id": "s1", "subreddit": "worldnews", "text": "Great match",
        "upvotes": 1, "flair": "Sports", "created_at": "2023-10-07T10:00:00Z",
        "retrieved_at": "2023-10-07T12:00:00Z", "n_comments": 0
    });
    std::fs::write(ws.path("store.jsonl"), format!("{record}\n")).unwrap();
    ws.fails(&["score"], 3);
}

#[test]
fn report_without_scored_csv_exits_4() {
    let ws = Workspace::new(CONFIG);
    ws.fails(&["report"], 4);
}

#[test]
fn validate_rejects_unknown_label_with_row() {
    let ws = Workspace::new(CONFIG);
    std::fs::write(
        ws.path("labeled.csv"),
        "text,subreddit,label\nI hate war,Palestine,Extreme\nok,Palestine,Spicy\n",
    )
    .unwrap();
    let err = ws.fails(&["validate", "labeled.csv"], 5);
    assert_eq!(err["row"], 2);
}

#[test]
fn validate_table_is_order_independent() {
    let ws = Workspace::new(CONFIG);
    let rows = [
        "\"I hate this evil, cruel war!\",Palestine,Extreme",
        "\"The strikes were bad, but talks continue.\",worldnews,moderate",
        "The market opens at nine,Judaism,Neutral",
    ];
    std::fs::write(ws.path("a.csv"), format!("text,subreddit,label\n{}\n", rows.join("\n"))).unwrap();
    let reversed: Vec<&str> = rows.iter().rev().copied().collect();
    std::fs::write(ws.path("b.csv"), format!("text,subreddit,label\n{}\n", reversed.join("\n"))).unwrap();

    ws.ok(&["--out", "va", "validate", "a.csv"]);
    ws.ok(&["--out", "vb", "validate", "b.csv"]);
    let a = std::fs::read_to_string(ws.path("va/validation.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(ws.path("vb/validation.csv")).unwrap());
    let labels: Vec<&str> = a.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["Extreme", "Moderate", "Neutral"]);
}

#[test]
fn pipeline_writes_a_reproducible_bundle() {
    let ws = fixture_workspace();
    ws.ok(&["ingest"]);
    ws.ok(&["score"]);
    ws.ok(&["report"]);
    let report = ws.path("out/report");
    for name in ["cohort_idf.csv", "cohort_hamas.csv", "stats.csv", "correlation.csv", "jaccard.csv"] {
        assert!(report.join(name).is_file(), "missing {name}");
    }
    let idf = std::fs::read_to_string(report.join("cohort_idf.csv")).unwrap();
    assert_eq!(idf.lines().count(), 2, "one day of data");

    let manifest = std::fs::read(report.join("manifest.json")).unwrap();
    let parsed: Value = serde_json::from_slice(&manifest).unwrap();
    assert!(parsed["artifacts"].as_array().unwrap().len() >= 10);
    let text = String::from_utf8_lossy(&manifest);
    assert!(!text.contains(ws.dir.path().to_str().unwrap()));

    ws.ok(&["report"]);
    assert_eq!(std::fs::read(report.join("manifest.json")).unwrap(), manifest);
}

#[test]
fn held_lock_blocks_a_second_writer() {
    let ws = fixture_workspace();
    std::fs::write(ws.path("store.jsonl.lock"), "").unwrap();
    let err = ws.fails(&["ingest"], 2);
    assert_eq!(err["error"], "locked");
    assert!(!ws.path("store.jsonl").exists());
}

#[test]
fn unknown_selector_is_rejected() {
    let ws = Workspace::new(CONFIG);
    ws.fails(&["--selector", "chi_x", "report"], 2);
}
