//! Report and corpus bundles built from `scored.csv`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use extremis_core::analytics::{
    annotate, cohort, correlation_matrix, daily_count, daily_mean, describe, deviation_from_mean, histogram,
    load_events, moving_average, running_mean, top_n, uniform_edges, CohortMatch, CountMode, DailySeries, Event,
    LabeledMatrix, Selector,
};
use extremis_core::export::read_scored_csv;
use extremis_core::extremism::ScoredSubmission;
use extremis_core::textstats::{build_corpus, export_frequencies, jaccard_matrix, FreqTable};

use crate::bundle::{num, Bundle};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::hashing::{file_sha256, sha256_hex};
use crate::lock::StoreLock;

struct Inputs {
    items: Vec<ScoredSubmission>,
    scored_sha256: String,
}

fn read_inputs(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let path = cfg.scored_csv();
    if !path.is_file() {
        return Err(CliError::MissingScored(path));
    }
    let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    let items = read_scored_csv(bytes.as_slice()).map_err(|e| CliError::io(&path, e))?;
    Ok(Inputs {
        items,
        scored_sha256: sha256_hex(&bytes),
    })
}

fn manifest_inputs(cfg: &RunConfig, inputs: &Inputs) -> Result<Value, CliError> {
    let events = match &cfg.events {
        Some(p) => json!({ "sha256": file_sha256(p)? }),
        None => Value::Null,
    };
    Ok(json!({
        "scored_csv": { "sha256": inputs.scored_sha256, "rows": inputs.items.len() },
        "events": events,
        "lexicons": cfg.lexicon_hashes()?,
    }))
}

fn settings(cfg: &RunConfig) -> Value {
    json!({
        "selectors": cfg.selectors,
        "cohorts": cfg.cohorts,
        "ma_window": cfg.ma_window,
        "invert_subjectivity": cfg.invert_subjectivity,
        "top_n": cfg.top_n,
        "histogram_bins": cfg.histogram_bins,
        "corpus_size": cfg.corpus_size,
        "frequency_k": cfg.frequency_k,
    })
}

fn matrix_rows(m: &LabeledMatrix) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec![String::new()];
    header.extend(m.labels.iter().cloned());
    let rows = m
        .labels
        .iter()
        .zip(&m.cells)
        .map(|(label, cells)| {
            let mut row = vec![label.clone()];
            row.extend(cells.iter().map(|c| c.map(num).unwrap_or_else(|| "NA".into())));
            row
        })
        .collect();
    (header, rows)
}

fn write_matrix(bundle: &mut Bundle, file: &str, m: &LabeledMatrix) -> Result<(), CliError> {
    let (header, rows) = matrix_rows(m);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    bundle.csv(file, &header, rows)
}

/// Lowercase ASCII letters, digits, `-` and `_`; anything else becomes `_`.
fn file_stem(keyword: &str) -> String {
    keyword
        .trim()
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn stats_rows(items: &[&ScoredSubmission], selectors: &[Selector], prefix: &[String]) -> Vec<Vec<String>> {
    selectors
        .iter()
        .filter_map(|sel| {
            let vals: Vec<f64> = items.iter().map(|i| sel.value(i)).collect();
            let d = describe(&vals).ok()?;
            let mut row = prefix.to_vec();
            row.extend([
                sel.name().to_string(),
                d.count.to_string(),
                num(d.mean),
                num(d.std),
                num(d.min),
                num(d.q25),
                num(d.median),
                num(d.q75),
                num(d.max),
            ]);
            Some(row)
        })
        .collect()
}

const STATS_COLUMNS: [&str; 9] = ["selector", "count", "mean", "std", "min", "q25", "median", "q75", "max"];

fn series_by_date(series: &[(&str, DailySeries)]) -> BTreeMap<chrono::NaiveDate, Vec<String>> {
    let mut rows: BTreeMap<chrono::NaiveDate, Vec<String>> = BTreeMap::new();
    for (col, (_, s)) in series.iter().enumerate() {
        for (d, v) in s.points() {
            let row = rows.entry(*d).or_insert_with(|| vec![String::new(); series.len()]);
            row[col] = num(*v);
        }
    }
    rows
}

fn daily_artifacts(
    bundle: &mut Bundle,
    cfg: &RunConfig,
    scored: &[ScoredSubmission],
    events: &[Event],
) -> Result<(), CliError> {
    let all = daily_count(scored, CountMode::All);
    let posts = daily_count(scored, CountMode::PostsOnly);
    let posts_ma = moving_average(&posts, cfg.ma_window);
    let rows = series_by_date(&[("submissions", all), ("posts", posts), ("posts_ma", posts_ma)])
        .into_iter()
        .map(|(d, mut r)| {
            r.insert(0, d.to_string());
            r
        })
        .collect();
    bundle.csv("daily_counts.csv", &["date", "submissions", "posts", "posts_ma"], rows)?;

    for sel in &cfg.selectors {
        let kept: Vec<f64> = scored.iter().filter(|i| !i.excluded).map(|i| sel.value(i)).collect();
        let global = kept.iter().sum::<f64>() / kept.len().max(1) as f64;
        let mean = daily_mean(scored, *sel);
        let ma = moving_average(&mean, cfg.ma_window);
        let run = running_mean(&mean);
        let dev = deviation_from_mean(&mean, global);
        let notes = annotate(&dev, events);
        let rows = mean
            .points()
            .iter()
            .zip(ma.values().zip(run.values()))
            .zip(notes)
            .map(|(((d, m), (a, r)), (_, dv, note))| vec![d.to_string(), num(*m), num(a), num(r), num(dv), note])
            .collect();
        bundle.csv(
            &format!("daily_{}.csv", sel.name()),
            &["date", "mean", "moving_average", "running_mean", "deviation", "events"],
            rows,
        )?;
    }
    Ok(())
}

fn cohort_artifacts(bundle: &mut Bundle, cfg: &RunConfig, scored: &[ScoredSubmission]) -> Result<(), CliError> {
    let mut stems: Vec<String> = Vec::new();
    for keyword in &cfg.cohorts {
        let stem = file_stem(keyword);
        if stem.is_empty() || stems.contains(&stem) {
            continue;
        }
        stems.push(stem.clone());
        let members: Vec<ScoredSubmission> = cohort(scored, keyword, CohortMatch::Token).into_iter().cloned().collect();
        let mut series: Vec<(&str, DailySeries)> = vec![("count", daily_count(&members, CountMode::All))];
        let mut header = vec!["date".to_string(), "count".to_string()];
        for sel in &cfg.selectors {
            let mean = daily_mean(&members, *sel);
            let ma = moving_average(&mean, cfg.ma_window);
            series.push(("mean", mean));
            series.push(("ma", ma));
            header.push(sel.name().to_string());
            header.push(format!("{}_ma", sel.name()));
        }
        let rows = series_by_date(&series)
            .into_iter()
            .map(|(d, mut r)| {
                r.insert(0, d.to_string());
                r
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        bundle.csv(&format!("cohort_{stem}.csv"), &header, rows)?;
    }
    Ok(())
}

fn histogram_artifacts(bundle: &mut Bundle, cfg: &RunConfig, scored: &[ScoredSubmission]) -> Result<(), CliError> {
    for sel in &cfg.selectors {
        let top: Vec<f64> = top_n(scored, *sel, cfg.top_n).iter().map(|i| sel.value(i)).collect();
        let lo = top.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if top.is_empty() { (0.0, 1.0) } else { (lo, hi) };
        let edges = uniform_edges(lo, hi, cfg.histogram_bins);
        let h = histogram(&top, &edges).expect("uniform edges are ascending");
        let mut rows: Vec<Vec<String>> = h
            .counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![num(h.edges[i]), num(h.edges[i + 1]), c.to_string()])
            .collect();
        rows.push(vec!["overflow".into(), String::new(), h.overflow.to_string()]);
        bundle.csv(&format!("top_{}_histogram.csv", sel.name()), &["bin_start", "bin_end", "count"], rows)?;
    }
    Ok(())
}

fn corpus_artifacts(bundle: &mut Bundle, cfg: &RunConfig, scored: &[ScoredSubmission]) -> Result<(), CliError> {
    let stopwords = cfg.stopwords()?;
    let active: Vec<ScoredSubmission> = scored.iter().filter(|i| !i.excluded).cloned().collect();
    let mut tables: Vec<(String, FreqTable)> = Vec::new();
    for sel in cfg.table_selectors() {
        let table = build_corpus(&active, sel, cfg.corpus_size, &stopwords);
        let rows = export_frequencies(&table, cfg.frequency_k)
            .into_iter()
            .map(|(t, c)| vec![t, c.to_string()])
            .collect();
        bundle.csv(&format!("freq_{}.csv", sel.name()), &["token", "count"], rows)?;
        tables.push((sel.name().to_string(), table));
    }
    if let Ok(m) = jaccard_matrix(&tables) {
        write_matrix(bundle, "jaccard.csv", &m)?;
    }
    Ok(())
}

fn finish(bundle: &Bundle, cfg: &RunConfig, inputs: &Inputs, kind: &str) -> Result<(), CliError> {
    let manifest = json!({
        "bundle": kind,
        "inputs": manifest_inputs(cfg, inputs)?,
        "settings": settings(cfg),
        "artifacts": bundle.artifacts,
    });
    bundle.manifest(&manifest)?;
    println!(
        "{}",
        json!({ "bundle": kind, "artifacts": bundle.artifacts.len() })
    );
    Ok(())
}

pub fn report(cfg: &RunConfig) -> Result<(), CliError> {
    let _lock = StoreLock::acquire(&cfg.store)?;
    let inputs = read_inputs(cfg)?;
    let events = match &cfg.events {
        Some(p) => load_events(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => Vec::new(),
    };
    let scored = &inputs.items;
    let active: Vec<&ScoredSubmission> = scored.iter().filter(|i| !i.excluded).collect();
    let table_sel = cfg.table_selectors();
    let mut bundle = Bundle::create(&cfg.report_dir())?;

    bundle.csv("stats.csv", &STATS_COLUMNS, stats_rows(&active, &table_sel, &[]))?;

    let mut by_sub: BTreeMap<&str, Vec<&ScoredSubmission>> = BTreeMap::new();
    for item in &active {
        by_sub.entry(item.submission.subreddit.as_str()).or_default().push(item);
    }
    let mut rows = Vec::new();
    for (sub, items) in &by_sub {
        rows.extend(stats_rows(items, &table_sel, &[sub.to_string()]));
    }
    let mut header = vec!["subreddit"];
    header.extend(STATS_COLUMNS);
    bundle.csv("subreddit_stats.csv", &header, rows)?;

    let owned: Vec<ScoredSubmission> = active.iter().map(|i| (*i).clone()).collect();
    if let Ok(m) = correlation_matrix(&owned, &table_sel) {
        write_matrix(&mut bundle, "correlation.csv", &m)?;
    }

    daily_artifacts(&mut bundle, cfg, scored, &events)?;
    cohort_artifacts(&mut bundle, cfg, scored)?;
    histogram_artifacts(&mut bundle, cfg, &owned)?;
    corpus_artifacts(&mut bundle, cfg, scored)?;
    finish(&bundle, cfg, &inputs, "report")
}

pub fn corpus(cfg: &RunConfig) -> Result<(), CliError> {
    let _lock = StoreLock::acquire(&cfg.store)?;
    let inputs = read_inputs(cfg)?;
    let mut bundle = Bundle::create(&cfg.out.join("corpus"))?;
    corpus_artifacts(&mut bundle, cfg, &inputs.items)?;
    finish(&bundle, cfg, &inputs, "corpus")
}
