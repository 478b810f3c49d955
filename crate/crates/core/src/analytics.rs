//! Descriptive statistics, correlations, daily series, cohorts, top-N and
//! histograms over scored submissions.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extremism::{order_free_sum, ScoredSubmission};
use crate::ingest::preprocess;
use crate::model::Kind;
use crate::text::tokenize;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("no values")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
    #[error("histogram edges must be strictly ascending and at least 2")]
    BadEdges,
    #[error("unknown label {0:?} (expected Extreme, Moderate or Neutral)")]
    UnknownLabel(String),
    #[error("unknown selector {0:?}")]
    UnknownSelector(String),
    #[error("series dates must be strictly increasing and values finite")]
    BadSeries,
    #[error("duplicate matrix label {0:?}")]
    DuplicateLabel(String),
    #[error("cannot read events {path}: {message}")]
    Events { path: String, message: String },
}

/// A score stage that analytics can group, rank or correlate on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    A,
    AbsP,
    S,
    /// `1 - s`.
    InvS,
    Chi,
    ChiNorm,
    ChiL,
    ChiLu,
}

impl Selector {
    pub const ALL: [Selector; 8] = [
        Selector::A,
        Selector::AbsP,
        Selector::S,
        Selector::InvS,
        Selector::Chi,
        Selector::ChiNorm,
        Selector::ChiL,
        Selector::ChiLu,
    ];

    pub fn value(self, item: &ScoredSubmission) -> f64 {
        match self {
            Selector::A => item.scores.a,
            Selector::AbsP => item.scores.p.abs(),
            Selector::S => item.scores.s,
            Selector::InvS => 1.0 - item.scores.s,
            Selector::Chi => item.chi,
            Selector::ChiNorm => item.chi_norm,
            Selector::ChiL => item.chi_l,
            Selector::ChiLu => item.chi_lu,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Selector::A => "a",
            Selector::AbsP => "abs_p",
            Selector::S => "s",
            Selector::InvS => "inv_s",
            Selector::Chi => "chi",
            Selector::ChiNorm => "chi_norm",
            Selector::ChiL => "chi_l",
            Selector::ChiLu => "chi_lu",
        }
    }

    /// Stages bounded to [0, 1].
    pub fn is_unit_range(self) -> bool {
        matches!(self, Selector::A | Selector::AbsP | Selector::S | Selector::InvS | Selector::Chi)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selector {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Selector::ALL
            .into_iter()
            .find(|sel| sel.name() == s)
            .ok_or_else(|| AnalyticsError::UnknownSelector(s.to_string()))
    }
}

/// Date-indexed values with strictly increasing dates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DailySeries {
    points: Vec<(NaiveDate, f64)>,
}

impl DailySeries {
    pub fn new(points: Vec<(NaiveDate, f64)>) -> Result<Self, AnalyticsError> {
        let ordered = points.windows(2).all(|w| w[0].0 < w[1].0);
        if !ordered || points.iter().any(|(_, v)| !v.is_finite()) {
            return Err(AnalyticsError::BadSeries);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(NaiveDate, f64)] {
        &self.points
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn map_values(&self, values: Vec<f64>) -> Self {
        Self {
            points: self.points.iter().zip(values).map(|((d, _), v)| (*d, v)).collect(),
        }
    }
}

fn day_of(item: &ScoredSubmission) -> NaiveDate {
    item.submission.created_at.date_naive()
}

/// Per-day mean of one stage over non-excluded items; empty days are absent.
pub fn daily_mean(items: &[ScoredSubmission], selector: Selector) -> DailySeries {
    let mut days: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for item in items.iter().filter(|i| !i.excluded) {
        days.entry(day_of(item)).or_default().push(selector.value(item));
    }
    DailySeries {
        points: days
            .into_iter()
            .map(|(d, vals)| {
                let n = vals.len() as f64;
                (d, order_free_sum(vals) / n)
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CountMode {
    #[default]
    All,
    PostsOnly,
}

/// Per-day number of non-excluded submissions.
pub fn daily_count(items: &[ScoredSubmission], mode: CountMode) -> DailySeries {
    let mut days: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for item in items.iter().filter(|i| !i.excluded) {
        if mode == CountMode::PostsOnly && item.submission.kind != Kind::Post {
            continue;
        }
        *days.entry(day_of(item)).or_default() += 1;
    }
    DailySeries {
        points: days.into_iter().map(|(d, c)| (d, c as f64)).collect(),
    }
}

/// Trailing mean over the last `window` points; the first points average
/// whatever prefix exists.
pub fn moving_average(series: &DailySeries, window: usize) -> DailySeries {
    let window = window.max(1);
    let vals: Vec<f64> = series.values().collect();
    let out = (0..vals.len())
        .map(|i| {
            let start = (i + 1).saturating_sub(window);
            let slice = &vals[start..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect();
    series.map_values(out)
}

/// Cumulative mean from the first day through each day.
pub fn running_mean(series: &DailySeries) -> DailySeries {
    let mut sum = 0.0;
    let out = series
        .values()
        .enumerate()
        .map(|(i, v)| {
            sum += v;
            sum / (i + 1) as f64
        })
        .collect();
    series.map_values(out)
}

pub fn deviation_from_mean(series: &DailySeries, global_mean: f64) -> DailySeries {
    series.map_values(series.values().map(|v| v - global_mean).collect())
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalyticsError> {
    if xs.len() != ys.len() {
        return Err(AnalyticsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(AnalyticsError::TooShort(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Square matrix with row/column labels; `None` marks an undefined cell.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    pub labels: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl LabeledMatrix {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row][col]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.labels.len();
        (0..n).all(|i| (0..n).all(|j| self.cells[i][j] == self.cells[j][i]))
    }
}

/// Pairwise Pearson correlations between stages. The diagonal is 1.
pub fn correlation_matrix(items: &[ScoredSubmission], selectors: &[Selector]) -> Result<LabeledMatrix, AnalyticsError> {
    if items.len() < 2 {
        return Err(AnalyticsError::TooShort(items.len()));
    }
    let columns: Vec<Vec<f64>> = selectors
        .iter()
        .map(|s| items.iter().map(|i| s.value(i)).collect())
        .collect();
    let k = selectors.len();
    let mut cells = vec![vec![None; k]; k];
    for i in 0..k {
        cells[i][i] = Some(1.0);
        for j in (i + 1)..k {
            let r = pearson(&columns[i], &columns[j]).ok();
            cells[i][j] = r;
            cells[j][i] = r;
        }
    }
    Ok(LabeledMatrix {
        labels: selectors.iter().map(|s| s.name().to_string()).collect(),
        cells,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn describe(values: &[f64]) -> Result<DescriptiveStats, AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(DescriptiveStats {
        count: n,
        mean,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
    })
}

/// The `n` highest items by `selector`, descending, ties by id ascending.
pub fn top_n<'a>(items: &'a [ScoredSubmission], selector: Selector, n: usize) -> Vec<&'a ScoredSubmission> {
    let mut refs: Vec<&ScoredSubmission> = items.iter().collect();
    refs.sort_by(|x, y| {
        selector
            .value(y)
            .total_cmp(&selector.value(x))
            .then_with(|| x.submission.id.cmp(&y.submission.id))
    });
    refs.truncate(n);
    refs
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CohortMatch {
    /// The keyword must be a whole token (`hamas-led` does not match `hamas`).
    #[default]
    Token,
    Substring,
}

/// Items whose clean text mentions `keyword` (case-insensitive).
pub fn cohort<'a>(items: &'a [ScoredSubmission], keyword: &str, mode: CohortMatch) -> Vec<&'a ScoredSubmission> {
    let needle = keyword.trim().to_lowercase();
    if needle.is_empty() {
        return Vec::new();
    }
    items
        .iter()
        .filter(|item| {
            let Some(clean) = preprocess(&item.submission.text).as_text().map(str::to_string) else {
                return false;
            };
            match mode {
                CohortMatch::Token => tokenize(&clean).contains(&needle.as_str()),
                CohortMatch::Substring => clean.contains(&needle),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values outside `[first edge, last edge]` (and NaN).
    pub overflow: u64,
}

/// Half-open bins `[e_i, e_{i+1})`, the last bin closed.
pub fn histogram(values: &[f64], edges: &[f64]) -> Result<Histogram, AnalyticsError> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(AnalyticsError::BadEdges);
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let mut overflow = 0;
    let last = edges[edges.len() - 1];
    for &v in values {
        if !(v >= edges[0] && v <= last) {
            overflow += 1;
            continue;
        }
        // first edge strictly greater than v, minus one
        let idx = edges.partition_point(|e| *e <= v);
        counts[(idx - 1).min(bins - 1)] += 1;
    }
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
        overflow,
    })
}

/// `bins` equal-width edges covering `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let bins = bins.max(1);
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    edges
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Extreme,
    Moderate,
    Neutral,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Extreme => "Extreme",
            Label::Moderate => "Moderate",
            Label::Neutral => "Neutral",
        }
    }
}

impl FromStr for Label {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "extreme" => Ok(Label::Extreme),
            "moderate" => Ok(Label::Moderate),
            "neutral" => Ok(Label::Neutral),
            _ => Err(AnalyticsError::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelRow {
    pub label: Label,
    pub count: usize,
    pub a: f64,
    pub abs_p: f64,
    pub s: f64,
    pub chi_norm: f64,
    pub chi_l: f64,
}

/// Per-label means of `a`, `|p|`, `s`, `chi_norm` and `chi_l`, in the order
/// Extreme, Moderate, Neutral. Labels without items are left out. The sums
/// do not depend on input order.
pub fn label_stats(labeled: &[(Label, ScoredSubmission)]) -> Vec<LabelRow> {
    let mut groups: BTreeMap<Label, Vec<&ScoredSubmission>> = BTreeMap::new();
    for (label, item) in labeled.iter().filter(|(_, i)| !i.excluded) {
        groups.entry(*label).or_default().push(item);
    }
    groups
        .into_iter()
        .map(|(label, items)| {
            let n = items.len() as f64;
            let mean = |sel: Selector| order_free_sum(items.iter().map(|i| sel.value(i)).collect()) / n;
            LabelRow {
                label,
                count: items.len(),
                a: mean(Selector::A),
                abs_p: mean(Selector::AbsP),
                s: mean(Selector::S),
                chi_norm: mean(Selector::ChiNorm),
                chi_l: mean(Selector::ChiL),
            }
        })
        .collect()
}

/// A dated real-world event for annotating deviation series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub date: NaiveDate,
    pub description: String,
    pub reference: String,
}

pub fn parse_events<R: std::io::Read>(reader: R) -> Result<Vec<Event>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

pub fn load_events(path: &Path) -> Result<Vec<Event>, AnalyticsError> {
    let err = |message: String| AnalyticsError::Events {
        path: path.display().to_string(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| err(e.to_string()))?;
    parse_events(file).map_err(|e| err(e.to_string()))
}

/// Joins event descriptions (`; `-separated) onto each series day.
pub fn annotate(series: &DailySeries, events: &[Event]) -> Vec<(NaiveDate, f64, String)> {
    let mut by_day: BTreeMap<NaiveDate, Vec<&str>> = BTreeMap::new();
    for e in events {
        by_day.entry(e.date).or_default().push(&e.description);
    }
    series
        .points()
        .iter()
        .map(|(d, v)| (*d, *v, by_day.get(d).map(|ds| ds.join("; ")).unwrap_or_default()))
        .collect()
}
