//! Extremism scoring for online discussion text: ingestion, sentiment
//! engines, score weighting and the analytics built on top.

pub mod analytics;
pub mod extremism;
pub mod ingest;
pub mod model;
pub mod pattern;
pub mod text;
pub mod textstats;
pub mod valence;
pub mod export;
pub mod synth;
