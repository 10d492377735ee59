//! Configuration, ingestion, the analysis pipeline and output writers
//! behind the `vbpbb` binary.

pub mod config;
pub mod ingest;
pub mod output;
pub mod pipeline;
pub mod plot;
pub mod synth;
