//! Multilingual contextual affective analysis.
//!
//! The crate turns crowdsourced connotation judgements into contextualized
//! power/agency/sentiment lexicons, trains cross-lingual connotation
//! classifiers over precomputed embedding features, builds matched
//! treatment/control biography corpora and computes paired diff statistics.

pub mod classifier;
pub mod cli;
pub mod config;
pub mod context;
pub mod corpus;
pub mod error;
pub mod features;
pub mod lexicon;
pub mod manifest;
pub mod scoring;
pub mod stats;

pub use error::{Error, Result};
