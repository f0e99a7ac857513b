//! Entity scoring with trained models, paired diff statistics, subgroup
//! breakdowns and cross-language imbalance rankings.

mod diff;
mod entity;
mod imbalance;

use serde::Serialize;

pub use diff::{
    diff_scores, diff_statistics, facet_counts, subgroup_report, DiffReport, DiffStatistics, Facet, FacetConfig,
    OccupationGroup, Refusal, SubgroupReport, CONFIDENCE_LEVEL, DEFAULT_MIN_VERBS, UNKNOWN,
};
pub use entity::{
    corpus_export_requests, corpus_feature_key, score_corpus, score_entity, select_sentences, EntityScore, ModelSet,
    ScoreTable, SelectedVerb, SCORED_DIMENSIONS,
};
pub use imbalance::{rank_imbalance, ImbalanceItem, ImbalanceRanking};

use crate::error::{Error, Result};

/// Serializes rows as CSV with a header row.
pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}
