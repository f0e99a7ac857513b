use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::entity::ScoreTable;
use crate::corpus::BiographyEntry;
use crate::lexicon::{Dimension, Language};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceItem {
    pub person_id: String,
    pub title_a: String,
    pub title_b: String,
    pub url_a: Option<String>,
    pub url_b: Option<String>,
    pub score_a: f64,
    pub score_b: f64,
    /// score_a - score_b
    pub differential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceRanking {
    pub language_a: Language,
    pub language_b: Language,
    pub dimension: Dimension,
    pub k: usize,
    /// Set when `k` exceeded the number of people scored in both languages.
    pub truncated: bool,
    pub items: Vec<ImbalanceItem>,
}

/// People scored in both languages, ranked by score(A) - score(B)
/// descending, ties by person id. `entries` only supplies titles and links.
pub fn rank_imbalance(
    scores: &ScoreTable,
    entries: &[BiographyEntry],
    language_a: &Language,
    language_b: &Language,
    dimension: Dimension,
    k: usize,
) -> ImbalanceRanking {
    let by_id: HashMap<&str, &BiographyEntry> = entries.iter().map(|e| (e.person_id.as_str(), e)).collect();
    let mut items: Vec<ImbalanceItem> = scores
        .scores
        .iter()
        .filter(|s| &s.language == language_a && s.dimension == dimension)
        .filter_map(|a| {
            let b = scores.get(&a.person_id, language_b, dimension)?;
            let entry = by_id.get(a.person_id.as_str());
            let title = |l: &Language| entry.map_or_else(|| a.person_id.clone(), |e| e.display_title(l));
            let url = |l: &Language| entry.and_then(|e| e.page(l)).and_then(|p| p.url.clone());
            Some(ImbalanceItem {
                person_id: a.person_id.clone(),
                title_a: title(language_a),
                title_b: title(language_b),
                url_a: url(language_a),
                url_b: url(language_b),
                score_a: a.mean,
                score_b: b.mean,
                differential: a.mean - b.mean,
            })
        })
        .collect();
    items.sort_by(|x, y| {
        y.differential
            .total_cmp(&x.differential)
            .then_with(|| x.person_id.cmp(&y.person_id))
    });
    let truncated = k > items.len();
    items.truncate(k);
    ImbalanceRanking {
        language_a: language_a.clone(),
        language_b: language_b.clone(),
        dimension,
        k,
        truncated,
        items,
    }
}
