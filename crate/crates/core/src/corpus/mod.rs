//! Treatment/control biography corpora: dump reading, mention detection,
//! filtering, candidate tuple extraction and category matching.

pub mod conllu;
mod entry;
mod filter;
mod matching;
mod mentions;
mod tuples;
mod vectors;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use entry::{merge_records, read_dump, to_records, write_dump, Attributes, BiographyEntry, DumpRecord, Group, LanguagePage};
pub use filter::{analyzable_count, filter_entries, DEFAULT_MIN_SENTENCES};
pub use matching::{
    category_gap, default_slope_grid, match_controls, matching_csv, read_matching_csv, similarity_matrix, tune_slope,
    MatchOutcome, MatchedPair, SlopeTuning, DEFAULT_SIMILARITY_FLOOR,
};
pub use mentions::{infer_pronoun, Mention, MentionConfig, MentionMatcher, Pronoun, PronounSet, RelationConfig, Slot};
pub use tuples::{extract_candidate_tuples, SovTuple, TupleConfig};
pub use vectors::{
    build_category_vectors, check_pivot_slope, mean_category_count, CategoryProfile, CategoryVector, ExclusionList,
};

use crate::error::{Error, Result};
use crate::lexicon::Language;

/// Reads a one-word-per-line list, lowercased. `#` starts a comment.
pub fn read_word_list(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub languages: Vec<Language>,
    pub min_sentences: usize,
    pub mentions: MentionConfig,
    pub slope_grid: Vec<f64>,
    /// Fixed pivot; the mean category count of the pool when unset.
    pub pivot: Option<f64>,
    pub similarity_floor: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            languages: ["en", "es", "ru"].iter().map(|l| Language::new(l).expect("valid code")).collect(),
            min_sentences: DEFAULT_MIN_SENTENCES,
            mentions: MentionConfig::default(),
            slope_grid: default_slope_grid(),
            pivot: None,
            similarity_floor: DEFAULT_SIMILARITY_FLOOR,
        }
    }
}

/// A filtered corpus split by group, with the ids of the entries removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredCorpus {
    pub treatment: Vec<BiographyEntry>,
    pub candidates: Vec<BiographyEntry>,
    pub dropped: Vec<String>,
}

/// Applies the same filters to treatment entries and control candidates.
pub fn filter_corpus(entries: &[BiographyEntry], cfg: &CorpusConfig) -> FilteredCorpus {
    let kept = filter_entries(entries, &cfg.languages, cfg.min_sentences, &cfg.mentions);
    let kept_ids: HashSet<&str> = kept.iter().map(|e| e.person_id.as_str()).collect();
    let dropped = entries
        .iter()
        .filter(|e| !kept_ids.contains(e.person_id.as_str()))
        .map(|e| e.person_id.clone())
        .collect();
    let (treatment, candidates) = kept.into_iter().partition(|e| e.group == Group::Treatment);
    FilteredCorpus {
        treatment,
        candidates,
        dropped,
    }
}

/// Tunes the slope and matches each treatment entry to a control.
pub fn match_corpus(corpus: &FilteredCorpus, excluded: &ExclusionList, cfg: &CorpusConfig) -> Result<MatchOutcome> {
    let profiles: Vec<CategoryProfile> = corpus
        .treatment
        .iter()
        .chain(&corpus.candidates)
        .map(|e| CategoryProfile::from_entry(e, excluded))
        .collect();
    let treatment: Vec<String> = corpus.treatment.iter().map(|e| e.person_id.clone()).collect();
    let candidates: Vec<String> = corpus.candidates.iter().map(|e| e.person_id.clone()).collect();
    tune_slope(
        &treatment,
        &candidates,
        &profiles,
        excluded,
        &cfg.slope_grid,
        cfg.pivot,
        cfg.similarity_floor,
    )
}
