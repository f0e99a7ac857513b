use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::TrainedConnotationModel;
use crate::corpus::{BiographyEntry, MentionConfig, MentionMatcher, Slot};
use crate::error::{Error, Result};
use crate::features::{ExportRequestItem, FeatureSet};
use crate::lexicon::{Dimension, Language};

pub const SCORED_DIMENSIONS: [Dimension; 3] = Dimension::ENTITY;

/// Feature key of a verb in a corpus sentence. `token_index` is 0-based.
pub fn corpus_feature_key(person_id: &str, language: &Language, sentence_index: usize, token_index: usize) -> String {
    format!("{person_id}|{language}|{sentence_index}|{token_index}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedVerb {
    pub sentence_index: usize,
    /// 0-based position of the verb in the sentence.
    pub token_index: usize,
    pub verb_lemma: String,
    pub key: String,
}

/// Verbs whose grammatical subject is the person, in sentence order. Object
/// mentions are ignored.
pub fn select_sentences(entry: &BiographyEntry, language: &Language, cfg: &MentionConfig) -> Vec<SelectedVerb> {
    let (Some(page), Some(matcher)) = (entry.page(language), MentionMatcher::for_entry(entry, language, cfg)) else {
        return Vec::new();
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, s) in page.sentences.iter().enumerate() {
        for m in matcher.mentions(i, s) {
            if m.slot != Slot::Subject || !seen.insert((i, m.verb_id)) {
                continue;
            }
            let verb = s.token(m.verb_id).expect("mention verb exists");
            out.push(SelectedVerb {
                sentence_index: i,
                token_index: m.verb_id - 1,
                verb_lemma: verb.lemma.clone(),
                key: corpus_feature_key(&entry.person_id, language, i, m.verb_id - 1),
            });
        }
    }
    out
}

/// Export requests for every selected verb of the given entries.
pub fn corpus_export_requests(
    entries: &[BiographyEntry],
    languages: &[Language],
    cfg: &MentionConfig,
) -> Vec<ExportRequestItem> {
    let mut out = Vec::new();
    for e in entries {
        for lang in languages {
            let Some(page) = e.page(lang) else { continue };
            for v in select_sentences(e, lang, cfg) {
                let s = &page.sentences[v.sentence_index];
                out.push(ExportRequestItem {
                    key: v.key,
                    sentence: s.surface(),
                    tokens: Some(s.forms()),
                    token_index: v.token_index,
                    language: lang.clone(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityScore {
    pub person_id: String,
    pub language: Language,
    pub dimension: Dimension,
    /// Mean predicted label value in [-1, 1].
    pub mean: f64,
    pub n_verbs: usize,
}

/// Models keyed by dimension.
pub type ModelSet = BTreeMap<Dimension, TrainedConnotationModel>;

/// Scores one person in one language with every supplied model among the
/// scored dimensions. `Ok(None)` means the person has no selected verbs.
pub fn score_entity(
    entry: &BiographyEntry,
    language: &Language,
    models: &ModelSet,
    features: &FeatureSet,
    cfg: &MentionConfig,
) -> Result<Option<Vec<EntityScore>>> {
    let verbs = select_sentences(entry, language, cfg);
    if verbs.is_empty() {
        return Ok(None);
    }
    let vectors: Vec<&[f32]> = verbs
        .iter()
        .map(|v| {
            features
                .get(&v.key)
                .map(|r| r.vector.as_slice())
                .ok_or_else(|| Error::KeyMismatch(format!("no feature record for corpus verb {}", v.key)))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for dim in SCORED_DIMENSIONS {
        let Some(model) = models.get(&dim) else { continue };
        if model.dim() != features.dim {
            return Err(Error::KeyMismatch(format!(
                "{dim} model expects {} features, feature set has {}",
                model.dim(),
                features.dim
            )));
        }
        let total: i64 = vectors.iter().map(|x| i64::from(model.predict_f32(x).value())).sum();
        out.push(EntityScore {
            person_id: entry.person_id.clone(),
            language: language.clone(),
            dimension: dim,
            mean: total as f64 / vectors.len() as f64,
            n_verbs: vectors.len(),
        });
    }
    Ok(Some(out))
}

/// Scores for a whole corpus, sorted by (person, language, dimension).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub scores: Vec<EntityScore>,
    /// (person_id, language) pairs with no selected verbs.
    pub unscored: Vec<(String, Language)>,
}

impl ScoreTable {
    pub fn new(mut scores: Vec<EntityScore>, mut unscored: Vec<(String, Language)>) -> Self {
        scores.sort_by(|a, b| {
            (&a.person_id, &a.language, a.dimension).cmp(&(&b.person_id, &b.language, b.dimension))
        });
        unscored.sort();
        ScoreTable { scores, unscored }
    }

    pub fn get(&self, person_id: &str, language: &Language, dimension: Dimension) -> Option<&EntityScore> {
        self.scores
            .binary_search_by(|s| {
                (s.person_id.as_str(), &s.language, s.dimension).cmp(&(person_id, language, dimension))
            })
            .ok()
            .map(|i| &self.scores[i])
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn to_csv(&self) -> Result<String> {
        super::to_csv_string(&self.scores)
    }

    /// Parses the CSV written by `to_csv`; `#` lines are comments.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let mut scores = Vec::new();
        for row in rdr.deserialize() {
            let s: EntityScore = row?;
            scores.push(s);
        }
        Ok(ScoreTable::new(scores, Vec::new()))
    }
}

/// Scores every entry in every language, in parallel.
pub fn score_corpus(
    entries: &[BiographyEntry],
    languages: &[Language],
    models: &ModelSet,
    features: &FeatureSet,
    cfg: &MentionConfig,
) -> Result<ScoreTable> {
    if models.is_empty() {
        return Err(Error::InvalidParameter("no models supplied for scoring".into()));
    }
    let jobs: Vec<(&BiographyEntry, &Language)> = entries
        .iter()
        .flat_map(|e| languages.iter().map(move |l| (e, l)))
        .filter(|(e, l)| e.page(l).is_some())
        .collect();
    let results: Vec<(String, Language, Option<Vec<EntityScore>>)> = jobs
        .par_iter()
        .map(|(e, l)| Ok((e.person_id.clone(), (*l).clone(), score_entity(e, l, models, features, cfg)?)))
        .collect::<Result<_>>()?;
    let mut scores = Vec::new();
    let mut unscored = Vec::new();
    for (id, lang, r) in results {
        match r {
            Some(s) => scores.extend(s),
            None => unscored.push((id, lang)),
        }
    }
    Ok(ScoreTable::new(scores, unscored))
}
