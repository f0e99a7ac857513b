//! Reader for crowdsourced judgement exports.
//!
//! The expected file is UTF-8 CSV with a header row and one judgement per row:
//!
//! ```text
//! instance_id,language,dimension,verb_lemma,sentence,verb_token_index,annotator_id,judgement
//! en-p-001,en,power,rescue,The firefighter rescued the boy,2,w17,subject has more power
//! ```
//!
//! Judgement strings are mapped onto {-1, 0, +1} through a per-dimension
//! [`JudgementMapping`]. Rows with the same `instance_id` are grouped into a
//! single [`ConnotationInstance`]; no aggregation happens here.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::types::{ConnotationInstance, Dimension, Judgement, Language, Lexicon};
use crate::error::{Error, Result};

/// Maps categorical judgement strings to values, per dimension.
#[derive(Debug, Clone)]
pub struct JudgementMapping {
    table: HashMap<(Dimension, String), i8>,
}

impl Default for JudgementMapping {
    fn default() -> Self {
        let mut m = JudgementMapping {
            table: HashMap::new(),
        };
        let power = [
            ("less", -1),
            ("equal", 0),
            ("more", 1),
            ("less power", -1),
            ("equal power", 0),
            ("more power", 1),
            ("subject has less power", -1),
            ("subject has equal power", 0),
            ("subject has more power", 1),
        ];
        let agency = [
            ("low", -1),
            ("moderate", 0),
            ("high", 1),
            ("low agency", -1),
            ("moderate agency", 0),
            ("high agency", 1),
        ];
        let sentiment = [
            ("negative", -1),
            ("neutral", 0),
            ("positive", 1),
        ];
        for (s, v) in power {
            m.insert(Dimension::Power, s, v);
        }
        for (s, v) in agency {
            m.insert(Dimension::Agency, s, v);
        }
        for dim in [Dimension::SentSubj, Dimension::SentObj] {
            for (s, v) in sentiment {
                m.insert(dim, s, v);
            }
        }
        for dim in Dimension::ALL {
            m.insert(dim, "-1", -1);
            m.insert(dim, "0", 0);
            m.insert(dim, "1", 1);
            m.insert(dim, "+1", 1);
        }
        m
    }
}

impl JudgementMapping {
    pub fn empty() -> Self {
        JudgementMapping {
            table: HashMap::new(),
        }
    }

    pub fn insert(&mut self, dimension: Dimension, judgement: &str, value: i8) {
        self.table.insert((dimension, normalize(judgement)), value);
    }

    pub fn map(&self, dimension: Dimension, judgement: &str) -> Option<i8> {
        self.table.get(&(dimension, normalize(judgement))).copied()
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// One row of the annotation export.
#[derive(Debug, Clone, Deserialize)]
pub struct JudgementRow {
    pub instance_id: String,
    pub language: String,
    pub dimension: String,
    pub verb_lemma: String,
    pub sentence: String,
    pub verb_token_index: usize,
    pub annotator_id: String,
    pub judgement: String,
}

pub fn read_judgement_rows<R: Read>(reader: R) -> Result<Vec<JudgementRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row: JudgementRow = rec.map_err(|e| Error::Row {
            row: i + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Groups rows into one lexicon per (language, dimension), ordered by that
/// pair. Instances keep the order in which their first row appeared.
///
/// Row numbers in errors are 1-based and count data rows only.
pub fn ingest_judgements(rows: &[JudgementRow], mapping: &JudgementMapping) -> Result<Vec<Lexicon>> {
    let mut lexicons: BTreeMap<(Language, Dimension), Lexicon> = BTreeMap::new();
    // (instance_id, dimension) -> (lexicon key, position). One context may be
    // annotated for several dimensions under the same id, but an id never
    // spans languages since feature files are keyed by it.
    let mut index: HashMap<(String, Dimension), ((Language, Dimension), usize)> = HashMap::new();
    let mut id_language: HashMap<String, Language> = HashMap::new();

    for (i, row) in rows.iter().enumerate() {
        let row_no = i + 1;
        let err = |message: String| Error::Row {
            row: row_no,
            message,
        };
        let language = Language::new(&row.language).map_err(|e| err(e.to_string()))?;
        let dimension: Dimension = row.dimension.parse().map_err(|e: Error| err(e.to_string()))?;
        let value = mapping.map(dimension, &row.judgement).ok_or_else(|| {
            err(format!(
                "unknown {} judgement {:?}",
                dimension, row.judgement
            ))
        })?;
        let judgement = Judgement::new(row.annotator_id.trim(), value).map_err(|e| err(e.to_string()))?;

        let key = (language.clone(), dimension);
        match id_language.get(&row.instance_id) {
            Some(l) if *l != language => {
                return Err(err(format!(
                    "instance {} appears under both {} and {}",
                    row.instance_id, l, language
                )));
            }
            Some(_) => {}
            None => {
                id_language.insert(row.instance_id.clone(), language.clone());
            }
        }
        match index.get(&(row.instance_id.clone(), dimension)) {
            Some((k, pos)) => {
                let inst = &mut lexicons.get_mut(k).expect("indexed lexicon").instances[*pos];
                if inst.verb_lemma != row.verb_lemma
                    || inst.context_sentence != row.sentence
                    || inst.verb_token_index != row.verb_token_index
                {
                    return Err(err(format!(
                        "instance {} has inconsistent verb/context fields",
                        row.instance_id
                    )));
                }
                if inst
                    .judgements
                    .iter()
                    .any(|j| j.annotator_id == judgement.annotator_id)
                {
                    return Err(err(format!(
                        "duplicate judgement by annotator {} on instance {}",
                        judgement.annotator_id, row.instance_id
                    )));
                }
                inst.judgements.push(judgement);
            }
            None => {
                let lex = lexicons
                    .entry(key.clone())
                    .or_insert_with(|| Lexicon::new(language.clone(), dimension));
                lex.instances.push(ConnotationInstance {
                    instance_id: row.instance_id.clone(),
                    verb_lemma: row.verb_lemma.clone(),
                    context_sentence: row.sentence.clone(),
                    verb_token_index: row.verb_token_index,
                    language,
                    dimension,
                    judgements: vec![judgement],
                    aggregate_score: None,
                    label: None,
                });
                index.insert((row.instance_id.clone(), dimension), (key, lex.instances.len() - 1));
            }
        }
    }

    Ok(lexicons.into_values().collect())
}

pub fn ingest_file(path: &Path, mapping: &JudgementMapping) -> Result<Vec<Lexicon>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = read_judgement_rows(file)?;
    let mut lexicons = ingest_judgements(&rows, mapping)?;
    for lex in &mut lexicons {
        lex.provenance = format!("ingested from {}", path.display());
    }
    Ok(lexicons)
}
