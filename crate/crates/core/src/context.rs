//! How much is lost by collapsing contexts into per-verb scores, and by
//! borrowing English annotations through word-level translation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{Dimension, Language, Lexicon, TernaryLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbLevelScore {
    pub verb_lemma: String,
    pub language: Language,
    pub dimension: Dimension,
    pub score: f64,
    pub label: TernaryLabel,
    pub n_contexts: usize,
}

/// One verb-level score per lemma, sorted by lemma. The score is the
/// unweighted mean of the lemma's context-level aggregate scores.
pub fn decontextualize(lexicon: &Lexicon) -> Result<Vec<VerbLevelScore>> {
    let mut by_verb: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for inst in &lexicon.instances {
        let score = inst
            .aggregate_score
            .ok_or_else(|| Error::NotAggregated(inst.instance_id.clone()))?;
        let e = by_verb.entry(inst.verb_lemma.as_str()).or_insert((0.0, 0));
        e.0 += score;
        e.1 += 1;
    }
    Ok(by_verb
        .into_iter()
        .map(|(lemma, (sum, n))| {
            let score = sum / n as f64;
            VerbLevelScore {
                verb_lemma: lemma.to_string(),
                language: lexicon.language.clone(),
                dimension: lexicon.dimension,
                score,
                label: TernaryLabel::from_score(score),
                n_contexts: n,
            }
        })
        .collect())
}

/// Percentage of instances whose context-level label differs from the label
/// of their verb's decontextualized score.
pub fn context_loss(lexicon: &Lexicon) -> Result<f64> {
    let verbs: HashMap<String, TernaryLabel> = decontextualize(lexicon)?
        .into_iter()
        .map(|v| (v.verb_lemma, v.label))
        .collect();
    if lexicon.instances.is_empty() {
        return Ok(0.0);
    }
    let mut differ = 0usize;
    for inst in &lexicon.instances {
        let label = inst
            .label
            .ok_or_else(|| Error::NotAggregated(inst.instance_id.clone()))?;
        if verbs[&inst.verb_lemma] != label {
            differ += 1;
        }
    }
    Ok(100.0 * differ as f64 / lexicon.instances.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationEntry {
    pub source_lemma: String,
    pub source_language: Language,
    pub target_lemma: String,
}

/// Word-level translations into English. Entries judged inaccurate are kept
/// in `rejected` for the record and never used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TranslationTable {
    pub entries: Vec<TranslationEntry>,
    pub rejected: Vec<TranslationEntry>,
}

#[derive(Debug, Deserialize)]
struct TranslationRow {
    source_lemma: String,
    source_language: String,
    target_lemma: String,
    accepted_flag: String,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" | "accepted" => Some(true),
        "0" | "false" | "no" | "n" | "rejected" => Some(false),
        _ => None,
    }
}

impl TranslationTable {
    /// Reads `source_lemma,source_language,target_lemma,accepted_flag` CSV.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut table = TranslationTable::default();
        let mut seen = HashSet::new();
        for (i, rec) in rdr.deserialize().enumerate() {
            let row_no = i + 1;
            let row: TranslationRow = rec.map_err(|e| Error::Row {
                row: row_no,
                message: e.to_string(),
            })?;
            let source_language = Language::new(&row.source_language).map_err(|e| Error::Row {
                row: row_no,
                message: e.to_string(),
            })?;
            let accepted = parse_flag(&row.accepted_flag).ok_or_else(|| Error::Row {
                row: row_no,
                message: format!("unrecognised accepted_flag {:?}", row.accepted_flag),
            })?;
            if !seen.insert((row.source_lemma.clone(), source_language.clone())) {
                return Err(Error::Row {
                    row: row_no,
                    message: format!(
                        "duplicate translation for {}/{}",
                        source_language, row.source_lemma
                    ),
                });
            }
            let entry = TranslationEntry {
                source_lemma: row.source_lemma,
                source_language,
                target_lemma: row.target_lemma,
            };
            if accepted {
                table.entries.push(entry);
            } else {
                table.rejected.push(entry);
            }
        }
        Ok(table)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(f)
    }

    /// Maps each lemma to itself.
    pub fn identity<'a>(lemmas: impl IntoIterator<Item = &'a str>, language: &Language) -> Self {
        let mut entries: Vec<TranslationEntry> = lemmas
            .into_iter()
            .map(|l| TranslationEntry {
                source_lemma: l.to_string(),
                source_language: language.clone(),
                target_lemma: l.to_string(),
            })
            .collect();
        entries.sort_by(|a, b| a.source_lemma.cmp(&b.source_lemma));
        entries.dedup();
        TranslationTable {
            entries,
            rejected: Vec::new(),
        }
    }

    pub fn lookup(&self, lemma: &str, language: &Language) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.source_lemma == lemma && &e.source_language == language)
            .map(|e| e.target_lemma.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationLoss {
    pub percent: f64,
    pub n_verbs: usize,
}

/// Compares decontextualized labels of source-language verbs with those of
/// their English translations, over verbs whose translation is annotated.
pub fn translation_loss(
    source: &Lexicon,
    english: &Lexicon,
    table: &TranslationTable,
) -> Result<TranslationLoss> {
    if source.dimension != english.dimension {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: {} vs {}",
            source.dimension, english.dimension
        )));
    }
    let english_labels: HashMap<String, TernaryLabel> = decontextualize(english)?
        .into_iter()
        .map(|v| (v.verb_lemma, v.label))
        .collect();
    let mut n = 0usize;
    let mut differ = 0usize;
    for verb in decontextualize(source)? {
        let Some(target) = table.lookup(&verb.verb_lemma, &source.language) else {
            continue;
        };
        let Some(eng) = english_labels.get(target) else {
            continue;
        };
        n += 1;
        if *eng != verb.label {
            differ += 1;
        }
    }
    if n == 0 {
        return Err(Error::InsufficientData(format!(
            "no {} verbs translate to annotated English verbs",
            source.language
        )));
    }
    Ok(TranslationLoss {
        percent: 100.0 * differ as f64 / n as f64,
        n_verbs: n,
    })
}
