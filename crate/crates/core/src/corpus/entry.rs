//! Biography dump reader. The dump is JSON lines, one object per person per
//! language edition:
//!
//! ```json
//! {"person_id": "p1", "language": "en", "group": "treatment",
//!  "names": ["Alex Jones"], "title": "Alex Jones", "url": "...",
//!  "categories": ["American_writers"],
//!  "attributes": {"nationality": "American", "birth_year": 1950, "occupations": ["writer"]},
//!  "conllu": "# text = ...\n1\tAlex\t..."}
//! ```
//!
//! Lines for the same person are merged: categories are unioned and
//! attributes filled from the first line that carries them.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::conllu::{parse_conllu, to_conllu, Sentence};
use crate::error::{Error, Result};
use crate::lexicon::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Treatment,
    ControlCandidate,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attributes {
    #[serde(default)]
    pub nationality: Option<String>,
    #[serde(default)]
    pub birth_year: Option<i32>,
    #[serde(default)]
    pub occupations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguagePage {
    pub names: Vec<String>,
    pub title: Option<String>,
    pub url: Option<String>,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiographyEntry {
    pub person_id: String,
    pub group: Group,
    pub categories: BTreeSet<String>,
    pub attributes: Attributes,
    pub pages: BTreeMap<Language, LanguagePage>,
}

impl BiographyEntry {
    pub fn page(&self, language: &Language) -> Option<&LanguagePage> {
        self.pages.get(language)
    }

    /// Title in the given language, falling back to the person id.
    pub fn display_title(&self, language: &Language) -> String {
        self.page(language)
            .and_then(|p| p.title.clone())
            .unwrap_or_else(|| self.person_id.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub person_id: String,
    pub language: Language,
    pub group: Group,
    #[serde(default)]
    pub names: Vec<String>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub attributes: Option<Attributes>,
    pub conllu: String,
}

/// Merges dump records into entries sorted by person id.
pub fn merge_records(records: Vec<(usize, DumpRecord)>) -> Result<Vec<BiographyEntry>> {
    let mut entries: BTreeMap<String, BiographyEntry> = BTreeMap::new();
    for (line, rec) in records {
        let sentences = parse_conllu(&rec.conllu).map_err(|e| Error::Row {
            row: line,
            message: format!("person {} ({}): {e}", rec.person_id, rec.language),
        })?;
        let entry = entries
            .entry(rec.person_id.clone())
            .or_insert_with(|| BiographyEntry {
                person_id: rec.person_id.clone(),
                group: rec.group,
                categories: BTreeSet::new(),
                attributes: Attributes::default(),
                pages: BTreeMap::new(),
            });
        if entry.group != rec.group {
            return Err(Error::Row {
                row: line,
                message: format!("person {} listed in two groups", rec.person_id),
            });
        }
        if entry.pages.contains_key(&rec.language) {
            return Err(Error::Row {
                row: line,
                message: format!("duplicate {} page for person {}", rec.language, rec.person_id),
            });
        }
        entry.categories.extend(rec.categories);
        if let Some(a) = rec.attributes {
            let cur = &mut entry.attributes;
            if cur.nationality.is_none() {
                cur.nationality = a.nationality;
            }
            if cur.birth_year.is_none() {
                cur.birth_year = a.birth_year;
            }
            if cur.occupations.is_empty() {
                cur.occupations = a.occupations;
            }
        }
        entry.pages.insert(
            rec.language,
            LanguagePage {
                names: rec.names,
                title: rec.title,
                url: rec.url,
                sentences,
            },
        );
    }
    Ok(entries.into_values().collect())
}

/// Reads a JSON-lines dump. Errors carry the 1-based line number.
pub fn read_dump(path: &Path) -> Result<Vec<BiographyEntry>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DumpRecord = serde_json::from_str(&line).map_err(|e| Error::Row {
            row: i + 1,
            message: e.to_string(),
        })?;
        records.push((i + 1, rec));
    }
    merge_records(records)
}

/// Splits entries back into dump records, one per page.
pub fn to_records(entries: &[BiographyEntry]) -> Vec<DumpRecord> {
    let mut out = Vec::new();
    for e in entries {
        for (i, (lang, page)) in e.pages.iter().enumerate() {
            out.push(DumpRecord {
                person_id: e.person_id.clone(),
                language: lang.clone(),
                group: e.group,
                names: page.names.clone(),
                title: page.title.clone(),
                url: page.url.clone(),
                categories: if i == 0 {
                    e.categories.iter().cloned().collect()
                } else {
                    Vec::new()
                },
                attributes: (i == 0).then(|| e.attributes.clone()),
                conllu: to_conllu(&page.sentences),
            });
        }
    }
    out
}

pub fn write_dump(path: &Path, entries: &[BiographyEntry]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    for rec in to_records(entries) {
        writeln!(w, "{}", serde_json::to_string(&rec)?).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
