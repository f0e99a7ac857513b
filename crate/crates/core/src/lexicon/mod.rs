//! Connotation lexicons built from crowdsourced judgements.

mod aggregate;
mod agreement;
mod filter;
mod ingest;
mod types;

use std::path::Path;

pub use aggregate::aggregate_and_ternarize;
pub use agreement::{alpha_from_units, krippendorff_alpha, pairwise_agreement, Alpha, DistanceMetric};
pub use filter::{disagreement_rates, filter_annotators, AnnotatorReport, AnnotatorStats};
pub use ingest::{ingest_file, ingest_judgements, read_judgement_rows, JudgementMapping, JudgementRow};
pub use types::{
    ConnotationInstance, Dimension, Judgement, Language, Lexicon, TernaryLabel, POLAR_THRESHOLD,
};

use crate::error::{Error, Result};

/// Writes one JSON document per lexicon as `<dir>/<lang>_<dimension>.json`.
pub fn write_lexicons(dir: &Path, lexicons: &[Lexicon]) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for lex in lexicons {
        let path = dir.join(format!("{}.json", lex.file_stem()));
        std::fs::write(&path, lex.to_json()? + "\n").map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads every `*.json` lexicon in `dir`, sorted by file name.
pub fn read_lexicons(dir: &Path) -> Result<Vec<Lexicon>> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    entries.sort();
    entries
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Lexicon::from_json(&text)
        })
        .collect()
}
