//! Contextual-embedding feature files.
//!
//! A feature file is a short UTF-8 text header followed by binary records:
//!
//! ```text
//! CAAFEAT 1\n
//! dim=1024\n
//! count=900\n
//! language=en\n
//! encoder=xlm-mlm-100-1280\n
//! layer=-1\n
//! meta.pooling=mean\n          (any number of meta.* lines, sorted)
//! \n                           (blank line ends the header)
//! record*: u32 LE key length | key bytes (UTF-8) | dim x f32 LE
//! ```
//!
//! Record order is preserved. Keys are unique within a file and every value
//! is finite. A JSON sidecar ([`FeatureManifest`]) maps keys back to the
//! sentence text and token index they were extracted from.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::Language;

pub const MAGIC: &str = "CAAFEAT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub key: String,
    pub language: Language,
    pub vector: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureHeader {
    pub dim: usize,
    pub language: Language,
    pub encoder: String,
    pub layer: i64,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub header: FeatureHeader,
    pub records: Vec<FeatureRecord>,
}

/// Parameters of a linear classifier with one weight row and bias per class.
pub fn linear_param_count(dim: usize, classes: usize) -> usize {
    classes * (dim + 1)
}

fn check_header_value(name: &str, value: &str) -> Result<()> {
    if value.contains('\n') || value.contains('\r') {
        return Err(Error::FeatureFormat(format!(
            "header field {name} contains a line break"
        )));
    }
    Ok(())
}

impl FeatureFile {
    pub fn new(header: FeatureHeader, records: Vec<FeatureRecord>) -> Result<Self> {
        let f = FeatureFile { header, records };
        f.validate()?;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn param_count(&self, classes: usize) -> usize {
        linear_param_count(self.header.dim, classes)
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        if h.dim == 0 {
            return Err(Error::FeatureFormat("dimension must be positive".into()));
        }
        check_header_value("encoder", &h.encoder)?;
        for (k, v) in &h.metadata {
            if k.contains('=') || k.is_empty() {
                return Err(Error::FeatureFormat(format!("bad metadata key {k:?}")));
            }
            check_header_value(k, k)?;
            check_header_value(k, v)?;
        }
        let mut keys = HashSet::new();
        for (index, r) in self.records.iter().enumerate() {
            if r.vector.len() != h.dim {
                return Err(Error::FeatureRecord {
                    index,
                    message: format!("dimension {} != header dimension {}", r.vector.len(), h.dim),
                });
            }
            if r.language != h.language {
                return Err(Error::FeatureRecord {
                    index,
                    message: format!("language {} != header language {}", r.language, h.language),
                });
            }
            if let Some(pos) = r.vector.iter().position(|v| !v.is_finite()) {
                return Err(Error::FeatureRecord {
                    index,
                    message: format!("non-finite value at component {pos}"),
                });
            }
            if !keys.insert(r.key.as_str()) {
                return Err(Error::FeatureRecord {
                    index,
                    message: format!("duplicate key {:?}", r.key),
                });
            }
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        self.validate()?;
        let mut w = BufWriter::new(w);
        let h = &self.header;
        let mut text = format!(
            "{MAGIC} {VERSION}\ndim={}\ncount={}\nlanguage={}\nencoder={}\nlayer={}\n",
            h.dim,
            self.records.len(),
            h.language,
            h.encoder,
            h.layer
        );
        for (k, v) in &h.metadata {
            text.push_str(&format!("meta.{k}={v}\n"));
        }
        text.push('\n');
        let io = |e| Error::FeatureFormat(format!("write failed: {e}"));
        w.write_all(text.as_bytes()).map_err(io)?;
        for r in &self.records {
            let key = r.key.as_bytes();
            let len = u32::try_from(key.len())
                .map_err(|_| Error::FeatureFormat("key too long".into()))?;
            w.write_all(&len.to_le_bytes()).map_err(io)?;
            w.write_all(key).map_err(io)?;
            for v in &r.vector {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        let read_line = |r: &mut BufReader<R>, line: &mut String| -> Result<()> {
            line.clear();
            let n = r
                .read_line(line)
                .map_err(|e| Error::FeatureFormat(format!("header read failed: {e}")))?;
            if n == 0 {
                return Err(Error::FeatureFormat("unexpected end of header".into()));
            }
            if line.ends_with('\n') {
                line.pop();
            }
            Ok(())
        };

        read_line(&mut r, &mut line)?;
        let version = line
            .strip_prefix(MAGIC)
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| Error::FeatureFormat("missing magic line".into()))?;
        if version != VERSION {
            return Err(Error::FeatureFormat(format!("unsupported version {version}")));
        }

        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        loop {
            read_line(&mut r, &mut line)?;
            if line.is_empty() {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::FeatureFormat(format!("malformed header line {line:?}")))?;
            if fields.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::FeatureFormat(format!("repeated header field {k}")));
            }
        }
        let mut take = |name: &str| {
            fields
                .remove(name)
                .ok_or_else(|| Error::FeatureFormat(format!("missing header field {name}")))
        };
        let parse_err = |name: &str| Error::FeatureFormat(format!("bad value for {name}"));
        let dim: usize = take("dim")?.parse().map_err(|_| parse_err("dim"))?;
        let count: usize = take("count")?.parse().map_err(|_| parse_err("count"))?;
        let language = Language::new(&take("language")?)?;
        let encoder = take("encoder")?;
        let layer: i64 = take("layer")?.parse().map_err(|_| parse_err("layer"))?;
        let mut metadata = BTreeMap::new();
        for (k, v) in fields {
            match k.strip_prefix("meta.") {
                Some(m) => {
                    metadata.insert(m.to_string(), v);
                }
                None => return Err(Error::FeatureFormat(format!("unknown header field {k}"))),
            }
        }
        if dim == 0 {
            return Err(Error::FeatureFormat("dimension must be positive".into()));
        }

        let mut records = Vec::with_capacity(count.min(1 << 20));
        let mut buf4 = [0u8; 4];
        let mut row = vec![0u8; dim * 4];
        for index in 0..count {
            let truncated = || Error::FeatureRecord {
                index,
                message: format!("file declares {count} records but ends after {index}"),
            };
            r.read_exact(&mut buf4).map_err(|_| truncated())?;
            let klen = u32::from_le_bytes(buf4) as usize;
            let mut kbytes = vec![0u8; klen];
            r.read_exact(&mut kbytes).map_err(|_| truncated())?;
            let key = String::from_utf8(kbytes).map_err(|_| Error::FeatureRecord {
                index,
                message: "key is not valid UTF-8".into(),
            })?;
            r.read_exact(&mut row).map_err(|_| truncated())?;
            let vector = row
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            records.push(FeatureRecord {
                key,
                language: language.clone(),
                vector,
            });
        }
        let mut extra = [0u8; 1];
        match r.read(&mut extra) {
            Ok(0) => {}
            Ok(_) => {
                return Err(Error::FeatureFormat(format!(
                    "trailing data after the declared {count} records"
                )))
            }
            Err(e) => return Err(Error::FeatureFormat(format!("read failed: {e}"))),
        }

        FeatureFile::new(
            FeatureHeader {
                dim,
                language,
                encoder,
                layer,
                metadata,
            },
            records,
        )
    }
}

pub fn read_features(path: &Path) -> Result<FeatureFile> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    FeatureFile::read_from(f)
}

pub fn write_features(file: &FeatureFile, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_to(f)
}

/// Records from one or more feature files with keyed lookup.
///
/// Files with equal dimension can be pooled even when their languages
/// differ, but all of them must come from the same encoder.
#[derive(Debug, Clone, Default)]
pub struct FeatureSet {
    pub dim: usize,
    pub encoder: String,
    records: Vec<FeatureRecord>,
    index: HashMap<String, usize>,
}

impl FeatureSet {
    pub fn from_files<'a>(files: impl IntoIterator<Item = &'a FeatureFile>) -> Result<Self> {
        let mut set: Option<FeatureSet> = None;
        for f in files {
            match &mut set {
                None => {
                    set = Some(FeatureSet {
                        dim: f.header.dim,
                        encoder: f.header.encoder.clone(),
                        ..Default::default()
                    })
                }
                Some(s) => {
                    if s.dim != f.header.dim {
                        return Err(Error::FeatureFormat(format!(
                            "cannot pool dimension {} with {}",
                            f.header.dim, s.dim
                        )));
                    }
                    if s.encoder != f.header.encoder {
                        return Err(Error::FeatureFormat(format!(
                            "refusing to mix encoders {:?} and {:?}",
                            s.encoder, f.header.encoder
                        )));
                    }
                }
            }
            let s = set.as_mut().expect("initialised above");
            for r in &f.records {
                s.push(r.clone())?;
            }
        }
        set.ok_or_else(|| Error::FeatureFormat("no feature files given".into()))
    }

    pub fn push(&mut self, record: FeatureRecord) -> Result<()> {
        if record.vector.len() != self.dim {
            return Err(Error::FeatureRecord {
                index: self.records.len(),
                message: format!("dimension {} != {}", record.vector.len(), self.dim),
            });
        }
        if self.index.contains_key(&record.key) {
            return Err(Error::FeatureRecord {
                index: self.records.len(),
                message: format!("duplicate key {:?}", record.key),
            });
        }
        self.index.insert(record.key.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&FeatureRecord> {
        self.index.get(key).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Collapses context vectors into one vector per lemma (elementwise mean).
/// Output records are keyed by lemma and sorted by it.
pub fn decontextualize_embeddings(
    records: &[FeatureRecord],
    verb_of: &HashMap<String, String>,
) -> Result<Vec<FeatureRecord>> {
    let mut sums: BTreeMap<&str, (Vec<f64>, usize, Language)> = BTreeMap::new();
    for (index, r) in records.iter().enumerate() {
        let lemma = verb_of.get(&r.key).ok_or_else(|| Error::FeatureRecord {
            index,
            message: format!("no lemma for key {:?}", r.key),
        })?;
        let e = sums
            .entry(lemma.as_str())
            .or_insert_with(|| (vec![0.0; r.vector.len()], 0, r.language.clone()));
        if e.0.len() != r.vector.len() {
            return Err(Error::FeatureRecord {
                index,
                message: "dimension differs from earlier records".into(),
            });
        }
        for (s, v) in e.0.iter_mut().zip(&r.vector) {
            *s += f64::from(*v);
        }
        e.1 += 1;
    }
    let mut lemmas: Vec<&String> = verb_of.values().collect();
    lemmas.sort();
    lemmas.dedup();
    for lemma in lemmas {
        if !sums.contains_key(lemma.as_str()) {
            log::warn!("lemma {lemma:?} has no feature records; skipped");
        }
    }
    Ok(sums
        .into_iter()
        .map(|(lemma, (sum, n, language))| FeatureRecord {
            key: lemma.to_string(),
            language,
            vector: sum.iter().map(|s| (s / n as f64) as f32).collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sentence: String,
    pub token_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedItem {
    pub key: String,
    pub reason: String,
}

/// JSON sidecar of a feature file, for auditing where vectors came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub entries: BTreeMap<String, ManifestEntry>,
    #[serde(default)]
    pub skipped: Vec<SkippedItem>,
}

impl FeatureManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// One line of the JSON-lines request file consumed by the embedding
/// exporter. `tokens`, when present, is the tokenisation `token_index`
/// refers to; otherwise the sentence is split on whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportRequestItem {
    pub key: String,
    pub sentence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    pub token_index: usize,
    pub language: Language,
}

pub fn write_export_requests(path: &Path, items: &[ExportRequestItem]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_export_requests(path: &Path) -> Result<Vec<ExportRequestItem>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Row {
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en() -> Language {
        Language::new("en").unwrap()
    }

    fn header(dim: usize) -> FeatureHeader {
        FeatureHeader {
            dim,
            language: en(),
            encoder: "test-encoder".into(),
            layer: -1,
            metadata: BTreeMap::from([("pooling".to_string(), "mean".to_string())]),
        }
    }

    fn record(key: &str, vector: Vec<f32>) -> FeatureRecord {
        FeatureRecord {
            key: key.into(),
            language: en(),
            vector,
        }
    }

    fn bytes(f: &FeatureFile) -> Vec<u8> {
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        buf
    }

    #[test]
    fn two_record_round_trip() {
        let f = FeatureFile::new(
            header(3),
            vec![
                record("a", vec![1.0, -2.5, 0.125]),
                record("ключ", vec![f32::MIN_POSITIVE, 3.4e38, -0.0]),
            ],
        )
        .unwrap();
        let back = FeatureFile::read_from(bytes(&f).as_slice()).unwrap();
        assert_eq!(back, f);
        for (a, b) in back.records.iter().zip(&f.records) {
            for (x, y) in a.vector.iter().zip(&b.vector) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn short_file_reports_missing_record() {
        let f = FeatureFile::new(
            header(2),
            (0..4).map(|i| record(&format!("k{i}"), vec![i as f32, 0.0])).collect(),
        )
        .unwrap();
        let mut b = bytes(&f);
        let pos = b.windows(7).position(|w| w == b"count=4").unwrap();
        b[pos + 6] = b'5';
        let err = FeatureFile::read_from(b.as_slice()).unwrap_err();
        assert!(matches!(err, Error::FeatureRecord { index: 4, .. }), "{err:?}");
    }

    #[test]
    fn trailing_bytes_rejected() {
        let f = FeatureFile::new(header(1), vec![record("a", vec![1.0])]).unwrap();
        let mut b = bytes(&f);
        b.push(0);
        assert!(FeatureFile::read_from(b.as_slice()).is_err());
    }

    #[test]
    fn invalid_records_report_index() {
        let dup = FeatureFile::new(header(1), vec![record("a", vec![1.0]), record("a", vec![2.0])]);
        assert!(matches!(dup, Err(Error::FeatureRecord { index: 1, .. })));
        let nan = FeatureFile::new(header(1), vec![record("a", vec![1.0]), record("b", vec![f32::NAN])]);
        assert!(matches!(nan, Err(Error::FeatureRecord { index: 1, .. })));
        let dim = FeatureFile::new(header(2), vec![record("a", vec![1.0])]);
        assert!(matches!(dim, Err(Error::FeatureRecord { index: 0, .. })));
    }

    #[test]
    fn reference_dimension_gives_3075_parameters() {
        let f = FeatureFile::new(header(1024), vec![record("a", vec![0.5; 1024])]).unwrap();
        let back = FeatureFile::read_from(bytes(&f).as_slice()).unwrap();
        assert_eq!(back.param_count(3), 3075);
    }

    #[test]
    fn decontextualized_means() {
        let recs = vec![
            record("a1", vec![1.0, 2.0]),
            record("b1", vec![4.0, -4.0]),
            record("b2", vec![-4.0, 4.0]),
            record("c1", vec![1.0, 0.0]),
            record("c2", vec![2.0, 3.0]),
            record("c3", vec![6.0, -6.0]),
        ];
        let verb_of: HashMap<String, String> = [
            ("a1", "a"),
            ("b1", "b"),
            ("b2", "b"),
            ("c1", "c"),
            ("c2", "c"),
            ("c3", "c"),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        let out = decontextualize_embeddings(&recs, &verb_of).unwrap();
        assert_eq!(out[0].vector, vec![1.0, 2.0]);
        assert_eq!(out[1].vector, vec![0.0, 0.0]);
        assert_eq!(out[2].vector, vec![3.0, -1.0]);
    }

    #[test]
    fn feature_set_refuses_mixed_encoders() {
        let a = FeatureFile::new(header(1), vec![record("a", vec![1.0])]).unwrap();
        let mut h = header(1);
        h.encoder = "other".into();
        h.language = Language::new("es").unwrap();
        let b = FeatureFile::new(
            h,
            vec![FeatureRecord {
                key: "b".into(),
                language: Language::new("es").unwrap(),
                vector: vec![2.0],
            }],
        )
        .unwrap();
        assert!(FeatureSet::from_files([&a, &b]).is_err());
    }

    #[test]
    fn feature_set_pools_languages() {
        let a = FeatureFile::new(header(1), vec![record("a", vec![1.0])]).unwrap();
        let mut h = header(1);
        h.language = Language::new("ru").unwrap();
        let b = FeatureFile::new(
            h,
            vec![FeatureRecord {
                key: "b".into(),
                language: Language::new("ru").unwrap(),
                vector: vec![2.0],
            }],
        )
        .unwrap();
        let set = FeatureSet::from_files([&a, &b]).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.get("b").unwrap().language.as_str(), "ru");
    }
}
