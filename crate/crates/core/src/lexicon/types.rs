use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Score at or beyond which an aggregated connotation is polar.
pub const POLAR_THRESHOLD: f64 = 0.35;

// Absorbs rounding in means such as 7/20 so that the closed boundary holds.
const BOUNDARY_EPS: f64 = 1e-12;

/// One of the four connotation-frame questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Power,
    Agency,
    SentSubj,
    SentObj,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Power,
        Dimension::Agency,
        Dimension::SentSubj,
        Dimension::SentObj,
    ];

    /// Dimensions scored on corpus entities. Object sentiment is left out since
    /// only subject-slot mentions are scored.
    pub const ENTITY: [Dimension; 3] = [Dimension::SentSubj, Dimension::Power, Dimension::Agency];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Power => "power",
            Dimension::Agency => "agency",
            Dimension::SentSubj => "sent_subj",
            Dimension::SentObj => "sent_obj",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        match norm.as_str() {
            "power" | "pow" => Ok(Dimension::Power),
            "agency" | "agen" => Ok(Dimension::Agency),
            "sentsubj" | "sentimentsubj" | "sentsubject" | "ssubj" => Ok(Dimension::SentSubj),
            "sentobj" | "sentimentobj" | "sentobject" | "sobj" => Ok(Dimension::SentObj),
            _ => Err(Error::UnknownDimension(s.to_string())),
        }
    }
}

/// ISO 639-1 language code, always two lowercase ASCII letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Language(String);

impl Language {
    pub fn new(code: &str) -> Result<Self> {
        let code = code.trim();
        if code.len() == 2 && code.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(Language(code.to_string()))
        } else {
            Err(Error::InvalidLanguage(code.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Language {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Language::new(&value)
    }
}

impl From<Language> for String {
    fn from(value: Language) -> Self {
        value.0
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Language::new(s)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgement {
    pub annotator_id: String,
    pub value: i8,
}

impl Judgement {
    pub fn new(annotator_id: impl Into<String>, value: i8) -> Result<Self> {
        let annotator_id = annotator_id.into();
        if annotator_id.is_empty() {
            return Err(Error::InvalidParameter("empty annotator id".into()));
        }
        if !(-1..=1).contains(&value) {
            return Err(Error::InvalidParameter(format!(
                "judgement value {value} outside {{-1, 0, 1}}"
            )));
        }
        Ok(Judgement {
            annotator_id,
            value,
        })
    }
}

/// Three-way connotation label. Ordering follows the numeric value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TernaryLabel {
    Negative = -1,
    Neutral = 0,
    Positive = 1,
}

impl TernaryLabel {
    pub const ALL: [TernaryLabel; 3] = [
        TernaryLabel::Negative,
        TernaryLabel::Neutral,
        TernaryLabel::Positive,
    ];

    /// Closed intervals on both polar sides: `score >= 0.35` is positive,
    /// `score <= -0.35` negative.
    pub fn from_score(score: f64) -> Self {
        if score >= POLAR_THRESHOLD - BOUNDARY_EPS {
            TernaryLabel::Positive
        } else if score <= -POLAR_THRESHOLD + BOUNDARY_EPS {
            TernaryLabel::Negative
        } else {
            TernaryLabel::Neutral
        }
    }

    pub fn value(self) -> i8 {
        self as i8
    }

    /// Class index used by the classifier: Negative 0, Neutral 1, Positive 2.
    pub fn index(self) -> usize {
        (self as i8 + 1) as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(TernaryLabel::Negative),
            1 => Some(TernaryLabel::Neutral),
            2 => Some(TernaryLabel::Positive),
            _ => None,
        }
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            -1 => Some(TernaryLabel::Negative),
            0 => Some(TernaryLabel::Neutral),
            1 => Some(TernaryLabel::Positive),
            _ => None,
        }
    }
}

impl fmt::Display for TernaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TernaryLabel::Negative => "negative",
            TernaryLabel::Neutral => "neutral",
            TernaryLabel::Positive => "positive",
        };
        f.write_str(s)
    }
}

/// A verb in one context sentence, annotated for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnotationInstance {
    pub instance_id: String,
    pub verb_lemma: String,
    pub context_sentence: String,
    pub verb_token_index: usize,
    pub language: Language,
    pub dimension: Dimension,
    pub judgements: Vec<Judgement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<TernaryLabel>,
}

impl ConnotationInstance {
    pub fn judgement_values(&self) -> impl Iterator<Item = i8> + '_ {
        self.judgements.iter().map(|j| j.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub language: Language,
    pub dimension: Dimension,
    pub instances: Vec<ConnotationInstance>,
    #[serde(default)]
    pub provenance: String,
}

impl Lexicon {
    pub fn new(language: Language, dimension: Dimension) -> Self {
        Lexicon {
            language,
            dimension,
            instances: Vec::new(),
            provenance: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Checks the shared language/dimension and unique-id invariants.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for inst in &self.instances {
            if inst.language != self.language || inst.dimension != self.dimension {
                return Err(Error::InvalidParameter(format!(
                    "instance {} is tagged {}/{} inside a {}/{} lexicon",
                    inst.instance_id, inst.language, inst.dimension, self.language, self.dimension
                )));
            }
            if !seen.insert(inst.instance_id.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate instance id {}",
                    inst.instance_id
                )));
            }
        }
        Ok(())
    }

    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.language, self.dimension)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let lex: Lexicon = serde_json::from_str(s)?;
        lex.validate()?;
        Ok(lex)
    }
}
