//! Pipeline configuration: a TOML file whose relative paths resolve against
//! the file's directory. Command-line flags override individual keys.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{weight_grid, EvalConfig, TrainConfig, DEFAULT_WEIGHT_VALUES};
use crate::corpus::{
    default_slope_grid, CorpusConfig, MentionConfig, RelationConfig, TupleConfig, DEFAULT_MIN_SENTENCES,
    DEFAULT_SIMILARITY_FLOOR,
};
use crate::error::{Error, Result};
use crate::lexicon::{DistanceMetric, Language};
use crate::scoring::{Facet, FacetConfig, OccupationGroup, DEFAULT_MIN_VERBS};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw judgement CSV.
    pub annotations: Option<PathBuf>,
    /// Feature files for annotation instances, keyed by instance id.
    pub features: Vec<PathBuf>,
    /// Per target language: features of the English translations of its
    /// instances, keyed by the original instance ids.
    pub translated_features: BTreeMap<String, PathBuf>,
    /// Per source language: verb translation table into English.
    pub translation_tables: BTreeMap<String, PathBuf>,
    pub corpus_dump: Option<PathBuf>,
    /// Feature files for corpus verbs.
    pub corpus_features: Vec<PathBuf>,
    pub exclusion_list: Option<PathBuf>,
}

impl Paths {
    fn all(&self) -> Vec<(&'static str, &PathBuf)> {
        let mut out = Vec::new();
        out.extend(self.annotations.iter().map(|p| ("paths.annotations", p)));
        out.extend(self.features.iter().map(|p| ("paths.features", p)));
        out.extend(self.translated_features.values().map(|p| ("paths.translated_features", p)));
        out.extend(self.translation_tables.values().map(|p| ("paths.translation_tables", p)));
        out.extend(self.corpus_dump.iter().map(|p| ("paths.corpus_dump", p)));
        out.extend(self.corpus_features.iter().map(|p| ("paths.corpus_features", p)));
        out.extend(self.exclusion_list.iter().map(|p| ("paths.exclusion_list", p)));
        out
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.annotations.iter_mut().for_each(fix);
        self.features.iter_mut().for_each(fix);
        self.translated_features.values_mut().for_each(fix);
        self.translation_tables.values_mut().for_each(fix);
        self.corpus_dump.iter_mut().for_each(fix);
        self.corpus_features.iter_mut().for_each(fix);
        self.exclusion_list.iter_mut().for_each(fix);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationSection {
    /// `interval` or `nominal`.
    pub alpha_metric: String,
}

impl Default for AnnotationSection {
    fn default() -> Self {
        AnnotationSection {
            alpha_metric: "interval".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub reg_strength: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    pub n_folds: usize,
    /// Values crossed over the three classes to form the class-weight grid.
    pub weight_values: Vec<f64>,
    /// Languages whose annotations train the scoring models; all configured
    /// languages when empty.
    pub train_languages: Vec<String>,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        ClassifierSection {
            reg_strength: t.reg_strength,
            max_iter: t.max_iter,
            tolerance: t.tolerance,
            n_folds: 5,
            weight_values: DEFAULT_WEIGHT_VALUES.to_vec(),
            train_languages: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub min_sentences: usize,
    pub match_surname: bool,
    pub subject_relations: Vec<String>,
    pub object_relations: Vec<String>,
    pub slope_grid: Vec<f64>,
    pub pivot: Option<f64>,
    pub similarity_floor: f64,
    pub k_verbs: usize,
    pub k_contexts: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        let r = RelationConfig::default();
        let t = TupleConfig::default();
        CorpusSection {
            min_sentences: DEFAULT_MIN_SENTENCES,
            match_surname: true,
            subject_relations: r.subject,
            object_relations: r.object,
            slope_grid: default_slope_grid(),
            pivot: None,
            similarity_floor: DEFAULT_SIMILARITY_FLOOR,
            k_verbs: t.k_verbs,
            k_contexts: t.k_contexts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringSection {
    pub min_verbs: usize,
    pub facets: Vec<String>,
    pub nationality_reference: String,
    pub birth_year_edges: Vec<i32>,
    pub occupation_groups: Vec<OccupationGroup>,
    pub imbalance_k: usize,
}

impl Default for ScoringSection {
    fn default() -> Self {
        let f = FacetConfig::default();
        ScoringSection {
            min_verbs: DEFAULT_MIN_VERBS,
            facets: ["all", "nationality", "birth_year", "occupation"].map(String::from).to_vec(),
            nationality_reference: f.nationality_reference,
            birth_year_edges: f.birth_year_edges,
            occupation_groups: f.occupation_groups,
            imbalance_k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub languages: Vec<String>,
    pub output_dir: PathBuf,
    pub paths: Paths,
    pub annotation: AnnotationSection,
    pub classifier: ClassifierSection,
    pub corpus: CorpusSection,
    pub scoring: ScoringSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            languages: ["en", "es", "ru"].map(String::from).to_vec(),
            output_dir: PathBuf::from("caa-out"),
            paths: Paths::default(),
            annotation: AnnotationSection::default(),
            classifier: ClassifierSection::default(),
            corpus: CorpusSection::default(),
            scoring: ScoringSection::default(),
        }
    }
}

impl PipelineConfig {
    /// Parses TOML text; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))?;
        cfg.paths.resolve(base);
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Canonical TOML rendering, used for hashing.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks everything at once and lists every problem found.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.languages.is_empty() {
            problems.push("languages: at least one language is required".to_string());
        }
        for l in self.languages.iter().chain(&self.classifier.train_languages) {
            if Language::new(l).is_err() {
                problems.push(format!("languages: {l:?} is not a two-letter lowercase code"));
            }
        }
        for l in self.paths.translated_features.keys().chain(self.paths.translation_tables.keys()) {
            if Language::new(l).is_err() {
                problems.push(format!("paths: key {l:?} is not a language code"));
            }
        }
        for (key, p) in self.paths.all() {
            if !p.exists() {
                problems.push(format!("{key}: {} does not exist", p.display()));
            }
        }
        if self.parse_metric().is_err() {
            problems.push(format!(
                "annotation.alpha_metric: {:?} is not interval or nominal",
                self.annotation.alpha_metric
            ));
        }
        let c = &self.classifier;
        if !(c.reg_strength.is_finite() && c.reg_strength >= 0.0) {
            problems.push(format!("classifier.reg_strength: {} must be >= 0", c.reg_strength));
        }
        if c.max_iter == 0 {
            problems.push("classifier.max_iter: must be positive".into());
        }
        if !(c.tolerance.is_finite() && c.tolerance > 0.0) {
            problems.push(format!("classifier.tolerance: {} must be > 0", c.tolerance));
        }
        if c.n_folds < 3 {
            problems.push(format!("classifier.n_folds: {} must be at least 3", c.n_folds));
        }
        if c.weight_values.is_empty() || c.weight_values.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            problems.push("classifier.weight_values: need one or more positive values".into());
        }
        let k = &self.corpus;
        if k.slope_grid.is_empty() {
            problems.push("corpus.slope_grid: must not be empty".into());
        }
        if let Some(s) = k.slope_grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            problems.push(format!("corpus.slope_grid: {s} is outside [0, 1]"));
        }
        if let Some(p) = k.pivot.filter(|p| !(p.is_finite() && *p > 0.0)) {
            problems.push(format!("corpus.pivot: {p} must be positive"));
        }
        if k.subject_relations.is_empty() {
            problems.push("corpus.subject_relations: must not be empty".into());
        }
        for f in &self.scoring.facets {
            if f.parse::<Facet>().is_err() {
                problems.push(format!("scoring.facets: unknown facet {f:?}"));
            }
        }
        if !self.scoring.birth_year_edges.windows(2).all(|w| w[0] < w[1]) {
            problems.push("scoring.birth_year_edges: must be strictly increasing".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn languages(&self) -> Result<Vec<Language>> {
        self.languages.iter().map(|l| Language::new(l)).collect()
    }

    pub fn train_languages(&self) -> Result<Vec<Language>> {
        if self.classifier.train_languages.is_empty() {
            self.languages()
        } else {
            self.classifier.train_languages.iter().map(|l| Language::new(l)).collect()
        }
    }

    pub fn parse_metric(&self) -> Result<DistanceMetric> {
        match self.annotation.alpha_metric.as_str() {
            "interval" => Ok(DistanceMetric::Interval),
            "nominal" => Ok(DistanceMetric::Nominal),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        let c = &self.classifier;
        EvalConfig {
            n_folds: c.n_folds,
            seed: self.seed,
            train: TrainConfig {
                reg_strength: c.reg_strength,
                max_iter: c.max_iter,
                tolerance: c.tolerance,
            },
            grid: weight_grid(&c.weight_values),
        }
    }

    pub fn mention_config(&self) -> MentionConfig {
        MentionConfig {
            relations: RelationConfig {
                subject: self.corpus.subject_relations.clone(),
                object: self.corpus.object_relations.clone(),
            },
            match_surname: self.corpus.match_surname,
            ..MentionConfig::default()
        }
    }

    pub fn corpus_config(&self) -> Result<CorpusConfig> {
        Ok(CorpusConfig {
            languages: self.languages()?,
            min_sentences: self.corpus.min_sentences,
            mentions: self.mention_config(),
            slope_grid: self.corpus.slope_grid.clone(),
            pivot: self.corpus.pivot,
            similarity_floor: self.corpus.similarity_floor,
        })
    }

    pub fn facet_config(&self) -> FacetConfig {
        FacetConfig {
            nationality_reference: self.scoring.nationality_reference.clone(),
            birth_year_edges: self.scoring.birth_year_edges.clone(),
            occupation_groups: self.scoring.occupation_groups.clone(),
            other_occupation: FacetConfig::default().other_occupation,
        }
    }

    pub fn facets(&self) -> Result<Vec<Facet>> {
        self.scoring.facets.iter().map(|f| f.parse()).collect()
    }
}
