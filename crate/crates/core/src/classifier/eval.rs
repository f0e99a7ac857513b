//! Cross-validated evaluation regimes: in-language, cross-language,
//! augmented training and machine-translated test sentences.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledSet;
use super::folds::FoldPlan;
use super::metrics::{classification_report, ClassScores};
use super::model::{train, ModelMetadata, TrainConfig, TrainedConnotationModel, TrainingData};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::lexicon::{Dimension, Language, TernaryLabel};
use crate::stats::{paired_ttest, PairedTTest};

pub const DEFAULT_WEIGHT_VALUES: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Full cross product of `values` over the three classes, in lexicographic
/// order.
pub fn weight_grid(values: &[f64]) -> Vec<[f64; 3]> {
    let mut grid = Vec::with_capacity(values.len().pow(3));
    for &a in values {
        for &b in values {
            for &c in values {
                grid.push([a, b, c]);
            }
        }
    }
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite weights"));
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub n_folds: usize,
    pub seed: u64,
    pub train: TrainConfig,
    pub grid: Vec<[f64; 3]>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_folds: 5,
            seed: 0,
            train: TrainConfig::default(),
            grid: weight_grid(&DEFAULT_WEIGHT_VALUES),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: [f64; 3],
    pub best_f1: f64,
    pub scores: Vec<([f64; 3], f64)>,
}

/// Picks the class-weight triple with the highest dev macro F1. Ties go to
/// the lexicographically smallest triple.
pub fn grid_search_class_weights(
    train_set: &LabeledSet,
    dev: &LabeledSet,
    grid: &[[f64; 3]],
    cfg: &TrainConfig,
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty class-weight grid".into()));
    }
    let scores: Vec<([f64; 3], f64)> = grid
        .par_iter()
        .map(|&weights| {
            let (model, _) = train(
                TrainingData {
                    x: train_set.view(),
                    labels: &train_set.labels,
                    sample_weights: None,
                },
                train_set.dimension,
                weights,
                cfg,
                ModelMetadata::default(),
            )?;
            let pred = model.predict_batch(dev.view());
            let f1 = classification_report(&pred, &dev.labels)?.macro_f1;
            Ok((weights, f1))
        })
        .collect::<Result<_>>()?;

    let mut best = scores[0];
    for &(w, f1) in &scores[1..] {
        let better = f1 > best.1
            || (f1 == best.1 && w.partial_cmp(&best.0) == Some(std::cmp::Ordering::Less));
        if better {
            best = (w, f1);
        }
    }
    Ok(GridSearchResult {
        best: best.0,
        best_f1: best.1,
        scores,
    })
}

/// Tunes class weights on `dev`, then fits on `train_set` with the winner.
pub fn fit_tuned(
    train_set: &LabeledSet,
    dev: &LabeledSet,
    cfg: &EvalConfig,
    metadata: ModelMetadata,
) -> Result<TrainedConnotationModel> {
    let search = grid_search_class_weights(train_set, dev, &cfg.grid, &cfg.train)?;
    let (model, _) = train(
        TrainingData {
            x: train_set.view(),
            labels: &train_set.labels,
            sample_weights: None,
        },
        train_set.dimension,
        search.best,
        &cfg.train,
        ModelMetadata {
            seed: cfg.seed,
            ..metadata
        },
    )?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub target: Language,
    pub sources: Vec<Language>,
    pub dimension: Dimension,
    pub seed: u64,
    pub fold_f1: Vec<f64>,
    pub mean_f1: f64,
    /// Per-class scores averaged over folds.
    pub per_class: [ClassScores; 3],
    pub class_weights: Vec<[f64; 3]>,
}

struct FoldScore {
    f1: f64,
    per_class: [ClassScores; 3],
    weights: [f64; 3],
}

fn summarise(
    target: &LabeledSet,
    sources: Vec<Language>,
    seed: u64,
    folds: Vec<FoldScore>,
) -> EvalResult {
    let n = folds.len() as f64;
    let mut per_class = [ClassScores::default(); 3];
    for f in &folds {
        for c in 0..3 {
            per_class[c].precision += f.per_class[c].precision / n;
            per_class[c].recall += f.per_class[c].recall / n;
            per_class[c].f1 += f.per_class[c].f1 / n;
        }
    }
    let fold_f1: Vec<f64> = folds.iter().map(|f| f.f1).collect();
    EvalResult {
        target: target.language.clone(),
        sources,
        dimension: target.dimension,
        seed,
        mean_f1: fold_f1.iter().sum::<f64>() / n,
        fold_f1,
        per_class,
        class_weights: folds.iter().map(|f| f.weights).collect(),
    }
}

fn score_fold(model: &TrainedConnotationModel, x: ndarray::ArrayView2<f64>, gold: &[TernaryLabel]) -> Result<FoldScore> {
    let pred = model.predict_batch(x);
    let report = classification_report(&pred, gold)?;
    Ok(FoldScore {
        f1: report.macro_f1,
        per_class: report.per_class,
        weights: model.class_weights,
    })
}

fn check_compatible(target: &LabeledSet, other: &LabeledSet) -> Result<()> {
    if target.dimension != other.dimension {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: {} vs {}",
            target.dimension, other.dimension
        )));
    }
    if !other.is_empty() && target.dim() != other.dim() {
        return Err(Error::InvalidParameter(format!(
            "feature dimension mismatch: {} vs {}",
            target.dim(),
            other.dim()
        )));
    }
    Ok(())
}

/// Trains on the source language's train split (tuning on the source dev
/// split) and tests on the target's test split, fold by fold.
pub fn run_single_language_eval(
    target: &LabeledSet,
    source: &LabeledSet,
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    if target.is_empty() || source.is_empty() {
        return Err(Error::InsufficientData(format!(
            "missing data for {} or {}",
            target.language, source.language
        )));
    }
    check_compatible(target, source)?;
    let target_plan = FoldPlan::new(&target.keys, cfg.n_folds, cfg.seed)?;
    let source_plan = FoldPlan::new(&source.keys, cfg.n_folds, cfg.seed)?;
    let mut folds = Vec::with_capacity(cfg.n_folds);
    for k in 0..cfg.n_folds {
        let sf = &source_plan.folds[k];
        let model = fit_tuned(
            &source.subset(&sf.train)?,
            &source.subset(&sf.dev)?,
            cfg,
            ModelMetadata {
                languages: vec![source.language.clone()],
                fold: Some(k),
                ..Default::default()
            },
        )?;
        let test = target.subset(&target_plan.folds[k].test)?;
        folds.push(score_fold(&model, test.view(), &test.labels)?);
    }
    Ok(summarise(target, vec![source.language.clone()], cfg.seed, folds))
}

/// Trains on the target's train split plus each added language's own train
/// split; tunes and tests on the target's dev and test splits.
pub fn run_augmented_eval(
    target: &LabeledSet,
    added: &[&LabeledSet],
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    if target.is_empty() {
        return Err(Error::InsufficientData(format!("no data for {}", target.language)));
    }
    for a in added {
        check_compatible(target, a)?;
    }
    let target_plan = FoldPlan::new(&target.keys, cfg.n_folds, cfg.seed)?;
    let added_plans: Vec<FoldPlan> = added
        .iter()
        .map(|a| FoldPlan::new(&a.keys, cfg.n_folds, cfg.seed))
        .collect::<Result<_>>()?;

    let mut languages = vec![target.language.clone()];
    languages.extend(added.iter().filter(|a| !a.is_empty()).map(|a| a.language.clone()));

    let mut folds = Vec::with_capacity(cfg.n_folds);
    for k in 0..cfg.n_folds {
        let tf = &target_plan.folds[k];
        let mut parts = vec![target.subset(&tf.train)?];
        for (a, plan) in added.iter().zip(&added_plans) {
            if !a.is_empty() {
                parts.push(a.subset(&plan.folds[k].train)?);
            }
        }
        let refs: Vec<&LabeledSet> = parts.iter().collect();
        let train_set = LabeledSet::concat(&refs)?;
        let model = fit_tuned(
            &train_set,
            &target.subset(&tf.dev)?,
            cfg,
            ModelMetadata {
                languages: languages.clone(),
                fold: Some(k),
                ..Default::default()
            },
        )?;
        let test = target.subset(&tf.test)?;
        folds.push(score_fold(&model, test.view(), &test.labels)?);
    }
    Ok(summarise(target, languages, cfg.seed, folds))
}

/// One tuned model per fold of `source`'s own plan.
pub fn train_fold_models(source: &LabeledSet, cfg: &EvalConfig) -> Result<Vec<TrainedConnotationModel>> {
    let plan = FoldPlan::new(&source.keys, cfg.n_folds, cfg.seed)?;
    plan.folds
        .iter()
        .enumerate()
        .map(|(k, f)| {
            fit_tuned(
                &source.subset(&f.train)?,
                &source.subset(&f.dev)?,
                cfg,
                ModelMetadata {
                    languages: vec![source.language.clone()],
                    fold: Some(k),
                    ..Default::default()
                },
            )
        })
        .collect()
}

/// Model for scoring new text: class weights are tuned on the first fold's
/// train/dev split, then the model is refit on every example.
pub fn train_final_model(
    set: &LabeledSet,
    cfg: &EvalConfig,
    metadata: ModelMetadata,
) -> Result<(TrainedConnotationModel, GridSearchResult)> {
    let plan = FoldPlan::new(&set.keys, cfg.n_folds, cfg.seed)?;
    let f = &plan.folds[0];
    let search = grid_search_class_weights(&set.subset(&f.train)?, &set.subset(&f.dev)?, &cfg.grid, &cfg.train)?;
    let (model, _) = train(
        TrainingData {
            x: set.view(),
            labels: &set.labels,
            sample_weights: None,
        },
        set.dimension,
        search.best,
        &cfg.train,
        ModelMetadata {
            seed: cfg.seed,
            ..metadata
        },
    )?;
    Ok((model, search))
}

/// Scores per-fold English models on the target's test sentences, using the
/// features of their translations (keyed by the target instance ids).
pub fn run_mt_eval(
    target: &LabeledSet,
    translated: &FeatureSet,
    english_models: &[TrainedConnotationModel],
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    if english_models.len() != cfg.n_folds {
        return Err(Error::InvalidParameter(format!(
            "{} fold models for {} folds",
            english_models.len(),
            cfg.n_folds
        )));
    }
    let plan = FoldPlan::new(&target.keys, cfg.n_folds, cfg.seed)?;
    let sources = english_models[0].metadata.languages.clone();
    let mut folds = Vec::with_capacity(cfg.n_folds);
    for (k, model) in english_models.iter().enumerate() {
        let test_keys = &plan.folds[k].test;
        if translated.dim != model.dim() {
            return Err(Error::InvalidParameter(format!(
                "translated features have dimension {}, model expects {}",
                translated.dim,
                model.dim()
            )));
        }
        let mut rows = Vec::with_capacity(test_keys.len() * translated.dim);
        let mut missing = Vec::new();
        for key in test_keys {
            match translated.get(key) {
                Some(r) => rows.extend(r.vector.iter().map(|&v| f64::from(v))),
                None => missing.push(key.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::KeyMismatch(format!(
                "{} test instances lack translated features (e.g. {})",
                missing.len(),
                missing[0]
            )));
        }
        let x = Array2::from_shape_vec((test_keys.len(), translated.dim), rows)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let gold = target.subset(test_keys)?.labels;
        folds.push(score_fold(model, x.view(), &gold)?);
    }
    Ok(summarise(target, sources, cfg.seed, folds))
}

/// Two-sided paired t-test over per-fold macro F1 of two runs on the same
/// fold plan.
pub fn paired_fold_ttest(a: &EvalResult, b: &EvalResult) -> Result<PairedTTest> {
    if a.fold_f1.len() != b.fold_f1.len() || a.seed != b.seed || a.target != b.target {
        return Err(Error::InvalidParameter(
            "results do not share a fold plan (target, seed and fold count must match)".into(),
        ));
    }
    paired_ttest(&a.fold_f1, &b.fold_f1)
}

fn join_languages(langs: &[Language]) -> String {
    langs.iter().map(Language::as_str).collect::<Vec<_>>().join("+")
}

/// `target,sources,dimension,fold,macro_f1` rows, one per fold plus a
/// `mean` row per result.
pub fn eval_csv(results: &[EvalResult]) -> String {
    let mut out = String::from("target,sources,dimension,fold,macro_f1\n");
    for r in results {
        let sources = join_languages(&r.sources);
        for (k, f1) in r.fold_f1.iter().enumerate() {
            out.push_str(&format!("{},{},{},{},{}\n", r.target, sources, r.dimension, k, f1));
        }
        out.push_str(&format!("{},{},{},mean,{}\n", r.target, sources, r.dimension, r.mean_f1));
    }
    out
}
