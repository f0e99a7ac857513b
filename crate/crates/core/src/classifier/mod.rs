//! Class-weighted three-class logistic regression over contextual
//! embeddings, with the cross-validated evaluation harness.

mod dataset;
mod eval;
mod folds;
mod io;
mod metrics;
mod model;

pub use dataset::LabeledSet;
pub use eval::{
    eval_csv, fit_tuned, grid_search_class_weights, paired_fold_ttest, run_augmented_eval,
    run_mt_eval, run_single_language_eval, train_final_model, train_fold_models, weight_grid, EvalConfig, EvalResult,
    GridSearchResult, DEFAULT_WEIGHT_VALUES,
};
pub use folds::{Fold, FoldPlan};
pub use io::{load_model, read_model, save_model, write_model};
pub use metrics::{
    classification_report, macro_f1, majority_baseline_f1, majority_label, ClassScores,
    ClassificationReport,
};
pub use model::{
    argmax, train, FitReport, ModelMetadata, TrainConfig, TrainedConnotationModel, TrainingData,
    WeightedSoftmaxObjective, N_CLASSES,
};
