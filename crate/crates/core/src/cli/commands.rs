use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use super::Command;
use crate::classifier::{
    eval_csv, load_model, run_augmented_eval, run_mt_eval, run_single_language_eval, save_model, train_final_model,
    train_fold_models, EvalResult, LabeledSet, ModelMetadata,
};
use crate::config::PipelineConfig;
use crate::context::{context_loss, decontextualize, translation_loss, TranslationTable};
use crate::corpus::{
    filter_corpus, match_corpus, matching_csv, read_dump, read_matching_csv, write_dump, BiographyEntry,
    ExclusionList, Group,
};
use crate::error::{Error, Result};
use crate::features::{read_features, write_export_requests, FeatureFile, FeatureSet};
use crate::lexicon::{
    aggregate_and_ternarize, filter_annotators, ingest_file, krippendorff_alpha, pairwise_agreement, read_lexicons,
    write_lexicons, Dimension, DistanceMetric, JudgementMapping, Language, Lexicon,
};
use crate::manifest::{config_hash, csv_preamble, RunManifest};
use crate::scoring::{
    rank_imbalance, score_corpus, subgroup_report, to_csv_string, ModelSet, ScoreTable, SCORED_DIMENSIONS,
};

const RAW_LEXICONS: &str = "lexicons/raw";
const FILTERED_LEXICONS: &str = "lexicons/filtered";
const AGGREGATED_LEXICONS: &str = "lexicons/aggregated";
const MODELS: &str = "models";
const FILTERED_CORPUS: &str = "corpus/filtered.jsonl";
const MATCHING: &str = "matching.csv";
const SCORES: &str = "scores.csv";

pub(super) fn apply_command_overrides(cfg: &mut PipelineConfig, command: &Command) {
    match command {
        Command::Ingest {
            annotations: Some(p),
        } => cfg.paths.annotations = Some(p.clone()),
        Command::Train {
            train_languages: Some(l),
        } => cfg.classifier.train_languages = l.clone(),
        Command::BuildCorpus { dump: Some(p) } => cfg.paths.corpus_dump = Some(p.clone()),
        Command::Report {
            min_verbs: Some(n),
        } => cfg.scoring.min_verbs = *n,
        Command::RankImbalance { k: Some(k), .. } => cfg.scoring.imbalance_k = *k,
        _ => {}
    }
}

/// Shared state of one command run.
struct Run {
    cfg: PipelineConfig,
    hash: String,
    out: PathBuf,
    manifest: RunManifest,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    seed: u64,
    data: &'a T,
}

impl Run {
    fn new(command: &str, cfg: PipelineConfig) -> Result<Self> {
        let out = cfg.output_dir.clone();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Run {
            hash: config_hash(&cfg),
            manifest: RunManifest::new(command, &cfg),
            cfg,
            out,
        })
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn write_file(&mut self, rel: &str, body: &[u8]) -> Result<PathBuf> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        self.manifest.add_output(&self.out, &path)?;
        Ok(path)
    }

    /// CSV with the config hash and seed as a leading comment line.
    fn write_csv(&mut self, rel: &str, body: &str) -> Result<PathBuf> {
        let text = csv_preamble(&self.hash, self.cfg.seed) + body;
        self.write_file(rel, text.as_bytes())
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, data: &T) -> Result<PathBuf> {
        let stamped = Stamped {
            config_hash: &self.hash,
            seed: self.cfg.seed,
            data,
        };
        let text = serde_json::to_string_pretty(&stamped)? + "\n";
        self.write_file(rel, text.as_bytes())
    }

    fn write_lexicons(&mut self, rel: &str, lexicons: &[Lexicon]) -> Result<()> {
        let stamped: Vec<Lexicon> = lexicons
            .iter()
            .map(|l| {
                let mut l = l.clone();
                l.provenance = format!("{}; config_hash={}", l.provenance, self.hash);
                l
            })
            .collect();
        let dir = self.path(rel);
        for p in write_lexicons(&dir, &stamped)? {
            self.manifest.add_output(&self.out, &p)?;
        }
        Ok(())
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_input(&self.out, path)
    }

    /// An earlier stage's output; a missing file names that stage.
    fn stage_input(&mut self, rel: &str, stage: &str) -> Result<PathBuf> {
        let path = self.path(rel);
        if !path.exists() {
            return Err(Error::MissingStage {
                stage: stage.to_string(),
                detail: format!("{} not found; run `caa {stage}` first", path.display()),
            });
        }
        self.input(&path)?;
        Ok(path)
    }

    fn finish(self) -> Result<()> {
        let path = self.manifest.write(&self.out)?;
        info!("manifest written to {}", path.display());
        Ok(())
    }

    fn languages(&self) -> Result<Vec<Language>> {
        self.cfg.languages()
    }

    fn lexicons(&mut self, rel: &str, stage: &str) -> Result<Vec<Lexicon>> {
        let dir = self.stage_input(rel, stage)?;
        let langs: HashSet<Language> = self.languages()?.into_iter().collect();
        Ok(read_lexicons(&dir)?
            .into_iter()
            .filter(|l| langs.contains(&l.language))
            .collect())
    }

    fn feature_set(&mut self, paths: &[PathBuf], key: &str) -> Result<FeatureSet> {
        if paths.is_empty() {
            return Err(Error::Config(vec![format!("{key} must list at least one feature file")]));
        }
        let mut files: Vec<FeatureFile> = Vec::new();
        for p in paths {
            self.input(p)?;
            files.push(read_features(p)?);
        }
        FeatureSet::from_files(&files)
    }

    fn filtered_corpus(&mut self) -> Result<Vec<BiographyEntry>> {
        let path = self.stage_input(FILTERED_CORPUS, "build-corpus")?;
        read_dump(&path)
    }
}

pub(super) fn dispatch(cfg: PipelineConfig, command: Command) -> Result<()> {
    match command {
        Command::Ingest { .. } => ingest(cfg),
        Command::Aggregate => aggregate(cfg),
        Command::Agreement => agreement(cfg),
        Command::ContextLoss => context_loss_cmd(cfg),
        Command::TranslationLoss => translation_loss_cmd(cfg),
        Command::Train { .. } => train_cmd(cfg),
        Command::Eval {
            target,
            source,
            dimension,
        } => {
            let source = source.unwrap_or_else(|| target.clone());
            eval_cmd(cfg, EvalKind::Single { source }, &target, dimension)
        }
        Command::MtEval {
            target,
            source,
            dimension,
        } => eval_cmd(cfg, EvalKind::Translated { source }, &target, dimension),
        Command::AugmentEval {
            target,
            add,
            dimension,
        } => eval_cmd(cfg, EvalKind::Augmented { add }, &target, dimension),
        Command::BuildCorpus { .. } => build_corpus(cfg),
        Command::Match => match_cmd(cfg),
        Command::Score => score_cmd(cfg),
        Command::Report { .. } => report_cmd(cfg),
        Command::RankImbalance {
            language_a,
            language_b,
            dimension,
            include_controls,
            ..
        } => rank_cmd(cfg, &language_a, &language_b, &dimension, include_controls),
    }
}

fn ingest(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("ingest", cfg)?;
    let path = run
        .cfg
        .paths
        .annotations
        .clone()
        .ok_or_else(|| Error::Config(vec!["paths.annotations is required for ingest".into()]))?;
    run.input(&path)?;
    let langs: HashSet<Language> = run.languages()?.into_iter().collect();
    let lexicons: Vec<Lexicon> = ingest_file(&path, &JudgementMapping::default())?
        .into_iter()
        .filter(|l| langs.contains(&l.language))
        .collect();
    let (filtered, report) = filter_annotators(&lexicons);
    run.write_lexicons(RAW_LEXICONS, &lexicons)?;
    run.write_lexicons(FILTERED_LEXICONS, &filtered)?;
    run.write_json("annotator_report.json", &report)?;
    println!(
        "ingested {} lexicons; removed {} of {} annotators ({:.1}%), dropped {} instances",
        lexicons.len(),
        report.removed_annotators.len(),
        report.annotators.len(),
        100.0 * report.removed_fraction(),
        report.dropped_instances.len()
    );
    run.finish()
}

fn aggregate(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("aggregate", cfg)?;
    let lexicons = run.lexicons(FILTERED_LEXICONS, "ingest")?;
    let aggregated: Vec<Lexicon> = lexicons.iter().map(aggregate_and_ternarize).collect::<Result<_>>()?;
    run.write_lexicons(AGGREGATED_LEXICONS, &aggregated)?;
    for l in &aggregated {
        println!("{} {}: {} instances", l.language, l.dimension, l.len());
    }
    run.finish()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn agreement(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("agreement", cfg)?;
    let lexicons = run.lexicons(FILTERED_LEXICONS, "ingest")?;
    let primary = run.cfg.parse_metric()?;
    let mut body = String::from(
        "language,dimension,n_instances,alpha,alpha_interval,alpha_nominal,alpha_degenerate,pairwise,pairwise_lenient\n",
    );
    let mut per_language: BTreeMap<Language, Vec<[Option<f64>; 5]>> = BTreeMap::new();
    for l in &lexicons {
        let interval = krippendorff_alpha(l, DistanceMetric::Interval).ok();
        let nominal = krippendorff_alpha(l, DistanceMetric::Nominal).ok();
        let main = if primary == DistanceMetric::Interval { interval } else { nominal };
        let strict = pairwise_agreement(l, false).ok();
        let lenient = pairwise_agreement(l, true).ok();
        let row = [
            main.map(|a| a.value),
            interval.map(|a| a.value),
            nominal.map(|a| a.value),
            strict,
            lenient,
        ];
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            l.language,
            l.dimension,
            l.len(),
            fmt_opt(row[0]),
            fmt_opt(row[1]),
            fmt_opt(row[2]),
            main.is_some_and(|a| a.degenerate),
            fmt_opt(row[3]),
            fmt_opt(row[4])
        ));
        per_language.entry(l.language.clone()).or_default().push(row);
    }
    // Averages over the tasks of each language.
    for (lang, rows) in &per_language {
        let mean = |i: usize| -> Option<f64> {
            let vals: Vec<f64> = rows.iter().filter_map(|r| r[i]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        body.push_str(&format!(
            "{},mean,,{},{},{},,{},{}\n",
            lang,
            fmt_opt(mean(0)),
            fmt_opt(mean(1)),
            fmt_opt(mean(2)),
            fmt_opt(mean(3)),
            fmt_opt(mean(4))
        ));
        println!("{lang}: mean alpha {}, mean lenient pairwise {}", fmt_opt(mean(0)), fmt_opt(mean(4)));
    }
    run.write_csv("agreement.csv", &body)?;
    run.finish()
}

fn context_loss_cmd(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("context-loss", cfg)?;
    let lexicons = run.lexicons(AGGREGATED_LEXICONS, "aggregate")?;
    let mut body = String::from("language,dimension,n_verbs,context_loss_percent\n");
    for l in &lexicons {
        let n = decontextualize(l)?.len();
        let loss = context_loss(l)?;
        body.push_str(&format!("{},{},{},{}\n", l.language, l.dimension, n, loss));
        println!("{} {}: {:.1}% over {} verbs", l.language, l.dimension, loss, n);
    }
    run.write_csv("context_loss.csv", &body)?;
    run.finish()
}

fn translation_loss_cmd(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("translation-loss", cfg)?;
    let lexicons = run.lexicons(AGGREGATED_LEXICONS, "aggregate")?;
    let english = Language::new("en")?;
    let tables = run.cfg.paths.translation_tables.clone();
    let mut body = String::from("language,dimension,n_verbs,translation_loss_percent\n");
    for (lang, path) in &tables {
        let lang = Language::new(lang)?;
        run.input(path)?;
        let table = TranslationTable::from_path(path)?;
        if !table.rejected.is_empty() {
            warn!("{}: {} translation rows rejected", path.display(), table.rejected.len());
        }
        for source in lexicons.iter().filter(|l| l.language == lang) {
            let Some(en) = lexicons
                .iter()
                .find(|l| l.language == english && l.dimension == source.dimension)
            else {
                warn!("no English {} lexicon; skipping {lang}", source.dimension);
                continue;
            };
            let loss = translation_loss(source, en, &table)?;
            body.push_str(&format!("{},{},{},{}\n", lang, source.dimension, loss.n_verbs, loss.percent));
            println!("{} {}: {:.1}% over {} verbs", lang, source.dimension, loss.percent, loss.n_verbs);
        }
    }
    run.write_csv("translation_loss.csv", &body)?;
    run.finish()
}

fn labeled_sets(lexicons: &[Lexicon], features: &FeatureSet) -> Result<BTreeMap<(Language, Dimension), LabeledSet>> {
    lexicons
        .iter()
        .map(|l| Ok(((l.language.clone(), l.dimension), LabeledSet::from_lexicon(l, features)?)))
        .collect()
}

fn train_cmd(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("train", cfg)?;
    let lexicons = run.lexicons(AGGREGATED_LEXICONS, "aggregate")?;
    let feature_paths = run.cfg.paths.features.clone();
    let features = run.feature_set(&feature_paths, "paths.features")?;
    let languages = run.cfg.train_languages()?;
    let eval_cfg = run.cfg.eval_config();
    let sets = labeled_sets(&lexicons, &features)?;
    let mut summary = BTreeMap::new();
    for dim in SCORED_DIMENSIONS {
        let parts: Vec<&LabeledSet> = languages.iter().filter_map(|l| sets.get(&(l.clone(), dim))).collect();
        if parts.is_empty() {
            warn!("no {dim} training data for {languages:?}");
            continue;
        }
        let set = LabeledSet::concat(&parts)?;
        let (model, search) = train_final_model(
            &set,
            &eval_cfg,
            ModelMetadata {
                languages: parts.iter().map(|p| p.language.clone()).collect(),
                config_hash: Some(run.hash.clone()),
                ..Default::default()
            },
        )?;
        let path = run.path(&format!("{MODELS}/{dim}.caamodel"));
        std::fs::create_dir_all(run.path(MODELS)).map_err(|e| Error::io(run.path(MODELS), e))?;
        save_model(&model, &path)?;
        run.manifest.add_output(&run.out, &path)?;
        println!(
            "{dim}: {} examples, class weights {:?}, dev macro-F1 {:.3}",
            set.len(),
            search.best,
            search.best_f1
        );
        summary.insert(
            dim.to_string(),
            serde_json::json!({
                "n_examples": set.len(),
                "languages": model.metadata.languages,
                "class_weights": search.best,
                "dev_macro_f1": search.best_f1,
            }),
        );
    }
    if summary.is_empty() {
        return Err(Error::InsufficientData("no dimension had training data".into()));
    }
    run.write_json("models/training.json", &summary)?;
    run.finish()
}

enum EvalKind {
    Single { source: String },
    Translated { source: String },
    Augmented { add: Vec<String> },
}

fn eval_cmd(cfg: PipelineConfig, kind: EvalKind, target: &str, dimension: Option<String>) -> Result<()> {
    let name = match &kind {
        EvalKind::Single { .. } => "eval",
        EvalKind::Translated { .. } => "mt-eval",
        EvalKind::Augmented { .. } => "augment-eval",
    };
    let mut run = Run::new(name, cfg)?;
    let lexicons = run.lexicons(AGGREGATED_LEXICONS, "aggregate")?;
    let feature_paths = run.cfg.paths.features.clone();
    let features = run.feature_set(&feature_paths, "paths.features")?;
    let sets = labeled_sets(&lexicons, &features)?;
    let eval_cfg = run.cfg.eval_config();
    let target = Language::new(target)?;
    let dims: Vec<Dimension> = match dimension {
        Some(d) => vec![d.parse()?],
        None => Dimension::ALL.to_vec(),
    };
    let get = |lang: &Language, dim: Dimension| -> Result<&LabeledSet> {
        sets.get(&(lang.clone(), dim)).ok_or_else(|| Error::MissingStage {
            stage: "aggregate".into(),
            detail: format!("no aggregated {lang} {dim} lexicon"),
        })
    };

    let mut results: Vec<EvalResult> = Vec::new();
    let stem = match &kind {
        EvalKind::Single { source } => {
            let source = Language::new(source)?;
            for &dim in &dims {
                results.push(run_single_language_eval(get(&target, dim)?, get(&source, dim)?, &eval_cfg)?);
            }
            format!("eval/{target}_{source}")
        }
        EvalKind::Translated { source } => {
            let source = Language::new(source)?;
            let path = run
                .cfg
                .paths
                .translated_features
                .get(target.as_str())
                .cloned()
                .ok_or_else(|| Error::Config(vec![format!("paths.translated_features.{target} is not set")]))?;
            let translated = run.feature_set(&[path], "paths.translated_features")?;
            for &dim in &dims {
                let models = train_fold_models(get(&source, dim)?, &eval_cfg)?;
                results.push(run_mt_eval(get(&target, dim)?, &translated, &models, &eval_cfg)?);
            }
            format!("mt_eval/{target}_{source}")
        }
        EvalKind::Augmented { add } => {
            let added: Vec<Language> = add.iter().map(|l| Language::new(l)).collect::<Result<_>>()?;
            for &dim in &dims {
                let parts: Vec<&LabeledSet> = added.iter().map(|l| get(l, dim)).collect::<Result<_>>()?;
                results.push(run_augmented_eval(get(&target, dim)?, &parts, &eval_cfg)?);
            }
            let joined: Vec<&str> = added.iter().map(Language::as_str).collect();
            format!("augment_eval/{target}_{}", joined.join("+"))
        }
    };
    for r in &results {
        let sources: Vec<&str> = r.sources.iter().map(Language::as_str).collect();
        println!("{} <- {} {}: mean macro-F1 {:.4}", r.target, sources.join("+"), r.dimension, r.mean_f1);
    }
    run.write_csv(&format!("{stem}.csv"), &eval_csv(&results))?;
    run.write_json(&format!("{stem}.json"), &results)?;
    run.finish()
}

fn build_corpus(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("build-corpus", cfg)?;
    let path = run
        .cfg
        .paths
        .corpus_dump
        .clone()
        .ok_or_else(|| Error::Config(vec!["paths.corpus_dump is required for build-corpus".into()]))?;
    run.input(&path)?;
    let entries = read_dump(&path)?;
    let corpus_cfg = run.cfg.corpus_config()?;
    let filtered = filter_corpus(&entries, &corpus_cfg);
    let mut kept: Vec<BiographyEntry> = filtered.treatment.iter().chain(&filtered.candidates).cloned().collect();
    kept.sort_by(|a, b| a.person_id.cmp(&b.person_id));

    let dump_path = run.path(FILTERED_CORPUS);
    std::fs::create_dir_all(run.path("corpus")).map_err(|e| Error::io(run.path("corpus"), e))?;
    write_dump(&dump_path, &kept)?;
    run.manifest.add_output(&run.out, &dump_path)?;

    let requests = crate::scoring::corpus_export_requests(&kept, &corpus_cfg.languages, &corpus_cfg.mentions);
    let req_path = run.path("corpus/export_requests.jsonl");
    write_export_requests(&req_path, &requests)?;
    run.manifest.add_output(&run.out, &req_path)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        n_input: usize,
        n_treatment: usize,
        n_candidates: usize,
        dropped: &'a [String],
        n_export_requests: usize,
    }
    run.write_json(
        "corpus/summary.json",
        &Summary {
            n_input: entries.len(),
            n_treatment: filtered.treatment.len(),
            n_candidates: filtered.candidates.len(),
            dropped: &filtered.dropped,
            n_export_requests: requests.len(),
        },
    )?;
    println!(
        "kept {} treatment and {} candidate entries of {}; {} verbs to export",
        filtered.treatment.len(),
        filtered.candidates.len(),
        entries.len(),
        requests.len()
    );
    run.finish()
}

fn match_cmd(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("match", cfg)?;
    let entries = run.filtered_corpus()?;
    let excluded = match run.cfg.paths.exclusion_list.clone() {
        Some(p) => {
            run.input(&p)?;
            ExclusionList::load(&p)?
        }
        None => {
            warn!("no exclusion list configured; all categories are used");
            ExclusionList::default()
        }
    };
    let corpus_cfg = run.cfg.corpus_config()?;
    let (treatment, candidates): (Vec<BiographyEntry>, Vec<BiographyEntry>) =
        entries.into_iter().partition(|e| e.group == Group::Treatment);
    let filtered = crate::corpus::FilteredCorpus {
        treatment,
        candidates,
        dropped: Vec::new(),
    };
    let outcome = match_corpus(&filtered, &excluded, &corpus_cfg)?;
    let t = &outcome.tuning;
    run.write_csv(MATCHING, &matching_csv(&outcome.pairs, t.slope, t.pivot))?;
    run.write_json("matching.json", &outcome)?;
    let below = outcome.pairs.iter().filter(|p| p.below_floor).count();
    println!(
        "matched {} pairs at slope {} (pivot {:.3}); {} below the similarity floor",
        outcome.pairs.len(),
        t.slope,
        t.pivot,
        below
    );
    run.finish()
}

fn load_models(run: &mut Run) -> Result<ModelSet> {
    let dir = run.stage_input(MODELS, "train")?;
    let mut models = ModelSet::new();
    for dim in SCORED_DIMENSIONS {
        let path = dir.join(format!("{dim}.caamodel"));
        if path.exists() {
            models.insert(dim, load_model(&path)?);
        }
    }
    if models.is_empty() {
        return Err(Error::MissingStage {
            stage: "train".into(),
            detail: format!("no models in {}", dir.display()),
        });
    }
    Ok(models)
}

fn score_cmd(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("score", cfg)?;
    let entries = run.filtered_corpus()?;
    let models = load_models(&mut run)?;
    let feature_paths = run.cfg.paths.corpus_features.clone();
    let features = run.feature_set(&feature_paths, "paths.corpus_features")?;
    let languages = run.languages()?;
    let table = score_corpus(&entries, &languages, &models, &features, &run.cfg.mention_config())?;
    run.write_csv(SCORES, &table.to_csv()?)?;
    run.write_json("score_summary.json", &table.unscored)?;
    println!(
        "scored {} (person, language) pairs; {} without subject verbs",
        table.scores.len() / models.len(),
        table.unscored.len()
    );
    run.finish()
}

fn read_scores(run: &mut Run) -> Result<ScoreTable> {
    let path = run.stage_input(SCORES, "score")?;
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let table = ScoreTable::from_csv(&text)?;
    if table.is_empty() {
        return Err(Error::MissingStage {
            stage: "score".into(),
            detail: format!("{} holds no scored entities", path.display()),
        });
    }
    Ok(table)
}

fn report_cmd(cfg: PipelineConfig) -> Result<()> {
    let mut run = Run::new("report", cfg)?;
    let scores = read_scores(&mut run)?;
    let match_path = run.stage_input(MATCHING, "match")?;
    let pairs = read_matching_csv(&std::fs::read_to_string(&match_path).map_err(|e| Error::io(&match_path, e))?)?;
    let entries = run.filtered_corpus()?;
    let treatment: Vec<BiographyEntry> = entries.into_iter().filter(|e| e.group == Group::Treatment).collect();
    let report = subgroup_report(
        &pairs,
        &treatment,
        &scores,
        &run.cfg.facets()?,
        &run.languages()?,
        &SCORED_DIMENSIONS,
        &run.cfg.facet_config(),
        run.cfg.scoring.min_verbs,
    )?;
    run.write_csv("report.csv", &to_csv_string(&report.reports)?)?;
    run.write_csv("report_refused.csv", &to_csv_string(&report.refused)?)?;
    run.write_json("report.json", &report)?;
    for r in report.reports.iter().filter(|r| r.facet == "all") {
        println!(
            "{} {}: mean diff {:+.4} [{:+.4}, {:+.4}], t {:.3}, p {:.4}, {} pairs",
            r.language, r.dimension, r.mean_diff, r.ci_lower, r.ci_upper, r.t, r.p, r.n_pairs
        );
    }
    println!("{} subgroup reports, {} refused", report.reports.len(), report.refused.len());
    run.finish()
}

fn rank_cmd(cfg: PipelineConfig, a: &str, b: &str, dimension: &str, include_controls: bool) -> Result<()> {
    let mut run = Run::new("rank-imbalance", cfg)?;
    let mut scores = read_scores(&mut run)?;
    let entries = run.filtered_corpus()?;
    if !include_controls {
        let treatment: HashSet<&str> = entries
            .iter()
            .filter(|e| e.group == Group::Treatment)
            .map(|e| e.person_id.as_str())
            .collect();
        scores.scores.retain(|s| treatment.contains(s.person_id.as_str()));
    }
    let (a, b) = (Language::new(a)?, Language::new(b)?);
    let dim: Dimension = dimension.parse()?;
    let ranking = rank_imbalance(&scores, &entries, &a, &b, dim, run.cfg.scoring.imbalance_k);
    if ranking.truncated {
        warn!("only {} people are scored in both languages", ranking.items.len());
    }
    let stem = format!("imbalance_{a}_{b}_{dim}");
    run.write_csv(&format!("{stem}.csv"), &to_csv_string(&ranking.items)?)?;
    run.write_json(&format!("{stem}.json"), &ranking)?;
    for (i, item) in ranking.items.iter().enumerate() {
        println!("{:>3}. {} ({}): {:+.4}", i + 1, item.title_a, item.person_id, item.differential);
    }
    run.finish()
}
