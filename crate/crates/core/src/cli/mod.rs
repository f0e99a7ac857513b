//! The `caa` command-line tool. Each subcommand runs one pipeline stage,
//! reading earlier stages' outputs from the output directory and writing a
//! run manifest next to its own outputs.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "caa", version, about = "Contextual affective analysis pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file. Defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `languages` (comma separated).
    #[arg(long, global = true, value_delimiter = ',')]
    pub languages: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read raw judgements, drop unreliable annotators, write lexicons.
    Ingest {
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Average and ternarize the filtered lexicons.
    Aggregate,
    /// Krippendorff's alpha and pairwise agreement per lexicon.
    Agreement,
    /// Label changes caused by collapsing contexts to verb level.
    ContextLoss,
    /// Label changes between verbs and their English translations.
    TranslationLoss,
    /// Train one scoring model per entity dimension.
    Train {
        /// Overrides `classifier.train_languages` (comma separated).
        #[arg(long, value_delimiter = ',')]
        train_languages: Option<Vec<String>>,
    },
    /// Cross-validated evaluation, training on `source` and testing on `target`.
    Eval {
        #[arg(long)]
        target: String,
        /// Defaults to the target language.
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        dimension: Option<String>,
    },
    /// Evaluate source-language models on translated target sentences.
    MtEval {
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "en")]
        source: String,
        #[arg(long)]
        dimension: Option<String>,
    },
    /// Train on the target plus added languages, test on the target.
    AugmentEval {
        #[arg(long)]
        target: String,
        #[arg(long, value_delimiter = ',', required = true)]
        add: Vec<String>,
        #[arg(long)]
        dimension: Option<String>,
    },
    /// Filter the biography dump and write export requests for corpus verbs.
    BuildCorpus {
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Tune the slope and match each treatment entry to a control.
    Match,
    /// Score every filtered entry with the trained models.
    Score,
    /// Paired diff statistics overall and per subgroup.
    Report {
        #[arg(long)]
        min_verbs: Option<usize>,
    },
    /// People whose scores differ most between two languages.
    RankImbalance {
        #[arg(long)]
        language_a: String,
        #[arg(long)]
        language_b: String,
        #[arg(long, default_value = "power")]
        dimension: String,
        #[arg(long)]
        k: Option<usize>,
        /// Rank control entries too, not only treatment entries.
        #[arg(long)]
        include_controls: bool,
    },
}

/// Loads the config file (if any) and applies flag overrides.
pub fn resolve_config(global: &GlobalArgs) -> Result<PipelineConfig> {
    let mut cfg = match &global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(dir) = &global.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(langs) = &global.languages {
        cfg.languages = langs.clone();
    }
    Ok(cfg)
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(vec![e.to_string()]))?;
    run_cli(cli)
}

pub fn run_cli(cli: Cli) -> Result<()> {
    let mut cfg = resolve_config(&cli.global)?;
    commands::apply_command_overrides(&mut cfg, &cli.command);
    cfg.validate()?;
    commands::dispatch(cfg, cli.command)
}
