//! Command-line driver for the visual-theme pipeline.

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vistheme_core::textmodel::Task;

pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

use config::Config;
use error::{exit_code, invalid_config};
use stages::Ctx;

#[derive(Debug, Parser)]
#[command(name = "vistheme", version, about = "Visual theme analysis of social-media image corpora")]
pub struct Cli {
    /// Seed for every random choice in the run; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory holding the manifest and stage outputs.
    #[arg(long, global = true, default_value = "run")]
    pub run_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and store a JSONL post file.
    Ingest {
        input: PathBuf,
    },
    /// Embed the static images of original posts.
    Embed(EmbedArgs),
    /// Cluster the embeddings, choosing k by silhouette unless given.
    Cluster {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Measure consistency and split/merge clusters.
    Refine {
        /// `image_id,theme` labels; without it a checkpoint is opened for
        /// labeling through `serve`.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Attach post-level labels.
    Classify(ClassifyArgs),
    /// Significance tests over the themed posts.
    Stats,
    /// Write the report tables.
    Report,
    /// Compare average consistency across runs.
    EvalConsistency {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the annotation API over the run directories under a root.
    Serve {
        #[arg(long, default_value = ".")]
        runs_root: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, env = "VISTHEME_TOKEN")]
        token: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Backend {
    Pooled,
    Onnx,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Precomputed embeddings (CEMB or CSV).
    #[arg(long, conflicts_with = "backend")]
    pub from: Option<PathBuf>,
    /// Name recorded for precomputed embeddings.
    #[arg(long, default_value = "precomputed", requires = "from")]
    pub name: String,
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Backend config for `--backend onnx`.
    #[arg(long)]
    pub onnx_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Info,
    Emotion,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Info => Task::Info,
            TaskArg::Emotion => Task::Emotion,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// External `post_id,label` predictions.
    #[arg(long, conflicts_with = "train", required_unless_present = "train")]
    pub predictions: Option<PathBuf>,
    /// `post_id,label` training rows for the baseline classifier.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// `post_id,label` gold labels to score against.
    #[arg(long)]
    pub gold: Option<PathBuf>,
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    let open = |config: Config| Ctx::open(&cli.run_dir, config);
    match cli.command {
        Command::Ingest { input } => stages::ingest::run(&mut open(config)?, &input),
        Command::Embed(args) => {
            let source = match (&args.from, args.backend) {
                (Some(path), _) => stages::embed::Source::File { path, backend: &args.name },
                (None, Some(Backend::Pooled)) => stages::embed::Source::Pooled,
                (None, Some(Backend::Onnx)) => match &args.onnx_config {
                    Some(config) => stages::embed::Source::Onnx { config },
                    None => return Err(invalid_config("--backend onnx needs --onnx-config")),
                },
                (None, None) => return Err(invalid_config("embed needs --from FILE or --backend")),
            };
            stages::embed::run(&mut open(config)?, source)
        }
        Command::Cluster { k } => stages::cluster::run(&mut open(config)?, k),
        Command::Refine { labels } => {
            let labels = match &labels {
                Some(p) => stages::refine::Labels::File(p),
                None => stages::refine::Labels::Interactive,
            };
            stages::refine::run(&mut open(config)?, labels)
        }
        Command::Classify(args) => {
            let source = match (&args.predictions, &args.train) {
                (Some(p), _) => stages::classify::Source::Predictions(p),
                (None, Some(p)) => stages::classify::Source::Train(p),
                (None, None) => unreachable!("clap requires one of --predictions / --train"),
            };
            stages::classify::run(&mut open(config)?, args.task.into(), source, args.gold.as_deref())
        }
        Command::Stats => stages::stats::run(&mut open(config)?),
        Command::Report => stages::report::run(&mut open(config)?),
        Command::EvalConsistency { runs, out } => stages::eval::run(&runs, out.as_deref()),
        Command::Serve { runs_root, bind, token } => {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(vistheme_service::serve(vistheme_service::ServiceConfig { runs_root, bind, token }))?;
            Ok(())
        }
    }
}
