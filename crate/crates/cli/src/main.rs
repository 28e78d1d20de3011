//! `arousal` — synthesize records, dump features, train the model database,
//! predict `.vec` probability files, and score them.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::{
    cmd_features, cmd_predict, cmd_score, cmd_synth, cmd_train, usage, CmdError, FeaturesArgs,
    PredictArgs, ScoreArgs, SynthArgs, TrainArgs, EXIT_USAGE,
};
use config::PipelineConfig;

#[derive(Parser)]
#[command(name = "arousal", version, about = "Sleep arousal detection pipeline")]
struct Cli {
    /// Line-oriented key=value configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate deterministic synthetic polysomnogram records.
    Synth(SynthCli),
    /// Dump per-epoch feature vectors of one record as CSV.
    Features(FeaturesCli),
    /// Train one bagged-tree ensemble per qualifying subject.
    Train(TrainCli),
    /// Write sample-wise arousal probabilities (one .vec per record).
    Predict(PredictCli),
    /// Score predictions against reference annotations (pooled).
    Score(ScoreCli),
}

#[derive(Args)]
struct SynthCli {
    /// Number of subjects to generate.
    #[arg(long)]
    subjects: usize,
    /// Record duration in seconds.
    #[arg(long, default_value_t = 3600.0)]
    duration: f64,
    /// Expected arousal events per hour.
    #[arg(long, default_value_t = 24.0)]
    arousal_rate: f64,
    /// Mean arousal event length in seconds.
    #[arg(long, default_value_t = 15.0)]
    arousal_duration: f64,
    /// Gain on all arousal signatures (0 disables them).
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    /// Base seed; each subject derives its own from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of subjects placed in a train/ subdirectory; the rest go to
    /// test/. Without it all records land directly in the output directory.
    #[arg(long)]
    split: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturesCli {
    /// Record directory.
    #[arg(long)]
    record: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainCli {
    /// Directory of record subdirectories.
    #[arg(long)]
    data: PathBuf,
    /// Output model database file.
    #[arg(long)]
    models_out: PathBuf,
    /// Global training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trees per subject ensemble.
    #[arg(long)]
    trees: Option<usize>,
    /// Maximum tree depth.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Minimum samples per leaf.
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Worker threads (0 = auto).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PredictCli {
    /// Directory of record subdirectories.
    #[arg(long)]
    data: PathBuf,
    /// Model database file.
    #[arg(long)]
    models: PathBuf,
    /// Output directory for .vec files.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = auto).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ScoreCli {
    /// Directory holding <subject>.vec predictions.
    #[arg(long)]
    pred: PathBuf,
    /// Directory of reference record subdirectories.
    #[arg(long = "ref", value_name = "DIR")]
    reference: PathBuf,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CmdError> {
    match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(usage),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Synth(a) => cmd_synth(&SynthArgs {
            subjects: a.subjects,
            duration_s: a.duration,
            arousal_rate: a.arousal_rate,
            arousal_duration_s: a.arousal_duration,
            strength: a.strength,
            seed: a.seed.unwrap_or(cfg.seed),
            split: a.split,
            out: a.out,
        }),
        Command::Features(a) => cmd_features(
            &FeaturesArgs {
                record: a.record,
                out: a.out,
            },
            &cfg,
        ),
        Command::Train(a) => {
            if let Some(v) = a.seed {
                cfg.seed = v;
            }
            if let Some(v) = a.trees {
                cfg.trees = v;
            }
            if let Some(v) = a.max_depth {
                cfg.max_depth = v;
            }
            if let Some(v) = a.min_leaf {
                cfg.min_leaf = v;
            }
            if let Some(v) = a.threads {
                cfg.threads = v;
            }
            cfg.validate().map_err(usage)?;
            cmd_train(
                &TrainArgs {
                    data: a.data,
                    models_out: a.models_out,
                },
                &cfg,
            )
        }
        Command::Predict(a) => {
            if let Some(v) = a.threads {
                cfg.threads = v;
            }
            cmd_predict(
                &PredictArgs {
                    data: a.data,
                    models: a.models,
                    out: a.out,
                },
                &cfg,
            )
        }
        Command::Score(a) => cmd_score(&ScoreArgs {
            pred: a.pred,
            reference: a.reference,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
