//! The five pipeline subcommands. Each returns `Ok(())` for exit 0 or a
//! `CmdError` carrying the process exit code.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use arousal_core::classifier::{load_db, save_db, train_subject, ModelDatabase, TrainOutcome};
use arousal_core::epoch::segment_train;
use arousal_core::features::{extract_epoch, feature_names};
use arousal_core::record::{read_record, write_record};
use arousal_core::scoring::{gross_score, predict_record, read_vec, write_vec};
use arousal_core::synth::synth_record;
use arousal_core::{fnv1a64, hash64, EpochSignals, Record, SynthParams, TrainParams};
use rayon::prelude::*;

use crate::config::PipelineConfig;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_UNSCORABLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub struct CmdError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn runtime(message: impl Into<String>) -> CmdError {
    CmdError {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

pub fn usage(message: impl Into<String>) -> CmdError {
    CmdError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Record subdirectories of `dir` (anything holding a header.txt), sorted by
/// name so output order never depends on filesystem iteration order.
fn record_dirs(dir: &Path) -> Result<Vec<PathBuf>, CmdError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| runtime(format!("cannot read data dir {}: {e}", dir.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("header.txt").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Reads every record under `dir`; unreadable ones are reported on stderr and
/// skipped rather than aborting the batch.
fn read_records(dir: &Path) -> Result<Vec<Record>, CmdError> {
    let mut records = Vec::new();
    for path in record_dirs(dir)? {
        match read_record(&path) {
            Ok(r) => records.push(r),
            Err(e) => eprintln!("warning: skipping {}: {e}", path.display()),
        }
    }
    Ok(records)
}

/// Scopes rayon to an explicit pool when a thread count is requested;
/// `threads == 0` keeps the global default.
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CmdError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| runtime(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub struct SynthArgs {
    pub subjects: usize,
    pub duration_s: f64,
    pub arousal_rate: f64,
    pub arousal_duration_s: f64,
    pub strength: f64,
    pub seed: u64,
    pub split: Option<f64>,
    pub out: PathBuf,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CmdError> {
    if args.subjects == 0 {
        return Err(usage("--subjects must be at least 1"));
    }
    if let Some(split) = args.split {
        if !(0.0 < split && split < 1.0) {
            return Err(usage(format!("--split must be in (0, 1), got {split}")));
        }
    }

    let n_train = args
        .split
        .map(|s| ((args.subjects as f64) * s).round() as usize);
    for i in 0..args.subjects {
        let subject_id = format!("s{:03}", i + 1);
        let params = SynthParams {
            duration_s: args.duration_s,
            arousal_rate: args.arousal_rate,
            arousal_duration_s: args.arousal_duration_s,
            signature_strength: args.strength,
            seed: hash64(args.seed, fnv1a64(subject_id.as_bytes())),
            ..SynthParams::default()
        };
        let record = synth_record(&subject_id, &params)
            .map_err(|e| usage(format!("invalid synth parameters: {e}")))?;
        let bucket = match n_train {
            Some(k) if i >= k => "test",
            Some(_) => "train",
            None => "",
        };
        let dir = if bucket.is_empty() {
            args.out.clone()
        } else {
            args.out.join(bucket)
        };
        write_record(&record, &dir).map_err(|e| runtime(e.to_string()))?;
        let arousal_samples = record.annotations.iter().filter(|&&a| a == 1).count();
        let suffix = if bucket.is_empty() {
            String::new()
        } else {
            format!(" split={bucket}")
        };
        println!(
            "{subject_id} duration_s={} arousal_samples={arousal_samples}{suffix}",
            args.duration_s
        );
    }
    Ok(())
}

pub struct FeaturesArgs {
    pub record: PathBuf,
    pub out: PathBuf,
}

pub fn cmd_features(args: &FeaturesArgs, cfg: &PipelineConfig) -> Result<(), CmdError> {
    let record = read_record(&args.record).map_err(|e| runtime(e.to_string()))?;
    let spans = segment_train(record.len(), record.sampling_rate, cfg.epoch_seconds)
        .map_err(|e| runtime(e.to_string()))?;
    let fs_hz = f64::from(record.sampling_rate);
    let feat_cfg = cfg.feature_config();

    let mut csv = String::new();
    csv.push_str("epoch_start_s");
    for name in feature_names() {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for span in spans {
        let signals =
            EpochSignals::from_record(&record, span).map_err(|e| runtime(e.to_string()))?;
        let fv = extract_epoch(&signals, fs_hz, &feat_cfg).map_err(|e| runtime(e.to_string()))?;
        csv.push_str(&format!("{}", span.start as f64 / fs_hz));
        for v in &fv.values {
            // shortest representation that parses back to the same f64
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    fs::write(&args.out, csv)
        .map_err(|e| runtime(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

pub struct TrainArgs {
    pub data: PathBuf,
    pub models_out: PathBuf,
}

pub fn cmd_train(args: &TrainArgs, cfg: &PipelineConfig) -> Result<(), CmdError> {
    let records = read_records(&args.data)?;
    if records.is_empty() {
        return Err(runtime(format!(
            "no records found under {}",
            args.data.display()
        )));
    }
    let params = TrainParams {
        n_trees: cfg.trees,
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
        ..TrainParams::default()
    };
    let feat_cfg = cfg.feature_config();
    let epoch_s = cfg.epoch_seconds;
    let seed = cfg.seed;

    let outcomes: Vec<TrainOutcome> = with_threads(cfg.threads, || {
        records
            .par_iter()
            .map(|r| train_subject(r, &params, epoch_s, &feat_cfg, seed))
            .collect::<Result<_, _>>()
    })?
    .map_err(|e| runtime(e.to_string()))?;

    let mut models = Vec::new();
    for outcome in outcomes {
        match outcome {
            TrainOutcome::Trained(m) => {
                println!(
                    "{} trained epochs={} non_arousal={} arousal={}",
                    m.subject_id, m.n_epochs_train, m.class_counts.0, m.class_counts.1
                );
                models.push(*m);
            }
            TrainOutcome::Skipped { subject_id, reason } => {
                println!("{subject_id} skipped({reason})");
            }
        }
    }
    if models.is_empty() {
        return Err(runtime("no subject produced a trainable two-class epoch set"));
    }
    let db = ModelDatabase::new(models);
    save_db(&db, &args.models_out).map_err(|e| runtime(e.to_string()))?;
    println!("wrote {} ({} models)", args.models_out.display(), db.len());
    Ok(())
}

pub struct PredictArgs {
    pub data: PathBuf,
    pub models: PathBuf,
    pub out: PathBuf,
}

pub fn cmd_predict(args: &PredictArgs, cfg: &PipelineConfig) -> Result<(), CmdError> {
    let db = load_db(&args.models).map_err(|e| runtime(e.to_string()))?;
    let records = read_records(&args.data)?;
    if records.is_empty() {
        return Err(runtime(format!(
            "no records found under {}",
            args.data.display()
        )));
    }
    fs::create_dir_all(&args.out)
        .map_err(|e| runtime(format!("cannot create {}: {e}", args.out.display())))?;

    let feat_cfg = cfg.feature_config();
    for record in &records {
        let probs = with_threads(cfg.threads, || {
            predict_record(record, &db, cfg.epoch_seconds, cfg.test_overlap, &feat_cfg)
        })?
        .map_err(|e| runtime(e.to_string()))?;
        let path = args.out.join(format!("{}.vec", record.subject_id));
        write_vec(&probs, &path).map_err(|e| runtime(e.to_string()))?;
        println!("{} samples={}", path.display(), probs.len());
    }
    Ok(())
}

pub struct ScoreArgs {
    pub pred: PathBuf,
    pub reference: PathBuf,
}

pub fn cmd_score(args: &ScoreArgs) -> Result<(), CmdError> {
    let records = read_records(&args.reference)?;
    if records.is_empty() {
        return Err(runtime(format!(
            "no reference records under {}",
            args.reference.display()
        )));
    }
    let mut vecs = Vec::with_capacity(records.len());
    for record in &records {
        let path = args.pred.join(format!("{}.vec", record.subject_id));
        if !path.is_file() {
            return Err(runtime(format!(
                "missing prediction {} for record {}",
                path.display(),
                record.subject_id
            )));
        }
        vecs.push(read_vec(&path).map_err(|e| runtime(e.to_string()))?);
    }
    let pairs: Vec<_> = vecs
        .iter()
        .zip(&records)
        .map(|(v, r)| (v, r.annotations.as_slice()))
        .collect();
    let report = gross_score(&pairs).map_err(|e| {
        if matches!(e, arousal_core::scoring::ScoringError::SingleClass) {
            CmdError {
                code: EXIT_UNSCORABLE,
                message: e.to_string(),
            }
        } else {
            runtime(e.to_string())
        }
    })?;
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "AUROC={:.3} AUPRC={:.3} scored={} excluded={}",
        report.auroc, report.auprc, report.n_scored_samples, report.n_excluded_samples
    )
    .map_err(|e| runtime(format!("cannot write report: {e}")))?;
    Ok(())
}
