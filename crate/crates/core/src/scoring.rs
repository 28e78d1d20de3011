//! Sample-wise inference and gross AUPRC/AUROC scoring.
//!
//! Each 50%-overlap test epoch gets the mean probability over every model
//! in the database; a sample covered by several epochs receives the
//! arithmetic mean of their probabilities. Scoring pools all samples
//! across records ("gross"), dropping samples annotated undefined.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::{ClassifierError, ModelDatabase};
use crate::epoch::segment_test;
use crate::features::{extract_epoch, EpochSignals, FeatureConfig};
use crate::record::Record;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Epoch(#[from] crate::epoch::EpochError),
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed probability: {reason}")]
    MalformedVec {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("probability vector length {probs} does not match annotations {anns}")]
    LengthMismatch { probs: usize, anns: usize },
    #[error("pooled samples contain a single class; metric undefined")]
    SingleClass,
}

/// Per-sample arousal probabilities for one record.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    pub probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Pooled scoring result.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub auprc: f64,
    pub auroc: f64,
    pub n_scored_samples: usize,
    pub n_excluded_samples: usize,
    pub prevalence: f64,
}

/// Sample-wise prediction with 50%-overlap fusion.
pub fn predict_record(
    record: &Record,
    db: &ModelDatabase,
    epoch_s: u32,
    overlap: f64,
    cfg: &FeatureConfig,
) -> Result<ProbabilityVector, ScoringError> {
    if db.is_empty() {
        return Err(ScoringError::Classifier(ClassifierError::EmptyDatabase));
    }
    let n = record.len();
    let fs = f64::from(record.sampling_rate);
    let spans = segment_test(n, record.sampling_rate, epoch_s, overlap)?;

    let epoch_probs: Vec<f64> = spans
        .par_iter()
        .map(|&span| -> Result<f64, ScoringError> {
            let signals = EpochSignals::from_record(record, span)?;
            let fv = extract_epoch(&signals, fs, cfg)?;
            Ok(db.predict_mean(&fv.values)?)
        })
        .collect::<Result<_, _>>()?;

    let mut sum = vec![0.0f64; n];
    let mut count = vec![0u32; n];
    for (span, p) in spans.iter().zip(&epoch_probs) {
        for i in span.start..span.end {
            sum[i] += p;
            count[i] += 1;
        }
    }
    let probs = sum
        .into_iter()
        .zip(count)
        .map(|(s, c)| s / f64::from(c))
        .collect();
    Ok(ProbabilityVector { probs })
}

/// Writes one probability per line with 3 fractional digits.
pub fn write_vec(probs: &ProbabilityVector, path: &Path) -> Result<(), ScoringError> {
    let mut out = String::with_capacity(probs.len() * 6);
    for p in &probs.probs {
        out.push_str(&format!("{p:.3}\n"));
    }
    fs::write(path, out).map_err(|source| ScoringError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a `.vec` file; every line must parse to a probability in [0, 1].
pub fn read_vec(path: &Path) -> Result<ProbabilityVector, ScoringError> {
    let text = fs::read_to_string(path).map_err(|source| ScoringError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut probs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| ScoringError::MalformedVec {
            path: path.to_path_buf(),
            line: i + 1,
            reason: format!("not a number: {line}"),
        })?;
        if !(0.0..=1.0).contains(&v) {
            return Err(ScoringError::MalformedVec {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("value {v} outside [0, 1]"),
            });
        }
        probs.push(v);
    }
    Ok(ProbabilityVector { probs })
}

/// Sorts sample indices by descending score and walks tie groups.
/// Yields (tp, fp) cumulative counts after each distinct threshold.
fn threshold_steps(scores: &[f64], labels: &[bool]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut steps = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        steps.push((tp, fp));
    }
    steps
}

/// Average precision with tie groups collapsed to single threshold steps.
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64, ScoringError> {
    if scores.len() != labels.len() {
        return Err(ScoringError::LengthMismatch {
            probs: scores.len(),
            anns: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(ScoringError::SingleClass);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (tp, fp) in threshold_steps(scores, labels) {
        let recall = tp as f64 / n_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

/// Mann-Whitney AUROC: concordant pairs plus half credit for ties.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64, ScoringError> {
    if scores.len() != labels.len() {
        return Err(ScoringError::LengthMismatch {
            probs: scores.len(),
            anns: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(ScoringError::SingleClass);
    }
    // rank-sum over ascending scores with average ranks for ties
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        let start = i;
        let mut tied_pos = 0usize;
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] {
                tied_pos += 1;
            }
            i += 1;
        }
        // ranks are 1-based; tied entries share the average rank
        let avg_rank = (start + 1 + i) as f64 / 2.0;
        rank_sum_pos += avg_rank * tied_pos as f64;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Pools all samples across records, drops undefined (-1) annotations, and
/// scores the remainder.
pub fn gross_score(pairs: &[(&ProbabilityVector, &[i8])]) -> Result<ScoreReport, ScoringError> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut excluded = 0usize;
    for (probs, anns) in pairs {
        if probs.len() != anns.len() {
            return Err(ScoringError::LengthMismatch {
                probs: probs.len(),
                anns: anns.len(),
            });
        }
        for (&p, &a) in probs.probs.iter().zip(anns.iter()) {
            match a {
                -1 => excluded += 1,
                0 => {
                    scores.push(p);
                    labels.push(false);
                }
                _ => {
                    scores.push(p);
                    labels.push(true);
                }
            }
        }
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    Ok(ScoreReport {
        auprc: auprc(&scores, &labels)?,
        auroc: auroc(&scores, &labels)?,
        n_scored_samples: scores.len(),
        n_excluded_samples: excluded,
        prevalence: n_pos as f64 / scores.len() as f64,
    })
}
