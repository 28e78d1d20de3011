//! Bagged binary classification trees and the per-subject model database.
//!
//! Plain CART with the Gini criterion: every feature is considered at every
//! split (bagging, no feature subsampling). One ensemble is trained per
//! qualifying subject; the database persists all of them behind a schema
//! hash so stale models cannot be applied to differently-extracted features.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::epoch::{labeled_epochs, EpochLabel};
use crate::features::{extract_epoch, schema_hash, EpochSignals, FeatureConfig, FeatureError};
use crate::hash::{fnv1a64, hash64};
use crate::record::Record;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("gini of an empty node is undefined")]
    EmptyNode,
    #[error("feature dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training set contains a single class")]
    SingleClass,
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("rows have inconsistent feature dimensions")]
    RaggedRows,
    #[error("model database is empty")]
    EmptyDatabase,
    #[error(transparent)]
    Epoch(#[from] crate::epoch::EpochError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corrupt model database: {0}")]
    Corrupt(String),
    #[error("unsupported model database version {0}")]
    Version(u32),
    #[error("feature schema hash mismatch: database {stored:#x}, extractor {current:#x}")]
    SchemaMismatch { stored: u64, current: u64 },
}

/// Gini impurity of a node with the given class counts.
pub fn gini(n_pos: usize, n_neg: usize) -> Result<f64, ClassifierError> {
    let n = n_pos + n_neg;
    if n == 0 {
        return Err(ClassifierError::EmptyNode);
    }
    let p = n_pos as f64 / n as f64;
    Ok(1.0 - p * p - (1.0 - p) * (1.0 - p))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        arousal_fraction: f64,
        n_train: usize,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf {
                arousal_fraction, ..
            } => *arousal_fraction,
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
            } => {
                if x[*feature_index] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub bootstrap_fraction: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            n_trees: 30,
            max_depth: 20,
            min_leaf: 1,
            bootstrap_fraction: 1.0,
            seed: 0,
        }
    }
}

struct TreeBuilder<'a> {
    rows: &'a [&'a [f64]],
    labels: &'a [bool],
    params: &'a TrainParams,
}

impl TreeBuilder<'_> {
    fn build(&self, indices: &mut [usize], depth: usize) -> TreeNode {
        let n = indices.len();
        let n_pos = indices.iter().filter(|&&i| self.labels[i]).count();
        let leaf = || TreeNode::Leaf {
            arousal_fraction: n_pos as f64 / n as f64,
            n_train: n,
        };
        if depth >= self.params.max_depth
            || n < 2 * self.params.min_leaf
            || n_pos == 0
            || n_pos == n
        {
            return leaf();
        }

        let parent_gini = gini(n_pos, n - n_pos).expect("node not empty");
        let n_features = self.rows[indices[0]].len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);

        for feature in 0..n_features {
            column.clear();
            column.extend(
                indices
                    .iter()
                    .map(|&i| (self.rows[i][feature], self.labels[i])),
            );
            column.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

            let mut left_pos = 0usize;
            for split in 1..n {
                if column[split - 1].1 {
                    left_pos += 1;
                }
                if column[split].0 == column[split - 1].0 {
                    continue;
                }
                let left_n = split;
                let right_n = n - split;
                if left_n < self.params.min_leaf || right_n < self.params.min_leaf {
                    continue;
                }
                let right_pos = n_pos - left_pos;
                let gl = gini(left_pos, left_n - left_pos).unwrap();
                let gr = gini(right_pos, right_n - right_pos).unwrap();
                let decrease = parent_gini
                    - (left_n as f64 / n as f64) * gl
                    - (right_n as f64 / n as f64) * gr;
                // strict > keeps the lowest feature index / smallest threshold on ties
                if decrease > 0.0 && best.map_or(true, |(d, _, _)| decrease > d) {
                    let threshold = 0.5 * (column[split - 1].0 + column[split].0);
                    best = Some((decrease, feature, threshold));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            return leaf();
        };
        let mid = stable_partition(indices, |&i| self.rows[i][feature] <= threshold);
        let (left_idx, right_idx) = indices.split_at_mut(mid);
        let left = self.build(left_idx, depth + 1);
        let right = self.build(right_idx, depth + 1);
        TreeNode::Internal {
            feature_index: feature,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Stable partition: elements satisfying `pred` first, original order kept
/// within each side. Returns the split point.
fn stable_partition<F: Fn(&usize) -> bool>(indices: &mut [usize], pred: F) -> usize {
    let mut reordered = Vec::with_capacity(indices.len());
    reordered.extend(indices.iter().copied().filter(|i| pred(i)));
    let mid = reordered.len();
    reordered.extend(indices.iter().copied().filter(|i| !pred(i)));
    indices.copy_from_slice(&reordered);
    mid
}

/// Greedy CART fit on the given rows. Deterministic: ties between splits
/// resolve to the lowest feature index, then the smallest threshold.
pub fn fit_tree(
    rows: &[&[f64]],
    labels: &[bool],
    params: &TrainParams,
) -> Result<TreeNode, ClassifierError> {
    if rows.is_empty() {
        return Err(ClassifierError::TooFewRows(0));
    }
    if rows.len() != labels.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: rows.len(),
            actual: labels.len(),
        });
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(ClassifierError::RaggedRows);
    }
    let builder = TreeBuilder {
        rows,
        labels,
        params,
    };
    let mut indices: Vec<usize> = (0..rows.len()).collect();
    Ok(builder.build(&mut indices, 0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaggedEnsemble {
    pub trees: Vec<TreeNode>,
    pub params: TrainParams,
    pub n_features: usize,
}

impl BaggedEnsemble {
    /// Mean of the reached leaves' arousal fractions; always in [0, 1].
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, ClassifierError> {
        if x.len() != self.n_features {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}

/// Bootstrap-aggregated trees; deterministic per-tree substreams seeded
/// from (params.seed, tree index).
pub fn fit_bagged(
    rows: &[&[f64]],
    labels: &[bool],
    params: &TrainParams,
) -> Result<BaggedEnsemble, ClassifierError> {
    if rows.len() < 2 {
        return Err(ClassifierError::TooFewRows(rows.len()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(ClassifierError::SingleClass);
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(ClassifierError::RaggedRows);
    }

    let n = rows.len();
    let sample_size = ((n as f64) * params.bootstrap_fraction).round().max(1.0) as usize;
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(hash64(params.seed, t as u64));
        let mut boot_rows = Vec::with_capacity(sample_size);
        let mut boot_labels = Vec::with_capacity(sample_size);
        for _ in 0..sample_size {
            let i = rng.random_range(0..n);
            boot_rows.push(rows[i]);
            boot_labels.push(labels[i]);
        }
        trees.push(fit_tree(&boot_rows, &boot_labels, params)?);
    }
    Ok(BaggedEnsemble {
        trees,
        params: *params,
        n_features: dim,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectModel {
    pub subject_id: String,
    pub ensemble: BaggedEnsemble,
    pub n_epochs_train: usize,
    /// (non-arousal epochs, arousal epochs); both are > 0 by construction.
    pub class_counts: (usize, usize),
}

/// Result of attempting to train one subject.
#[derive(Debug)]
pub enum TrainOutcome {
    Trained(Box<SubjectModel>),
    Skipped { subject_id: String, reason: String },
}

/// Per-subject training seed, independent of training order.
pub fn subject_seed(global_seed: u64, subject_id: &str) -> u64 {
    hash64(global_seed, fnv1a64(subject_id.as_bytes()))
}

/// Full per-subject training path: epochs, features, bagged fit.
pub fn train_subject(
    record: &Record,
    params: &TrainParams,
    epoch_s: u32,
    feat_cfg: &FeatureConfig,
    global_seed: u64,
) -> Result<TrainOutcome, ClassifierError> {
    let epochs = labeled_epochs(record, epoch_s)?;
    let fs = f64::from(record.sampling_rate);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(epochs.len());
    let mut labels: Vec<bool> = Vec::with_capacity(epochs.len());
    for e in &epochs {
        let signals = EpochSignals::from_record(record, e.span)?;
        rows.push(extract_epoch(&signals, fs, feat_cfg)?.values);
        labels.push(e.label == EpochLabel::Arousal);
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if rows.len() < 2 || n_pos == 0 || n_pos == labels.len() {
        return Ok(TrainOutcome::Skipped {
            subject_id: record.subject_id.clone(),
            reason: "single-class".to_string(),
        });
    }
    let subject_params = TrainParams {
        seed: subject_seed(global_seed, &record.subject_id),
        ..*params
    };
    let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let ensemble = fit_bagged(&row_refs, &labels, &subject_params)?;
    Ok(TrainOutcome::Trained(Box::new(SubjectModel {
        subject_id: record.subject_id.clone(),
        ensemble,
        n_epochs_train: rows.len(),
        class_counts: (labels.len() - n_pos, n_pos),
    })))
}

/// Immutable, persisted collection of subject models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDatabase {
    pub schema_hash: u64,
    pub models: Vec<SubjectModel>,
}

impl ModelDatabase {
    pub fn new(mut models: Vec<SubjectModel>) -> ModelDatabase {
        models.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
        ModelDatabase {
            schema_hash: schema_hash(),
            models,
        }
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Mean arousal probability over all subject models.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64, ClassifierError> {
        if self.models.is_empty() {
            return Err(ClassifierError::EmptyDatabase);
        }
        let mut sum = 0.0;
        for model in &self.models {
            sum += model.ensemble.predict_proba(x)?;
        }
        Ok(sum / self.models.len() as f64)
    }
}

const DB_MAGIC: &[u8; 4] = b"ARDB";
const DB_VERSION: u32 = 1;

struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
}

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ClassifierError> {
        if self.pos + n > self.buf.len() {
            return Err(ClassifierError::Corrupt("unexpected end of file".into()));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
    fn u8(&mut self) -> Result<u8, ClassifierError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, ClassifierError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, ClassifierError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, ClassifierError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String, ClassifierError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| ClassifierError::Corrupt("invalid utf-8 string".into()))
    }
}

fn write_tree(node: &TreeNode, w: &mut ByteWriter) {
    match node {
        TreeNode::Leaf {
            arousal_fraction,
            n_train,
        } => {
            w.u8(0);
            w.f64(*arousal_fraction);
            w.u64(*n_train as u64);
        }
        TreeNode::Internal {
            feature_index,
            threshold,
            left,
            right,
        } => {
            w.u8(1);
            w.u32(*feature_index as u32);
            w.f64(*threshold);
            write_tree(left, w);
            write_tree(right, w);
        }
    }
}

fn read_tree(r: &mut ByteReader) -> Result<TreeNode, ClassifierError> {
    match r.u8()? {
        0 => Ok(TreeNode::Leaf {
            arousal_fraction: r.f64()?,
            n_train: r.u64()? as usize,
        }),
        1 => {
            let feature_index = r.u32()? as usize;
            let threshold = r.f64()?;
            let left = read_tree(r)?;
            let right = read_tree(r)?;
            Ok(TreeNode::Internal {
                feature_index,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        tag => Err(ClassifierError::Corrupt(format!("bad node tag {tag}"))),
    }
}

/// Serializes the database to its versioned binary format.
pub fn save_db(db: &ModelDatabase, path: &Path) -> Result<(), ClassifierError> {
    let mut w = ByteWriter { buf: Vec::new() };
    w.buf.extend_from_slice(DB_MAGIC);
    w.u32(DB_VERSION);
    w.u64(db.schema_hash);
    w.u32(db.models.len() as u32);
    for model in &db.models {
        w.str(&model.subject_id);
        w.u64(model.n_epochs_train as u64);
        w.u64(model.class_counts.0 as u64);
        w.u64(model.class_counts.1 as u64);
        let p = &model.ensemble.params;
        w.u32(p.n_trees as u32);
        w.u32(p.max_depth as u32);
        w.u32(p.min_leaf as u32);
        w.f64(p.bootstrap_fraction);
        w.u64(p.seed);
        w.u32(model.ensemble.n_features as u32);
        w.u32(model.ensemble.trees.len() as u32);
        for tree in &model.ensemble.trees {
            write_tree(tree, &mut w);
        }
    }
    fs::write(path, &w.buf).map_err(|source| ClassifierError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a database and refuses files whose schema hash does not match the
/// extractor compiled into this build.
pub fn load_db(path: &Path) -> Result<ModelDatabase, ClassifierError> {
    let bytes = fs::read(path).map_err(|source| ClassifierError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut r = ByteReader {
        buf: &bytes,
        pos: 0,
    };
    if r.take(4)? != DB_MAGIC {
        return Err(ClassifierError::Corrupt("bad magic".into()));
    }
    let version = r.u32()?;
    if version != DB_VERSION {
        return Err(ClassifierError::Version(version));
    }
    let stored = r.u64()?;
    let current = schema_hash();
    if stored != current {
        return Err(ClassifierError::SchemaMismatch { stored, current });
    }
    let n_models = r.u32()? as usize;
    let mut models = Vec::with_capacity(n_models);
    for _ in 0..n_models {
        let subject_id = r.str()?;
        let n_epochs_train = r.u64()? as usize;
        let class_counts = (r.u64()? as usize, r.u64()? as usize);
        let params = TrainParams {
            n_trees: r.u32()? as usize,
            max_depth: r.u32()? as usize,
            min_leaf: r.u32()? as usize,
            bootstrap_fraction: r.f64()?,
            seed: r.u64()?,
        };
        let n_features = r.u32()? as usize;
        let n_trees = r.u32()? as usize;
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            trees.push(read_tree(&mut r)?);
        }
        models.push(SubjectModel {
            subject_id,
            ensemble: BaggedEnsemble {
                trees,
                params,
                n_features,
            },
            n_epochs_train,
            class_counts,
        });
    }
    if r.pos != bytes.len() {
        return Err(ClassifierError::Corrupt("trailing bytes".into()));
    }
    Ok(ModelDatabase {
        schema_hash: stored,
        models,
    })
}
