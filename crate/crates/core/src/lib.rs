//! Sleep arousal detection pipeline.
//!
//! Everything needed to go from multichannel 200 Hz polysomnography records
//! to sample-wise arousal probabilities: record I/O and a synthetic record
//! generator, 30 s epoching, a 428-feature extractor, bagged classification
//! trees with a persisted per-subject model database, and gross AUPRC/AUROC
//! scoring.

pub mod classifier;
pub mod dsp;
pub mod epoch;
pub mod features;
pub mod record;
pub mod scoring;
pub mod synth;

mod hash;

pub use classifier::{BaggedEnsemble, ModelDatabase, SubjectModel, TrainParams};
pub use epoch::{EpochLabel, EpochSpan, LabeledEpoch};
pub use features::{EpochSignals, FeatureConfig, FeatureVector, FEATURE_COUNT};
pub use record::{ChannelRole, Record, ValidationReport};
pub use scoring::{ProbabilityVector, ScoreReport};
pub use synth::SynthParams;

pub use hash::{fnv1a64, hash64};

/// Sampling rate every record is required to carry, in Hz.
pub const SAMPLING_RATE_HZ: u32 = 200;

/// Training/inference epoch length in seconds.
pub const EPOCH_SECONDS: u32 = 30;

/// Samples per epoch at the fixed 200 Hz rate.
pub const EPOCH_SAMPLES: usize = (SAMPLING_RATE_HZ * EPOCH_SECONDS) as usize;
