//! Per-epoch feature extraction: 428 ordered, finite values with a fixed
//! published schema.

mod airflow;
mod eeg;
mod emg;
mod eog;
mod interaction;
pub mod schema;
mod sao2;

pub use airflow::airflow_features;
pub use eeg::eeg_features;
pub use emg::emg_features;
pub use eog::eog_features;
pub use interaction::interaction_features;
pub use sao2::sao2_features;
pub use schema::{feature_names, schema_hash, FeatureDef, FEATURE_COUNT, SCHEMA_VERSION};

use thiserror::Error;

use crate::dsp::DspError;
use crate::epoch::EpochSpan;
use crate::record::{ChannelRole, Record};

const LOG_FLOOR: f64 = 1e-12;

/// log10 of a power value with an additive floor.
pub(crate) fn log_power(p: f64) -> f64 {
    (p + LOG_FLOOR).log10()
}

/// log10 guarded against nonpositive arguments.
pub(crate) fn log_pos(v: f64) -> f64 {
    if v > 0.0 { v.log10() } else { LOG_FLOOR.log10() }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error("channel slices have mismatched lengths")]
    ChannelLengthMismatch,
    #[error("missing channel {0} in record")]
    MissingChannel(ChannelRole),
    #[error("sao2 value {0} outside [0, 100]")]
    Sao2OutOfRange(f64),
    #[error("non-finite value in input signal")]
    NonFinite,
    #[error("non-finite feature produced at index {0}")]
    NonFiniteFeature(usize),
}

/// Tunable extraction knobs; defaults match the published schema.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub wamp_threshold_factor: f64,
    pub eog_smooth_window: usize,
    pub airflow_smooth_window: usize,
    pub xcorr_max_lag_s: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            wamp_threshold_factor: 0.5,
            eog_smooth_window: 51,
            airflow_smooth_window: 201,
            xcorr_max_lag_s: 5.0,
        }
    }
}

/// One epoch's worth of signal per feature-bearing role (ECG excluded).
#[derive(Debug, Clone)]
pub struct EpochSignals {
    pub eeg: [Vec<f64>; 6],
    pub eog: Vec<f64>,
    pub chin_emg: Vec<f64>,
    pub abdominal_emg: Vec<f64>,
    pub chest_emg: Vec<f64>,
    pub airflow: Vec<f64>,
    pub sao2: Vec<f64>,
}

impl EpochSignals {
    /// Copies one span out of a record, widening to f64.
    pub fn from_record(record: &Record, span: EpochSpan) -> Result<EpochSignals, FeatureError> {
        let slice = |role: ChannelRole| -> Result<Vec<f64>, FeatureError> {
            let signal = record
                .channel(role)
                .ok_or(FeatureError::MissingChannel(role))?;
            Ok(signal[span.start..span.end]
                .iter()
                .map(|&v| f64::from(v))
                .collect())
        };
        Ok(EpochSignals {
            eeg: [
                slice(ChannelRole::Eeg1)?,
                slice(ChannelRole::Eeg2)?,
                slice(ChannelRole::Eeg3)?,
                slice(ChannelRole::Eeg4)?,
                slice(ChannelRole::Eeg5)?,
                slice(ChannelRole::Eeg6)?,
            ],
            eog: slice(ChannelRole::Eog)?,
            chin_emg: slice(ChannelRole::ChinEmg)?,
            abdominal_emg: slice(ChannelRole::AbdominalEmg)?,
            chest_emg: slice(ChannelRole::ChestEmg)?,
            airflow: slice(ChannelRole::Airflow)?,
            sao2: slice(ChannelRole::SaO2)?,
        })
    }
}

/// Ordered vector of exactly 428 finite feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema_version: &'static str,
}

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Full 428-feature extraction in the fixed family order.
pub fn extract_epoch(
    epoch: &EpochSignals,
    fs: f64,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    let eeg_slices: [&[f64]; 6] = [
        &epoch.eeg[0],
        &epoch.eeg[1],
        &epoch.eeg[2],
        &epoch.eeg[3],
        &epoch.eeg[4],
        &epoch.eeg[5],
    ];
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    values.extend(eeg_features(&eeg_slices, fs)?);
    values.extend(sao2_features(&epoch.sao2)?);
    values.extend(emg_features(&epoch.chin_emg, cfg)?);
    values.extend(emg_features(&epoch.abdominal_emg, cfg)?);
    values.extend(emg_features(&epoch.chest_emg, cfg)?);
    values.extend(eog_features(&epoch.eog, cfg)?);
    values.extend(airflow_features(&epoch.airflow, cfg)?);
    values.extend(interaction_features(epoch, fs, cfg)?);

    debug_assert_eq!(values.len(), FEATURE_COUNT);
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        return Err(FeatureError::NonFiniteFeature(idx));
    }
    Ok(FeatureVector {
        values,
        schema_version: SCHEMA_VERSION,
    })
}
