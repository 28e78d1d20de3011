//! Airflow family: 4 smoothness/area features on the raw waveform plus the
//! 64 EMG-style features on the smoothed waveform.

use crate::dsp::{moving_average, pearson, stat_moments};
use crate::features::emg::emg_features;
use crate::features::{FeatureConfig, FeatureError};

pub fn airflow_features(x: &[f64], cfg: &FeatureConfig) -> Result<Vec<f64>, FeatureError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite);
    }
    let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let dm = stat_moments(&d)?;
    let lag1 = pearson(&x[..x.len() - 1], &x[1..])?;

    // signed positive-minus-negative area about the epoch mean
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let area_balance: f64 = x
        .iter()
        .map(|&v| {
            let c = v - mean;
            c.max(0.0) + c.min(0.0)
        })
        .sum();

    let smoothed = moving_average(x, cfg.airflow_smooth_window)?;
    let mut out = vec![dm.std, dm.cv, lag1, area_balance];
    out.extend(emg_features(&smoothed, cfg)?);
    Ok(out)
}
