//! EMG family: 64 features per channel.
//!
//! 8 statistics + 8 amplitude features + 8 time-domain spectral-moment
//! features + 20 histogram counts + 20 relative frequencies.

use crate::dsp::stat_moments;
use crate::features::{log_pos, FeatureConfig, FeatureError};

use super::schema::EMG_LEN;

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

fn sum_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn emg_features(x: &[f64], cfg: &FeatureConfig) -> Result<Vec<f64>, FeatureError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite);
    }
    let n = x.len();
    let m = stat_moments(x)?;
    let mut out = Vec::with_capacity(EMG_LEN);
    out.extend([
        m.mean, m.min, m.max, m.range, m.variance, m.cv, m.skewness, m.kurtosis,
    ]);

    // amplitude features
    let iav: f64 = x.iter().map(|v| v.abs()).sum();
    let mav = iav / n as f64;
    let zcr = x.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as f64;
    let ssc = x
        .windows(3)
        .filter(|w| (w[1] - w[0]) * (w[1] - w[2]) > 0.0)
        .count() as f64;
    let d1 = diff(x);
    let wl: f64 = d1.iter().map(|v| v.abs()).sum();
    let rms = (sum_sq(x) / n as f64).sqrt();
    // ARV equals MAV numerically; both are kept as distinct schema slots
    let rectified: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let arv = rectified.iter().sum::<f64>() / n as f64;
    let theta = cfg.wamp_threshold_factor * m.std;
    let wamp = d1
        .iter()
        .filter(|d| d.abs() >= theta && d.abs() > 0.0)
        .count() as f64;
    out.extend([iav, mav, zcr, ssc, wl, rms, arv, wamp]);

    // time-domain spectral moments
    let d2 = diff(&d1);
    let m0 = sum_sq(x).sqrt();
    let m2 = sum_sq(&d1).sqrt();
    let m4 = sum_sq(&d2).sqrt();
    let sparseness = {
        let denom = (m0 - m2) * (m0 - m4);
        if denom > 0.0 { m0 / denom.sqrt() } else { 0.0 }
    };
    let irregularity = {
        let denom = m0 * m4;
        if denom > 0.0 { m2 / denom.sqrt() } else { 0.0 }
    };
    let wl2: f64 = d2.iter().map(|v| v.abs()).sum();
    let wl_ratio = if wl2 > 0.0 { wl / wl2 } else { 0.0 };
    out.extend([
        log_pos(m0),
        log_pos(m2),
        log_pos(m4),
        log_pos(m0 - m2),
        log_pos(m0 - m4),
        sparseness,
        irregularity,
        wl_ratio,
    ]);

    // 20-bin histogram over [min, max]; a zero-width range collapses to bin 1
    let mut counts = [0usize; 20];
    if m.range > 0.0 {
        for &v in x {
            let idx = (((v - m.min) / m.range) * 20.0) as usize;
            counts[idx.min(19)] += 1;
        }
    } else {
        counts[0] = n;
    }
    out.extend(counts.iter().map(|&c| c as f64));
    out.extend(counts.iter().map(|&c| c as f64 / n as f64));

    debug_assert_eq!(out.len(), EMG_LEN);
    Ok(out)
}
