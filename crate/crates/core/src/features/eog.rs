//! EOG family: 15 features on the smoothed signal.

use crate::dsp::{moving_average, stat_moments};
use crate::features::{FeatureConfig, FeatureError};

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

fn pop_std(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

pub fn eog_features(x: &[f64], cfg: &FeatureConfig) -> Result<Vec<f64>, FeatureError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite);
    }
    let s = moving_average(x, cfg.eog_smooth_window)?;
    let m = stat_moments(&s)?;
    let n = s.len() as f64;

    let d1 = diff(&s);
    let d2 = diff(&d1);
    let std_s = m.std;
    let std_d1 = pop_std(&d1);
    let std_d2 = pop_std(&d2);

    let iav: f64 = s.iter().map(|v| v.abs()).sum();
    let energy: f64 = s.iter().map(|v| v * v).sum();
    let rms = (energy / n).sqrt();
    // Hjorth complexity: mobility of the derivative over mobility of the signal
    let form_factor = if std_d1 > 0.0 && std_s > 0.0 {
        (std_d2 / std_d1) / (std_d1 / std_s)
    } else {
        0.0
    };
    let ratio_d1 = if std_s > 0.0 { std_d1 / std_s } else { 0.0 };
    let ratio_d2 = if std_s > 0.0 { std_d2 / std_s } else { 0.0 };
    let deriv_iav: f64 = d1.iter().map(|v| v.abs()).sum();

    Ok(vec![
        m.min, m.max, m.range, m.mean, m.median, m.skewness, m.kurtosis, iav, energy, rms,
        form_factor, ratio_d1, ratio_d2, deriv_iav, std_s,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FeatureConfig {
        FeatureConfig::default()
    }

    #[test]
    fn linear_ramp_kills_second_derivative_ratio() {
        let x: Vec<f64> = (0..6000).map(|i| i as f64 * 0.01).collect();
        let f = eog_features(&x, &cfg()).unwrap();
        // interior of the smoothed ramp is still linear; std of the second
        // derivative is dominated by edge truncation but the ratio stays tiny
        assert!(f[12] < 1e-3, "deriv2 ratio {}", f[12]);
    }

    #[test]
    fn constant_signal_degenerates_to_zero_ratios() {
        let f = eog_features(&vec![1.5; 6000], &cfg()).unwrap();
        assert_eq!(f[10], 0.0); // form factor
        assert_eq!(f[11], 0.0);
        assert_eq!(f[12], 0.0);
        assert_eq!(f[13], 0.0); // deriv IAV
        assert_eq!(f[14], 0.0); // std
    }

    #[test]
    fn length_is_fifteen_on_random_input() {
        use rand::SeedableRng;
        use rand_distr::Distribution;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..6000)
            .map(|_| rand_distr::StandardNormal.sample(&mut rng))
            .collect();
        let f = eog_features(&x, &cfg()).unwrap();
        assert_eq!(f.len(), 15);
        assert!(f.iter().all(|v| v.is_finite()));
    }
}
