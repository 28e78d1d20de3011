//! Interaction family: best cross-correlation lags (in seconds) between the
//! respiratory/EMG/SaO2 signals (10 pairs) and between the six EEG channels
//! (15 pairs).

use crate::dsp::{moving_average, xcorr_max_lag};
use crate::features::{EpochSignals, FeatureConfig, FeatureError};

use super::schema::INTERACTION_LEN;

pub fn interaction_features(
    epoch: &EpochSignals,
    fs: f64,
    cfg: &FeatureConfig,
) -> Result<Vec<f64>, FeatureError> {
    let max_lag = (cfg.xcorr_max_lag_s * fs).round() as usize;
    let smoothed_airflow = moving_average(&epoch.airflow, cfg.airflow_smooth_window)?;

    // fixed pair order over [sao2, airflow, chest, abd, chin]
    let non_eeg: [&[f64]; 5] = [
        &epoch.sao2,
        &smoothed_airflow,
        &epoch.chest_emg,
        &epoch.abdominal_emg,
        &epoch.chin_emg,
    ];
    let mut out = Vec::with_capacity(INTERACTION_LEN);
    for i in 0..non_eeg.len() {
        for j in (i + 1)..non_eeg.len() {
            let lag = xcorr_max_lag(non_eeg[i], non_eeg[j], max_lag)?;
            out.push(lag as f64 / fs);
        }
    }
    for i in 0..6 {
        for j in (i + 1)..6 {
            let lag = xcorr_max_lag(&epoch.eeg[i], &epoch.eeg[j], max_lag)?;
            out.push(lag as f64 / fs);
        }
    }
    debug_assert_eq!(out.len(), INTERACTION_LEN);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::Distribution;

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| rand_distr::StandardNormal.sample(&mut rng))
            .collect()
    }

    fn epoch_from(signals: [Vec<f64>; 11], sao2: Vec<f64>) -> EpochSignals {
        let [e1, e2, e3, e4, e5, e6, eog, chin, abd, chest, airflow] = signals;
        EpochSignals {
            eeg: [e1, e2, e3, e4, e5, e6],
            eog,
            chin_emg: chin,
            abdominal_emg: abd,
            chest_emg: chest,
            airflow,
            sao2,
        }
    }

    #[test]
    fn all_identical_channels_give_zero_lags() {
        let x = noise(3, 6000);
        let sao2: Vec<f64> = x.iter().map(|v| 95.0 + v.clamp(-3.0, 3.0)).collect();
        let epoch = epoch_from(
            [
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
                x.clone(),
            ],
            sao2,
        );
        let f = interaction_features(&epoch, 200.0, &FeatureConfig::default()).unwrap();
        assert_eq!(f.len(), 25);
        // pairs 0, 4, 5, 6 involve the smoothed airflow channel, so their
        // peak lag against raw white noise is not pinned to zero; everything
        // else compares identical signals and must peak at lag 0
        for (i, &v) in f.iter().enumerate() {
            if matches!(i, 0 | 4 | 5 | 6) {
                assert!(v.abs() <= 5.0, "airflow pair {i} lag {v}");
            } else {
                assert_eq!(v, 0.0, "pair {i} lag {v}");
            }
        }
    }

    #[test]
    fn delayed_chest_vs_abd_detected() {
        let base = noise(8, 6000);
        // chest[n] = abd[n - 200]
        let abd = base.clone();
        let mut chest = vec![0.0; 6000];
        for n in 200..6000 {
            chest[n] = abd[n - 200];
        }
        let sao2 = vec![97.0; 6000];
        let epoch = epoch_from(
            [
                noise(10, 6000),
                noise(11, 6000),
                noise(12, 6000),
                noise(13, 6000),
                noise(14, 6000),
                noise(15, 6000),
                noise(16, 6000),
                noise(17, 6000),
                abd,
                chest,
                noise(18, 6000),
            ],
            sao2,
        );
        let f = interaction_features(&epoch, 200.0, &FeatureConfig::default()).unwrap();
        // chest-abd pair is index 7; chest trails abd by 200 samples = 1.0 s
        assert!((f[7].abs() - 1.0).abs() < 1e-12, "lag {}", f[7]);
    }
}
