//! Shared fixtures for the pipeline benchmarks.

use arousal_core::EpochSignals;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// One epoch of white-noise signals at the standard 6000-sample length.
pub fn noise_epoch(seed: u64) -> EpochSignals {
    let n = 6000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut channel = |scale: f64| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                scale * v
            })
            .collect()
    };
    let eeg = std::array::from_fn(|_| channel(1.0));
    let eog = channel(0.5);
    let chin_emg = channel(0.2);
    let abdominal_emg = channel(0.2);
    let chest_emg = channel(0.2);
    let airflow = channel(1.0);
    let sao2 = channel(1.0).into_iter().map(|v| 95.0 + v.clamp(-4.0, 4.0)).collect();
    EpochSignals {
        eeg,
        eog,
        chin_emg,
        abdominal_emg,
        chest_emg,
        airflow,
        sao2,
    }
}

/// A labeled random feature matrix for classifier benchmarks.
pub fn random_rows(seed: u64, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    if i % 2 == 0 && d % 37 == 0 {
                        v + 1.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let labels = (0..n).map(|i| i % 2 == 0).collect();
    (rows, labels)
}
