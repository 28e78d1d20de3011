//! Seeded synthetic polysomnogram generator for desk-scale experiments.
//!
//! Baseline activity is band-limited noise (EEG), low-amplitude noise (EMG),
//! a slow breathing sinusoid (airflow), and SaO2 near 97%. Inside generated
//! arousal intervals the EEG beta band, chin EMG amplitude, and airflow
//! irregularity scale up with `signature_strength`, and SaO2 dips a few
//! percent just before each event. Samples adjacent to events are marked
//! undefined (-1) to exercise exclusion logic downstream.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::record::{ChannelRole, Record};
use crate::SAMPLING_RATE_HZ;

#[derive(Debug, Clone)]
pub struct SynthParams {
    /// Record duration in seconds (>= 60).
    pub duration_s: f64,
    /// Expected arousal events per hour.
    pub arousal_rate: f64,
    /// Mean arousal event length in seconds.
    pub arousal_duration_s: f64,
    /// Gain applied to all arousal signatures; 0 means no signal.
    pub signature_strength: f64,
    /// Seconds of undefined (-1) annotation padded on each side of an event.
    pub undefined_margin_s: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            duration_s: 3600.0,
            arousal_rate: 24.0,
            arousal_duration_s: 15.0,
            signature_strength: 1.0,
            undefined_margin_s: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth params: {0}")]
    InvalidParams(String),
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.duration_s >= 60.0) {
            return Err(SynthError::InvalidParams(format!(
                "duration_s must be >= 60, got {}",
                self.duration_s
            )));
        }
        if !(self.arousal_rate >= 0.0) {
            return Err(SynthError::InvalidParams(format!(
                "arousal_rate must be >= 0, got {}",
                self.arousal_rate
            )));
        }
        if !(self.signature_strength >= 0.0) {
            return Err(SynthError::InvalidParams(format!(
                "signature_strength must be >= 0, got {}",
                self.signature_strength
            )));
        }
        if !(self.arousal_duration_s > 0.0) {
            return Err(SynthError::InvalidParams(format!(
                "arousal_duration_s must be > 0, got {}",
                self.arousal_duration_s
            )));
        }
        if !(self.undefined_margin_s >= 0.0) {
            return Err(SynthError::InvalidParams(format!(
                "undefined_margin_s must be >= 0, got {}",
                self.undefined_margin_s
            )));
        }
        Ok(())
    }
}

const FS: f64 = SAMPLING_RATE_HZ as f64;

/// Beta-band component frequencies (Hz) shared by generator and tests.
const BETA_FREQS: [f64; 7] = [18.0, 20.0, 22.0, 24.0, 26.0, 28.0, 30.0];

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws arousal event intervals as (start, end) sample indices.
fn draw_events(params: &SynthParams, n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut events = Vec::new();
    if params.arousal_rate <= 0.0 {
        return events;
    }
    let mean_gap_s = 3600.0 / params.arousal_rate - params.arousal_duration_s;
    let mean_gap_s = mean_gap_s.max(1.0);
    let mut t_s = 0.0;
    loop {
        let u: f64 = rng.random();
        let gap = -mean_gap_s * (1.0 - u).ln();
        let dur = params.arousal_duration_s * (0.5 + rng.random::<f64>());
        let start = ((t_s + gap) * FS) as usize;
        let end = ((t_s + gap + dur) * FS) as usize;
        if end >= n {
            break;
        }
        t_s += gap + dur;
        events.push((start, end));
    }
    events
}

/// Deterministic synthetic record: a pure function of its parameters.
pub fn synth_record(subject_id: &str, params: &SynthParams) -> Result<Record, SynthError> {
    params.validate()?;
    let n = (params.duration_s * FS) as usize;
    let strength = params.signature_strength;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let events = draw_events(params, n, &mut rng);

    let mut annotations = vec![0i8; n];
    let margin = (params.undefined_margin_s * FS) as usize;
    for &(start, end) in &events {
        annotations[start.saturating_sub(margin)..start].fill(-1);
        let margin_end = (end + margin).min(n);
        annotations[end..margin_end].fill(-1);
    }
    for &(start, end) in &events {
        annotations[start..end].fill(1);
    }

    let in_arousal: Vec<bool> = annotations.iter().map(|&a| a == 1).collect();

    let mut channels = BTreeMap::new();

    // Six EEG channels: white noise + delta/alpha sinusoids + a beta-band
    // component whose amplitude scales up inside arousal intervals.
    for role in ChannelRole::EEG {
        let phi_delta = rng.random::<f64>() * 2.0 * PI;
        let phi_alpha = rng.random::<f64>() * 2.0 * PI;
        let phi_beta: Vec<f64> = (0..BETA_FREQS.len())
            .map(|_| rng.random::<f64>() * 2.0 * PI)
            .collect();
        let mut signal = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / FS;
            let beta_gain = if in_arousal[i] { 1.0 + 1.5 * strength } else { 1.0 };
            let mut beta = 0.0;
            for (f, phi) in BETA_FREQS.iter().zip(&phi_beta) {
                beta += 0.25 * (2.0 * PI * f * t + phi).sin();
            }
            let v = 0.9 * normal(&mut rng)
                + 0.5 * (2.0 * PI * 1.5 * t + phi_delta).sin()
                + 0.7 * (2.0 * PI * 10.0 * t + phi_alpha).sin()
                + beta_gain * beta;
            signal.push(v as f32);
        }
        channels.insert(role, signal);
    }

    // EOG: slow eye-movement sinusoid plus noise.
    {
        let phi = rng.random::<f64>() * 2.0 * PI;
        let signal: Vec<f32> = (0..n)
            .map(|i| {
                let t = i as f64 / FS;
                (0.3 * (2.0 * PI * 0.3 * t + phi).sin() + 0.15 * normal(&mut rng)) as f32
            })
            .collect();
        channels.insert(ChannelRole::Eog, signal);
    }

    // Chin EMG: low-amplitude noise, scaled up inside arousals.
    {
        let signal: Vec<f32> = (0..n)
            .map(|i| {
                let amp = if in_arousal[i] { 0.2 * (1.0 + 1.5 * strength) } else { 0.2 };
                (amp * normal(&mut rng)) as f32
            })
            .collect();
        channels.insert(ChannelRole::ChinEmg, signal);
    }

    // Chest and abdominal EMG: respiration-modulated noise.
    for role in [ChannelRole::ChestEmg, ChannelRole::AbdominalEmg] {
        let phi = rng.random::<f64>() * 2.0 * PI;
        let signal: Vec<f32> = (0..n)
            .map(|i| {
                let t = i as f64 / FS;
                let amp = 0.2 * (1.0 + 0.3 * (2.0 * PI * 0.25 * t + phi).sin());
                (amp * normal(&mut rng)) as f32
            })
            .collect();
        channels.insert(role, signal);
    }

    // Airflow: breathing sinusoid; irregularity increases inside arousals.
    {
        let phi = rng.random::<f64>() * 2.0 * PI;
        let signal: Vec<f32> = (0..n)
            .map(|i| {
                let t = i as f64 / FS;
                let irregular = if in_arousal[i] { 0.5 * strength } else { 0.0 };
                ((2.0 * PI * 0.25 * t + phi).sin()
                    + 0.05 * normal(&mut rng)
                    + irregular * normal(&mut rng)) as f32
            })
            .collect();
        channels.insert(ChannelRole::Airflow, signal);
    }

    // SaO2: near 97% with a dip over the 4 s preceding each event.
    {
        let phi = rng.random::<f64>() * 2.0 * PI;
        let mut signal: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / FS;
                97.0 + 0.3 * (2.0 * PI * 0.01 * t + phi).sin() + 0.1 * normal(&mut rng)
            })
            .collect();
        let dip_len = (4.0 * FS) as usize;
        for &(start, _) in &events {
            let from = start.saturating_sub(dip_len);
            for (k, v) in signal[from..start].iter_mut().enumerate() {
                let progress = (k + 1) as f64 / dip_len as f64;
                *v -= 3.0 * strength * (PI * progress).sin();
            }
        }
        let signal: Vec<f32> = signal
            .into_iter()
            .map(|v| v.clamp(60.0, 100.0) as f32)
            .collect();
        channels.insert(ChannelRole::SaO2, signal);
    }

    // ECG: carried along for schema completeness, never used for features.
    {
        let signal: Vec<f32> = (0..n)
            .map(|i| {
                let t = i as f64 / FS;
                let beat = if (t * 1.1).fract() < 0.02 { 1.0 } else { 0.0 };
                (beat + 0.05 * normal(&mut rng)) as f32
            })
            .collect();
        channels.insert(ChannelRole::Ecg, signal);
    }

    Ok(Record {
        subject_id: subject_id.to_string(),
        sampling_rate: SAMPLING_RATE_HZ,
        channels,
        annotations,
    })
}
