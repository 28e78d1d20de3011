//! Shared numerical kernels: periodogram, band power, moving average,
//! descriptive moments, correlation, cross-correlation lag, and symmetric
//! eigenvalues.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("input too short: {actual} samples, need at least {min}")]
    TooShort { min: usize, actual: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("invalid band [{lo}, {hi}) for nyquist {nyquist}")]
    InvalidBand { lo: f64, hi: f64, nyquist: f64 },
    #[error("moving average window must be odd and positive, got {0}")]
    InvalidWindow(usize),
    #[error("max_lag {max_lag} must be smaller than signal length {len}")]
    MaxLagTooLarge { max_lag: usize, len: usize },
    #[error("matrix is not symmetric within tolerance")]
    Asymmetric,
}

/// One-sided power spectrum. `power[k]` is the power at `k * bin_hz`,
/// with interior bins doubled so the total equals the mean square of the
/// mean-removed signal.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub bin_hz: f64,
    pub power: Vec<f64>,
    nyquist_hz: f64,
}

impl Spectrum {
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.nyquist_hz
    }
}

thread_local! {
    static FFT_CACHE: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn fft_inplace(buf: &mut [Complex<f64>], inverse: bool) {
    FFT_CACHE.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        let fft = cache
            .entry((buf.len(), inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(buf.len())
                } else {
                    planner.plan_fft_forward(buf.len())
                }
            })
            .clone();
        fft.process(buf);
    });
}

/// Mean-removed, untapered periodogram.
///
/// Total power equals the population variance of the input exactly, which
/// keeps band powers directly comparable to time-domain variance.
pub fn periodogram(x: &[f64], fs: f64) -> Result<Spectrum, DspError> {
    if x.len() < 16 {
        return Err(DspError::TooShort { min: 16, actual: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DspError::NonFinite);
    }
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
    fft_inplace(&mut buf, false);

    let half = n / 2;
    let norm = 1.0 / (n as f64 * n as f64);
    let mut power = Vec::with_capacity(half + 1);
    for (k, c) in buf.iter().take(half + 1).enumerate() {
        let p = c.norm_sqr() * norm;
        // double interior bins; DC and (for even n) Nyquist appear once
        let doubled = k != 0 && !(n % 2 == 0 && k == half);
        power.push(if doubled { 2.0 * p } else { p });
    }
    Ok(Spectrum {
        bin_hz: fs / n as f64,
        power,
        nyquist_hz: fs / 2.0,
    })
}

/// Sum of spectral power over bins with `lo <= f < hi`.
pub fn band_power(s: &Spectrum, lo_hz: f64, hi_hz: f64) -> Result<f64, DspError> {
    let nyquist = s.nyquist_hz;
    if !(0.0 <= lo_hz && lo_hz <= hi_hz && hi_hz <= nyquist + 1e-9) {
        return Err(DspError::InvalidBand {
            lo: lo_hz,
            hi: hi_hz,
            nyquist,
        });
    }
    // half-open bin selection with a tolerance against f64 edge jitter
    let k_lo = ((lo_hz / s.bin_hz) - 1e-9).ceil().max(0.0) as usize;
    let k_hi = (((hi_hz / s.bin_hz) - 1e-9).ceil() as usize).min(s.power.len());
    if k_lo >= k_hi {
        return Ok(0.0);
    }
    Ok(s.power[k_lo..k_hi].iter().sum())
}

/// Centered moving average with edge truncation; output length equals input.
pub fn moving_average(x: &[f64], window: usize) -> Result<Vec<f64>, DspError> {
    if window == 0 || window % 2 == 0 {
        return Err(DspError::InvalidWindow(window));
    }
    let n = x.len();
    let half = window / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v;
        prefix.push(acc);
    }
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect())
}

/// Descriptive moments with population (1/N) conventions. Kurtosis is
/// non-excess (Gaussian ~ 3). Degenerate inputs (zero variance or zero
/// mean for cv) yield 0 instead of NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatMoments {
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub mean: f64,
    pub median: f64,
    pub variance: f64,
    pub std: f64,
    pub cv: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

pub fn stat_moments(x: &[f64]) -> Result<StatMoments, DspError> {
    if x.is_empty() {
        return Err(DspError::Empty);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DspError::NonFinite);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        min = min.min(v);
        max = max.max(v);
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let std = m2.sqrt();
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / (std * m2), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };
    let cv = if std > 0.0 && mean != 0.0 {
        std / mean.abs()
    } else {
        0.0
    };
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    Ok(StatMoments {
        min,
        max,
        range: max - min,
        mean,
        median,
        variance: m2,
        std,
        cv,
        skewness,
        kurtosis,
    })
}

/// Pearson correlation; 0 when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, DspError> {
    if x.len() != y.len() {
        return Err(DspError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 2 {
        return Err(DspError::TooShort { min: 2, actual: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    let (mut sqx, mut sqy) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
        sqx += a * a;
        sqy += b * b;
    }
    // variance at rounding-noise level relative to signal power counts as
    // degenerate (a constant signal leaves identical mean residues behind)
    if sxx <= sqx * 1e-24 || syy <= sqy * 1e-24 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Lag (in samples) maximizing the absolute mean-removed cross-correlation
/// over [-max_lag, +max_lag]. Ties resolve to the smallest |lag|, then to
/// the negative lag. Positive lag means y lags x (y[n+lag] aligns x[n]).
pub fn xcorr_max_lag(x: &[f64], y: &[f64], max_lag: usize) -> Result<i64, DspError> {
    if x.len() != y.len() {
        return Err(DspError::LengthMismatch { a: x.len(), b: y.len() });
    }
    let n = x.len();
    if max_lag >= n {
        return Err(DspError::MaxLagTooLarge { max_lag, len: n });
    }
    let corr = xcorr_all_lags(x, y, max_lag);
    let mut best_lag = 0i64;
    let mut best = f64::NEG_INFINITY;
    for lag in lag_candidates(max_lag as i64) {
        let value = corr[(lag + max_lag as i64) as usize].abs();
        if value > best {
            best = value;
            best_lag = lag;
        }
    }
    Ok(best_lag)
}

/// Candidate lags ordered by the tie-break rule: 0, -1, +1, -2, +2, ...
fn lag_candidates(max_lag: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=max_lag).flat_map(|l| [-l, l]))
}

/// FFT-based cross-correlation; index i holds lag i - max_lag.
fn xcorr_all_lags(x: &[f64], y: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let m = (n + max_lag + 1).next_power_of_two();

    let mut fx = vec![Complex::new(0.0, 0.0); m];
    let mut fy = vec![Complex::new(0.0, 0.0); m];
    for i in 0..n {
        fx[i] = Complex::new(x[i] - mx, 0.0);
        fy[i] = Complex::new(y[i] - my, 0.0);
    }
    fft_inplace(&mut fx, false);
    fft_inplace(&mut fy, false);
    for (a, b) in fx.iter_mut().zip(&fy) {
        *a = a.conj() * b;
    }
    fft_inplace(&mut fx, true);

    let scale = 1.0 / m as f64;
    (-(max_lag as i64)..=max_lag as i64)
        .map(|lag| {
            let idx = lag.rem_euclid(m as i64) as usize;
            fx[idx].re * scale
        })
        .collect()
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
/// sorted descending.
pub fn sym_eigenvalues(m: &[Vec<f64>]) -> Result<Vec<f64>, DspError> {
    let k = m.len();
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for i in 0..k {
        if m[i].len() != k {
            return Err(DspError::LengthMismatch { a: m[i].len(), b: k });
        }
        for j in 0..k {
            if (m[i][j] - m[j][i]).abs() > 1e-9 * scale {
                return Err(DspError::Asymmetric);
            }
        }
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..k {
                    let api = a[p][i];
                    let aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..k).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(eig)
}
