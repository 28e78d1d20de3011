//! EEG family: 119 features from six channels.
//!
//! 60 log band powers + 10 cross-channel mean log band powers
//! + 15 temporal correlations + 6 eigenvalues of the temporal correlation
//! matrix + 15 frequency-domain correlations (log-magnitude spectra over
//! [1, 101) Hz) + 6 eigenvalues of that matrix + 6 per-channel total log
//! powers over [1, 101) Hz + 1 grand mean.

use crate::dsp::{band_power, pearson, periodogram, sym_eigenvalues, Spectrum};
use crate::features::{log_power, FeatureError};

use super::schema::{EEG_BANDS, EEG_LEN};

/// Band power with the upper edge clamped to Nyquist; the Nyquist bin is
/// included when the band extends past it, so the ten bands still tile the
/// full available spectrum above 1 Hz.
fn clamped_band_power(s: &Spectrum, lo: f64, hi: f64) -> Result<f64, FeatureError> {
    let hi = hi.min(s.nyquist_hz() + 1e-9);
    Ok(band_power(s, lo, hi)?)
}

fn correlation_matrix_features(
    vectors: &[Vec<f64>],
    out: &mut Vec<f64>,
) -> Result<(), FeatureError> {
    let k = vectors.len();
    let mut corr = vec![vec![0.0; k]; k];
    for i in 0..k {
        corr[i][i] = 1.0;
        for j in (i + 1)..k {
            let r = pearson(&vectors[i], &vectors[j])?;
            corr[i][j] = r;
            corr[j][i] = r;
            out.push(r);
        }
    }
    out.extend(sym_eigenvalues(&corr)?);
    Ok(())
}

/// Bins of `s` falling in [1, 101) Hz as log10 power.
fn log_magnitude_band(s: &Spectrum) -> Vec<f64> {
    s.power
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = *k as f64 * s.bin_hz;
            (1.0..101.0).contains(&f)
        })
        .map(|(_, &p)| log_power(p))
        .collect()
}

pub fn eeg_features(channels: &[&[f64]; 6], fs: f64) -> Result<Vec<f64>, FeatureError> {
    let len = channels[0].len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(FeatureError::ChannelLengthMismatch);
    }

    let spectra: Vec<Spectrum> = channels
        .iter()
        .map(|c| periodogram(c, fs))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(EEG_LEN);

    // per-channel log band powers (channel-major)
    let mut log_bands = vec![[0.0f64; 10]; 6];
    for (ch, spectrum) in spectra.iter().enumerate() {
        for (b, (_, lo, hi)) in EEG_BANDS.iter().enumerate() {
            log_bands[ch][b] = log_power(clamped_band_power(spectrum, *lo, *hi)?);
        }
        out.extend(log_bands[ch]);
    }

    // cross-channel mean log band power per band
    for b in 0..10 {
        out.push(log_bands.iter().map(|ch| ch[b]).sum::<f64>() / 6.0);
    }

    // temporal correlations + eigenvalues
    let temporal: Vec<Vec<f64>> = channels.iter().map(|c| c.to_vec()).collect();
    correlation_matrix_features(&temporal, &mut out)?;

    // frequency-domain correlations on log-magnitude spectra + eigenvalues
    let log_spectra: Vec<Vec<f64>> = spectra.iter().map(log_magnitude_band).collect();
    correlation_matrix_features(&log_spectra, &mut out)?;

    // per-channel total log power over [1, 101) and the grand mean
    let totals: Vec<f64> = spectra
        .iter()
        .map(|s| Ok(log_power(clamped_band_power(s, 1.0, 101.0)?)))
        .collect::<Result<Vec<f64>, FeatureError>>()?;
    out.extend(&totals);
    out.push(totals.iter().sum::<f64>() / 6.0);

    debug_assert_eq!(out.len(), EEG_LEN);
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

    #[test]
    fn identical_channels_give_unit_correlations() {
        let x = noise(1, 6000);
        let channels = [&x[..], &x[..], &x[..], &x[..], &x[..], &x[..]];
        let f = eeg_features(&channels, 200.0).unwrap();
        // temporal correlations live at offsets 70..85
        for r in &f[70..85] {
            assert!((r - 1.0).abs() < 1e-12);
        }
        // temporal eigenvalues at 85..91: [6, 0, 0, 0, 0, 0]
        assert!((f[85] - 6.0).abs() < 1e-9);
        for eig in &f[86..91] {
            assert!(eig.abs() < 1e-9);
        }
    }

    #[test]
    fn alpha2_dominates_for_ten_hz_sine() {
        let n = 6000;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / 200.0).sin())
            .collect();
        let channels = [&x[..], &x[..], &x[..], &x[..], &x[..], &x[..]];
        let f = eeg_features(&channels, 200.0).unwrap();
        for ch in 0..6 {
            let bands = &f[ch * 10..(ch + 1) * 10];
            let argmax = bands
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(argmax, 3, "alpha2 must dominate for channel {ch}");
        }
    }

    #[test]
    fn length_and_finiteness_on_random_input() {
        let chans: Vec<Vec<f64>> = (0..6).map(|i| noise(i as u64 + 10, 6000)).collect();
        let channels = [
            &chans[0][..],
            &chans[1][..],
            &chans[2][..],
            &chans[3][..],
            &chans[4][..],
            &chans[5][..],
        ];
        let f = eeg_features(&channels, 200.0).unwrap();
        assert_eq!(f.len(), 119);
        assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let a = noise(1, 6000);
        let b = noise(2, 5999);
        let channels = [&a[..], &b[..], &a[..], &a[..], &a[..], &a[..]];
        assert!(eeg_features(&channels, 200.0).is_err());
    }
}
