//! SaO2 family: five moments plus desaturation time percentages.

use crate::dsp::stat_moments;
use crate::features::FeatureError;

pub fn sao2_features(x: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if let Some(&v) = x.iter().find(|v| !(0.0..=100.0).contains(*v)) {
        return Err(FeatureError::Sao2OutOfRange(v));
    }
    let m = stat_moments(x)?;
    let n = x.len() as f64;
    let pct = |pred: fn(f64) -> bool| x.iter().filter(|&&v| pred(v)).count() as f64 / n * 100.0;
    Ok(vec![
        m.mean,
        m.std,
        m.cv,
        m.skewness,
        m.kurtosis,
        pct(|v| v >= 96.0),
        pct(|v| (90.0..96.0).contains(&v)),
        pct(|v| (80.0..90.0).contains(&v)),
        pct(|v| v < 80.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_98() {
        let f = sao2_features(&vec![98.0; 6000]).unwrap();
        assert_eq!(f, vec![98.0, 0.0, 0.0, 0.0, 0.0, 100.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn half_normal_half_moderate() {
        let mut x = vec![98.0; 3000];
        x.extend(vec![85.0; 3000]);
        let f = sao2_features(&x).unwrap();
        assert_eq!(f[5], 50.0);
        assert_eq!(f[6], 0.0);
        assert_eq!(f[7], 50.0);
        assert_eq!(f[8], 0.0);
    }

    #[test]
    fn boundary_96_counts_as_normal() {
        let f = sao2_features(&vec![96.0; 100]).unwrap();
        assert_eq!(f[5], 100.0);
        assert_eq!(f[6], 0.0);
    }

    #[test]
    fn percentages_sum_to_hundred() {
        let x: Vec<f64> = (0..6000).map(|i| 75.0 + (i % 26) as f64).collect();
        let f = sao2_features(&x).unwrap();
        let total: f64 = f[5..9].iter().sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(sao2_features(&[50.0, 120.0]).is_err());
        assert!(sao2_features(&[-1.0]).is_err());
    }
}
