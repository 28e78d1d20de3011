//! Frozen 428-entry feature schema: names, families, and offsets.
//!
//! The schema is the contract between the extractor, the model database
//! (via its hash) and the `features` CSV dump. Changing any name or the
//! ordering is a breaking change and must bump `SCHEMA_VERSION`.

use once_cell::sync::Lazy;

use crate::hash::fnv1a64;

pub const SCHEMA_VERSION: &str = "1";

/// Total feature count.
pub const FEATURE_COUNT: usize = 428;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Eeg,
    SaO2,
    ChinEmg,
    AbdominalEmg,
    ChestEmg,
    Eog,
    Airflow,
    Interaction,
}

/// Family sizes and fixed offsets into the feature vector.
pub const EEG_LEN: usize = 119;
pub const SAO2_LEN: usize = 9;
pub const EMG_LEN: usize = 64;
pub const EOG_LEN: usize = 15;
pub const AIRFLOW_LEN: usize = 68;
pub const INTERACTION_LEN: usize = 25;

pub const EEG_OFFSET: usize = 0;
pub const SAO2_OFFSET: usize = 119;
pub const CHIN_EMG_OFFSET: usize = 128;
pub const ABDOMINAL_EMG_OFFSET: usize = 192;
pub const CHEST_EMG_OFFSET: usize = 256;
pub const EOG_OFFSET: usize = 320;
pub const AIRFLOW_OFFSET: usize = 335;
pub const INTERACTION_OFFSET: usize = 403;

/// The ten EEG band names paired with their half-open [lo, hi) ranges in Hz.
/// Together the bands tile [1, 101) Hz.
pub const EEG_BANDS: [(&str, f64, f64); 10] = [
    ("delta", 1.0, 4.0),
    ("theta", 4.0, 8.0),
    ("alpha1", 8.0, 10.0),
    ("alpha2", 10.0, 13.0),
    ("beta1", 13.0, 18.0),
    ("beta2", 18.0, 31.0),
    ("gamma1", 31.0, 41.0),
    ("gamma2", 41.0, 51.0),
    ("high1", 51.0, 71.0),
    ("high2", 71.0, 101.0),
];

#[derive(Debug, Clone)]
pub struct FeatureDef {
    pub name: String,
    pub family: Family,
}

fn emg_names(prefix: &str) -> Vec<String> {
    let mut names = Vec::with_capacity(EMG_LEN);
    for stat in [
        "mean", "min", "max", "range", "variance", "cv", "skewness", "kurtosis",
    ] {
        names.push(format!("{prefix}_{stat}"));
    }
    for amp in ["iav", "mav", "zcr", "ssc", "wl", "rms", "arv", "wamp"] {
        names.push(format!("{prefix}_{amp}"));
    }
    for mom in [
        "log_m0",
        "log_m2",
        "log_m4",
        "log_m0_minus_m2",
        "log_m0_minus_m4",
        "sparseness",
        "irregularity",
        "wl_ratio",
    ] {
        names.push(format!("{prefix}_{mom}"));
    }
    for b in 1..=20 {
        names.push(format!("{prefix}_hist_count_{b:02}"));
    }
    for b in 1..=20 {
        names.push(format!("{prefix}_hist_freq_{b:02}"));
    }
    names
}

fn build_schema() -> Vec<FeatureDef> {
    let mut defs: Vec<FeatureDef> = Vec::with_capacity(FEATURE_COUNT);
    let mut push = |family: Family, name: String| defs.push(FeatureDef { name, family });

    // EEG: 60 + 10 + 15 + 6 + 15 + 6 + 6 + 1 = 119
    for ch in 1..=6 {
        for (band, _, _) in EEG_BANDS {
            push(Family::Eeg, format!("eeg{ch}_logpow_{band}"));
        }
    }
    for (band, _, _) in EEG_BANDS {
        push(Family::Eeg, format!("eeg_mean_logpow_{band}"));
    }
    for i in 1..=6 {
        for j in (i + 1)..=6 {
            push(Family::Eeg, format!("eeg_tcorr_{i}_{j}"));
        }
    }
    for k in 1..=6 {
        push(Family::Eeg, format!("eeg_tcorr_eig{k}"));
    }
    for i in 1..=6 {
        for j in (i + 1)..=6 {
            push(Family::Eeg, format!("eeg_fcorr_{i}_{j}"));
        }
    }
    for k in 1..=6 {
        push(Family::Eeg, format!("eeg_fcorr_eig{k}"));
    }
    for ch in 1..=6 {
        push(Family::Eeg, format!("eeg{ch}_total_logpow"));
    }
    push(Family::Eeg, "eeg_total_logpow_mean".to_string());

    // SaO2: 9
    for name in [
        "sao2_mean",
        "sao2_std",
        "sao2_cv",
        "sao2_skewness",
        "sao2_kurtosis",
        "sao2_pct_ge_96",
        "sao2_pct_90_96",
        "sao2_pct_80_90",
        "sao2_pct_lt_80",
    ] {
        push(Family::SaO2, name.to_string());
    }

    // three EMG channels, 64 each
    for name in emg_names("chin_emg") {
        push(Family::ChinEmg, name);
    }
    for name in emg_names("abdominal_emg") {
        push(Family::AbdominalEmg, name);
    }
    for name in emg_names("chest_emg") {
        push(Family::ChestEmg, name);
    }

    // EOG: 15
    for name in [
        "eog_min",
        "eog_max",
        "eog_range",
        "eog_mean",
        "eog_median",
        "eog_skewness",
        "eog_kurtosis",
        "eog_iav",
        "eog_energy",
        "eog_rms",
        "eog_form_factor",
        "eog_deriv1_std_ratio",
        "eog_deriv2_std_ratio",
        "eog_deriv_iav",
        "eog_std",
    ] {
        push(Family::Eog, name.to_string());
    }

    // Airflow: 4 dedicated + 64 EMG-style on the smoothed waveform
    for name in [
        "airflow_diff_std",
        "airflow_diff_cv",
        "airflow_lag1_autocorr",
        "airflow_area_balance",
    ] {
        push(Family::Airflow, name.to_string());
    }
    for name in emg_names("airflow_smooth") {
        push(Family::Airflow, name);
    }

    // Interaction: 10 non-EEG pairs + 15 EEG pairs, lags in seconds
    let non_eeg = ["sao2", "airflow", "chest", "abd", "chin"];
    for i in 0..non_eeg.len() {
        for j in (i + 1)..non_eeg.len() {
            push(
                Family::Interaction,
                format!("xlag_{}_{}", non_eeg[i], non_eeg[j]),
            );
        }
    }
    for i in 1..=6 {
        for j in (i + 1)..=6 {
            push(Family::Interaction, format!("xlag_eeg{i}_eeg{j}"));
        }
    }

    defs
}

/// The frozen schema, validated once at first use.
pub static SCHEMA: Lazy<Vec<FeatureDef>> = Lazy::new(|| {
    let defs = build_schema();
    assert_eq!(defs.len(), FEATURE_COUNT, "schema size mismatch");
    let mut names: Vec<&str> = defs.iter().map(|d| d.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), FEATURE_COUNT, "duplicate schema names");
    let count = |f: Family| defs.iter().filter(|d| d.family == f).count();
    assert_eq!(count(Family::Eeg), EEG_LEN);
    assert_eq!(count(Family::SaO2), SAO2_LEN);
    assert_eq!(count(Family::ChinEmg), EMG_LEN);
    assert_eq!(count(Family::AbdominalEmg), EMG_LEN);
    assert_eq!(count(Family::ChestEmg), EMG_LEN);
    assert_eq!(count(Family::Eog), EOG_LEN);
    assert_eq!(count(Family::Airflow), AIRFLOW_LEN);
    assert_eq!(count(Family::Interaction), INTERACTION_LEN);
    defs
});

/// Stable fingerprint of the schema version plus every name in order.
pub fn schema_hash() -> u64 {
    let mut joined = String::from(SCHEMA_VERSION);
    for def in SCHEMA.iter() {
        joined.push('|');
        joined.push_str(&def.name);
    }
    fnv1a64(joined.as_bytes())
}

/// Feature names in schema order.
pub fn feature_names() -> Vec<&'static str> {
    SCHEMA.iter().map(|d| d.name.as_str()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_is_complete_and_unique() {
        assert_eq!(SCHEMA.len(), FEATURE_COUNT);
    }

    #[test]
    fn offsets_partition_the_vector() {
        assert_eq!(SAO2_OFFSET, EEG_OFFSET + EEG_LEN);
        assert_eq!(CHIN_EMG_OFFSET, SAO2_OFFSET + SAO2_LEN);
        assert_eq!(ABDOMINAL_EMG_OFFSET, CHIN_EMG_OFFSET + EMG_LEN);
        assert_eq!(CHEST_EMG_OFFSET, ABDOMINAL_EMG_OFFSET + EMG_LEN);
        assert_eq!(EOG_OFFSET, CHEST_EMG_OFFSET + EMG_LEN);
        assert_eq!(AIRFLOW_OFFSET, EOG_OFFSET + EOG_LEN);
        assert_eq!(INTERACTION_OFFSET, AIRFLOW_OFFSET + AIRFLOW_LEN);
        assert_eq!(FEATURE_COUNT, INTERACTION_OFFSET + INTERACTION_LEN);
    }

    #[test]
    fn bands_tile_one_to_hundred_one() {
        let mut edge = 1.0;
        for (_, lo, hi) in EEG_BANDS {
            assert_eq!(lo, edge);
            edge = hi;
        }
        assert_eq!(edge, 101.0);
    }

    #[test]
    fn hash_is_stable_within_a_build() {
        assert_eq!(schema_hash(), schema_hash());
        assert_ne!(schema_hash(), 0);
    }
}
