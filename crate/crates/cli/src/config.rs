//! Pipeline configuration: defaults, `key=value` config files, and flag
//! overrides. Flags always win over the file; unknown keys are rejected.

use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub epoch_seconds: u32,
    pub test_overlap: f64,
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
    pub wamp_threshold_factor: f64,
    pub eog_smooth_window: usize,
    pub airflow_smooth_window: usize,
    pub xcorr_max_lag_s: f64,
    /// 0 means "let the runtime pick".
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            epoch_seconds: 30,
            test_overlap: 0.5,
            trees: 30,
            max_depth: 20,
            min_leaf: 1,
            seed: 0,
            wamp_threshold_factor: 0.5,
            eog_smooth_window: 51,
            airflow_smooth_window: 201,
            xcorr_max_lag_s: 5.0,
            threads: 0,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl PipelineConfig {
    pub fn feature_config(&self) -> arousal_core::FeatureConfig {
        arousal_core::FeatureConfig {
            wamp_threshold_factor: self.wamp_threshold_factor,
            eog_smooth_window: self.eog_smooth_window,
            airflow_smooth_window: self.airflow_smooth_window,
            xcorr_max_lag_s: self.xcorr_max_lag_s,
        }
    }

    pub fn load(path: &Path) -> Result<PipelineConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(&text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
                v.parse()
                    .map_err(|_| format!("bad value for {key}: {v:?}"))
            }
            match key {
                "epoch_seconds" => self.epoch_seconds = parse(key, value).map_err(err)?,
                "test_overlap" => self.test_overlap = parse(key, value).map_err(err)?,
                "trees" => self.trees = parse(key, value).map_err(err)?,
                "max_depth" => self.max_depth = parse(key, value).map_err(err)?,
                "min_leaf" => self.min_leaf = parse(key, value).map_err(err)?,
                "seed" => self.seed = parse(key, value).map_err(err)?,
                "wamp_threshold_factor" => {
                    self.wamp_threshold_factor = parse(key, value).map_err(err)?
                }
                "eog_smooth_window" => self.eog_smooth_window = parse(key, value).map_err(err)?,
                "airflow_smooth_window" => {
                    self.airflow_smooth_window = parse(key, value).map_err(err)?
                }
                "xcorr_max_lag_s" => self.xcorr_max_lag_s = parse(key, value).map_err(err)?,
                "threads" => self.threads = parse(key, value).map_err(err)?,
                other => return Err(err(format!("unknown key: {other}"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.epoch_seconds == 0 {
            return Err("epoch_seconds must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.test_overlap) {
            return Err(format!(
                "test_overlap must be in [0, 1), got {}",
                self.test_overlap
            ));
        }
        if self.trees == 0 {
            return Err("trees must be positive".to_string());
        }
        if self.max_depth == 0 {
            return Err("max_depth must be positive".to_string());
        }
        if self.min_leaf == 0 {
            return Err("min_leaf must be positive".to_string());
        }
        if self.eog_smooth_window % 2 == 0 || self.airflow_smooth_window % 2 == 0 {
            return Err("smoothing windows must be odd".to_string());
        }
        if !(self.wamp_threshold_factor > 0.0) {
            return Err("wamp_threshold_factor must be positive".to_string());
        }
        if !(self.xcorr_max_lag_s > 0.0) {
            return Err("xcorr_max_lag_s must be positive".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_keys_and_comments() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text("# comment\ntrees = 12\nseed=9 # trailing\n\ntest_overlap=0.25\n")
            .unwrap();
        assert_eq!(cfg.trees, 12);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.test_overlap, 0.25);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = PipelineConfig::default();
        let err = cfg.apply_text("tres=12\n").unwrap_err();
        assert!(err.message.contains("unknown key"));
        assert_eq!(err.line, 1);
    }

    #[test]
    fn bad_value_rejected() {
        let mut cfg = PipelineConfig::default();
        assert!(cfg.apply_text("trees=many\n").is_err());
        assert!(cfg.apply_text("just a line\n").is_err());
    }
}
