//! Record data model, validation, and the on-disk directory format.
//!
//! A record directory holds a line-oriented `header.txt` (`subject`, `fs`,
//! `n`, `channels`), one raw little-endian float32 file per channel
//! (`<role>.f32`) and a raw signed-byte annotation file (`annotations.i8`).

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::SAMPLING_RATE_HZ;

/// Physiological role of a channel within a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelRole {
    Eeg1,
    Eeg2,
    Eeg3,
    Eeg4,
    Eeg5,
    Eeg6,
    Eog,
    ChinEmg,
    AbdominalEmg,
    ChestEmg,
    Airflow,
    SaO2,
    /// Ingested and stored but never consumed by feature extraction.
    Ecg,
}

impl ChannelRole {
    /// All roles in canonical order.
    pub const ALL: [ChannelRole; 13] = [
        ChannelRole::Eeg1,
        ChannelRole::Eeg2,
        ChannelRole::Eeg3,
        ChannelRole::Eeg4,
        ChannelRole::Eeg5,
        ChannelRole::Eeg6,
        ChannelRole::Eog,
        ChannelRole::ChinEmg,
        ChannelRole::AbdominalEmg,
        ChannelRole::ChestEmg,
        ChannelRole::Airflow,
        ChannelRole::SaO2,
        ChannelRole::Ecg,
    ];

    /// Roles a record must contain (everything except optional ECG).
    pub const REQUIRED: [ChannelRole; 12] = [
        ChannelRole::Eeg1,
        ChannelRole::Eeg2,
        ChannelRole::Eeg3,
        ChannelRole::Eeg4,
        ChannelRole::Eeg5,
        ChannelRole::Eeg6,
        ChannelRole::Eog,
        ChannelRole::ChinEmg,
        ChannelRole::AbdominalEmg,
        ChannelRole::ChestEmg,
        ChannelRole::Airflow,
        ChannelRole::SaO2,
    ];

    /// The six EEG roles in channel-index order.
    pub const EEG: [ChannelRole; 6] = [
        ChannelRole::Eeg1,
        ChannelRole::Eeg2,
        ChannelRole::Eeg3,
        ChannelRole::Eeg4,
        ChannelRole::Eeg5,
        ChannelRole::Eeg6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelRole::Eeg1 => "eeg1",
            ChannelRole::Eeg2 => "eeg2",
            ChannelRole::Eeg3 => "eeg3",
            ChannelRole::Eeg4 => "eeg4",
            ChannelRole::Eeg5 => "eeg5",
            ChannelRole::Eeg6 => "eeg6",
            ChannelRole::Eog => "eog",
            ChannelRole::ChinEmg => "chin_emg",
            ChannelRole::AbdominalEmg => "abdominal_emg",
            ChannelRole::ChestEmg => "chest_emg",
            ChannelRole::Airflow => "airflow",
            ChannelRole::SaO2 => "sao2",
            ChannelRole::Ecg => "ecg",
        }
    }

    pub fn from_str_name(s: &str) -> Option<ChannelRole> {
        ChannelRole::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl std::fmt::Display for ChannelRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Multichannel 200 Hz signal container plus a sample-wise annotation
/// vector with values 1 (arousal), 0 (non-arousal), -1 (undefined).
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub subject_id: String,
    pub sampling_rate: u32,
    pub channels: BTreeMap<ChannelRole, Vec<f32>>,
    pub annotations: Vec<i8>,
}

impl Record {
    /// Sample count N.
    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn channel(&self, role: ChannelRole) -> Option<&[f32]> {
        self.channels.get(&role).map(|v| v.as_slice())
    }
}

/// Outcome of `validate_record`: hard violations plus warning-level notes.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid record: {0}")]
    Invalid(String),
    #[error("bad header {path}: {reason}")]
    BadHeader { path: PathBuf, reason: String },
    #[error("missing required channel {role}")]
    MissingChannel { role: ChannelRole },
    #[error("channel {role}: header declares {expected} samples but file holds {actual}")]
    LengthMismatch {
        role: String,
        expected: usize,
        actual: usize,
    },
    #[error("annotation value {value} at sample {index} outside {{-1,0,1}}")]
    InvalidAnnotation { index: usize, value: i8 },
}

fn io_err(path: &Path, source: std::io::Error) -> RecordError {
    RecordError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Checks every record invariant and reports all violations at once.
pub fn validate_record(record: &Record) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = record.annotations.len();

    if record.sampling_rate != SAMPLING_RATE_HZ {
        report.violations.push(format!(
            "sampling_rate is {} Hz, must be {} Hz",
            record.sampling_rate, SAMPLING_RATE_HZ
        ));
    }

    for role in ChannelRole::REQUIRED {
        if !record.channels.contains_key(&role) {
            report
                .violations
                .push(format!("missing required channel {role}"));
        }
    }

    for (role, signal) in &record.channels {
        if signal.len() != n {
            report.violations.push(format!(
                "channel {role} has {} samples, annotations have {n}",
                signal.len()
            ));
        }
    }

    if let Some(sao2) = record.channel(ChannelRole::SaO2) {
        if let Some((i, v)) = sao2
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=100.0).contains(*v))
        {
            report.violations.push(format!(
                "sao2 value {v} at sample {i} outside [0, 100]"
            ));
        }
    }

    if let Some((i, v)) = record
        .annotations
        .iter()
        .enumerate()
        .find(|(_, v)| !matches!(**v, -1 | 0 | 1))
    {
        report.violations.push(format!(
            "annotation value {v} at sample {i} outside {{-1,0,1}}"
        ));
    }

    if n > 0 && record.annotations.iter().all(|&a| a == -1) {
        report
            .warnings
            .push("annotation vector is entirely undefined".to_string());
    }

    report
}

/// Writes `record` as a directory under `dir`, named by subject id.
pub fn write_record(record: &Record, dir: &Path) -> Result<PathBuf, RecordError> {
    let report = validate_record(record);
    if !report.is_valid() {
        return Err(RecordError::Invalid(report.violations.join("; ")));
    }

    let out = dir.join(&record.subject_id);
    fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;

    let roles: Vec<ChannelRole> = ChannelRole::ALL
        .into_iter()
        .filter(|r| record.channels.contains_key(r))
        .collect();
    let header = format!(
        "subject={}\nfs={}\nn={}\nchannels={}\n",
        record.subject_id,
        record.sampling_rate,
        record.len(),
        roles
            .iter()
            .map(|r| r.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    let header_path = out.join("header.txt");
    fs::write(&header_path, header).map_err(|e| io_err(&header_path, e))?;

    for role in &roles {
        let signal = &record.channels[role];
        let mut bytes = Vec::with_capacity(signal.len() * 4);
        for v in signal {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let path = out.join(format!("{role}.f32"));
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    }

    let ann_bytes: Vec<u8> = record.annotations.iter().map(|&a| a as u8).collect();
    let ann_path = out.join("annotations.i8");
    fs::write(&ann_path, ann_bytes).map_err(|e| io_err(&ann_path, e))?;

    Ok(out)
}

/// Reads and validates a record directory written by `write_record`.
pub fn read_record(path: &Path) -> Result<Record, RecordError> {
    let header_path = path.join("header.txt");
    let header = fs::read_to_string(&header_path).map_err(|e| io_err(&header_path, e))?;

    let mut subject = None;
    let mut fs_hz = None;
    let mut n = None;
    let mut roles: Option<Vec<ChannelRole>> = None;
    for line in header.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| RecordError::BadHeader {
            path: header_path.clone(),
            reason: format!("line without '=': {line}"),
        })?;
        match key {
            "subject" => subject = Some(value.to_string()),
            "fs" => {
                fs_hz = Some(value.parse::<u32>().map_err(|_| RecordError::BadHeader {
                    path: header_path.clone(),
                    reason: format!("bad fs: {value}"),
                })?)
            }
            "n" => {
                n = Some(value.parse::<usize>().map_err(|_| RecordError::BadHeader {
                    path: header_path.clone(),
                    reason: format!("bad n: {value}"),
                })?)
            }
            "channels" => {
                let mut parsed = Vec::new();
                for name in value.split(',') {
                    parsed.push(ChannelRole::from_str_name(name).ok_or_else(|| {
                        RecordError::BadHeader {
                            path: header_path.clone(),
                            reason: format!("unknown channel role: {name}"),
                        }
                    })?);
                }
                roles = Some(parsed);
            }
            other => {
                return Err(RecordError::BadHeader {
                    path: header_path.clone(),
                    reason: format!("unknown key: {other}"),
                })
            }
        }
    }
    let missing = |k: &str| RecordError::BadHeader {
        path: header_path.clone(),
        reason: format!("missing key: {k}"),
    };
    let subject = subject.ok_or_else(|| missing("subject"))?;
    let fs_hz = fs_hz.ok_or_else(|| missing("fs"))?;
    let n = n.ok_or_else(|| missing("n"))?;
    let roles = roles.ok_or_else(|| missing("channels"))?;

    for required in ChannelRole::REQUIRED {
        if !roles.contains(&required) {
            return Err(RecordError::MissingChannel { role: required });
        }
    }

    let mut channels = BTreeMap::new();
    for role in roles {
        let file = path.join(format!("{role}.f32"));
        let mut bytes = Vec::new();
        fs::File::open(&file)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| io_err(&file, e))?;
        if bytes.len() != n * 4 {
            return Err(RecordError::LengthMismatch {
                role: role.as_str().to_string(),
                expected: n,
                actual: bytes.len() / 4,
            });
        }
        let signal: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        channels.insert(role, signal);
    }

    let ann_path = path.join("annotations.i8");
    let ann_bytes = fs::read(&ann_path).map_err(|e| io_err(&ann_path, e))?;
    if ann_bytes.len() != n {
        return Err(RecordError::LengthMismatch {
            role: "annotations".to_string(),
            expected: n,
            actual: ann_bytes.len(),
        });
    }
    let mut annotations = Vec::with_capacity(n);
    for (index, &b) in ann_bytes.iter().enumerate() {
        let value = b as i8;
        if !matches!(value, -1 | 0 | 1) {
            return Err(RecordError::InvalidAnnotation { index, value });
        }
        annotations.push(value);
    }

    let record = Record {
        subject_id: subject,
        sampling_rate: fs_hz,
        channels,
        annotations,
    };
    let report = validate_record(&record);
    if !report.is_valid() {
        return Err(RecordError::Invalid(report.violations.join("; ")));
    }
    Ok(record)
}

/// Convenience writer used by tests and the CLI: one probe record in memory.
#[cfg(test)]
pub(crate) fn test_record(n: usize) -> Record {
    let mut channels = BTreeMap::new();
    for role in ChannelRole::REQUIRED {
        let base = if role == ChannelRole::SaO2 { 97.0 } else { 0.0 };
        channels.insert(role, (0..n).map(|i| base + (i as f32 * 0.001).sin()).collect());
    }
    Record {
        subject_id: "t001".to_string(),
        sampling_rate: SAMPLING_RATE_HZ,
        channels,
        annotations: vec![0; n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_record_has_empty_report() {
        let r = test_record(6000);
        let report = validate_record(&r);
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn sao2_out_of_range_is_a_violation() {
        let mut r = test_record(6000);
        r.channels.get_mut(&ChannelRole::SaO2).unwrap()[10] = 120.0;
        let report = validate_record(&r);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("sao2"));
    }

    #[test]
    fn all_undefined_is_valid_with_warning() {
        let mut r = test_record(6000);
        r.annotations = vec![-1; 6000];
        let report = validate_record(&r);
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn mismatched_channel_length_rejected_before_write() {
        let mut r = test_record(6000);
        r.channels.get_mut(&ChannelRole::Eeg1).unwrap().pop();
        let dir = tempfile::tempdir().unwrap();
        let err = write_record(&r, dir.path()).unwrap_err();
        assert!(matches!(err, RecordError::Invalid(_)));
        assert!(!dir.path().join("t001").exists());
    }

    #[test]
    fn write_produces_expected_layout() {
        let r = test_record(12000);
        let dir = tempfile::tempdir().unwrap();
        let out = write_record(&r, dir.path()).unwrap();
        assert!(out.join("header.txt").exists());
        for role in ChannelRole::REQUIRED {
            assert!(out.join(format!("{role}.f32")).exists());
        }
        assert!(out.join("annotations.i8").exists());
        // 1 header + 12 channels + 1 annotation file
        assert_eq!(fs::read_dir(&out).unwrap().count(), 14);
    }

    #[test]
    fn roundtrip_preserves_record() {
        let mut r = test_record(6000);
        r.annotations[100..200].fill(1);
        r.annotations[300..350].fill(-1);
        let dir = tempfile::tempdir().unwrap();
        let out = write_record(&r, dir.path()).unwrap();
        let back = read_record(&out).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn truncated_channel_file_is_length_mismatch() {
        let r = test_record(6000);
        let dir = tempfile::tempdir().unwrap();
        let out = write_record(&r, dir.path()).unwrap();
        let f = out.join("eeg1.f32");
        let bytes = fs::read(&f).unwrap();
        fs::write(&f, &bytes[..bytes.len() - 4]).unwrap();
        let err = read_record(&out).unwrap_err();
        assert!(matches!(err, RecordError::LengthMismatch { .. }));
    }

    #[test]
    fn invalid_annotation_byte_rejected() {
        let r = test_record(6000);
        let dir = tempfile::tempdir().unwrap();
        let out = write_record(&r, dir.path()).unwrap();
        let f = out.join("annotations.i8");
        let mut bytes = fs::read(&f).unwrap();
        bytes[42] = 2;
        fs::write(&f, bytes).unwrap();
        let err = read_record(&out).unwrap_err();
        assert!(matches!(
            err,
            RecordError::InvalidAnnotation { index: 42, value: 2 }
        ));
    }

    #[test]
    fn missing_required_channel_rejected() {
        let r = test_record(6000);
        let dir = tempfile::tempdir().unwrap();
        let out = write_record(&r, dir.path()).unwrap();
        let header = fs::read_to_string(out.join("header.txt"))
            .unwrap()
            .replace("eog,", "");
        fs::write(out.join("header.txt"), header).unwrap();
        let err = read_record(&out).unwrap_err();
        assert!(matches!(
            err,
            RecordError::MissingChannel {
                role: ChannelRole::Eog
            }
        ));
    }
}
