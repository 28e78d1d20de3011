//! 30-second epoch segmentation and majority labeling.
//!
//! Training uses non-overlapping windows with the trailing partial window
//! dropped; inference uses 50%-overlap windows with one extra end-anchored
//! window so every sample is covered.

use thiserror::Error;

use crate::record::Record;

/// Half-open sample interval [start, end) of exactly one epoch length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochSpan {
    pub start: usize,
    pub end: usize,
}

impl EpochSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochLabel {
    Arousal,
    NonArousal,
    /// Entire epoch annotated undefined; never used for training.
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledEpoch {
    pub span: EpochSpan,
    /// Always Arousal or NonArousal; excluded epochs are filtered out.
    pub label: EpochLabel,
}

#[derive(Debug, Error)]
pub enum EpochError {
    #[error("record of {record_len} samples is shorter than one epoch ({epoch_len})")]
    TooShort { record_len: usize, epoch_len: usize },
    #[error("annotation slice of {actual} samples, expected {expected}")]
    WrongSliceLength { expected: usize, actual: usize },
}

fn epoch_len_samples(fs: u32, epoch_s: u32) -> usize {
    (fs * epoch_s) as usize
}

/// Non-overlapping training spans; a trailing partial window is dropped.
pub fn segment_train(
    record_len: usize,
    fs: u32,
    epoch_s: u32,
) -> Result<Vec<EpochSpan>, EpochError> {
    let len = epoch_len_samples(fs, epoch_s);
    if record_len < len {
        return Err(EpochError::TooShort {
            record_len,
            epoch_len: len,
        });
    }
    Ok((0..=record_len - len)
        .step_by(len)
        .map(|start| EpochSpan {
            start,
            end: start + len,
        })
        .collect())
}

/// Overlapping test spans (default 50%), plus one end-anchored span when the
/// regular grid leaves a tail uncovered.
pub fn segment_test(
    record_len: usize,
    fs: u32,
    epoch_s: u32,
    overlap: f64,
) -> Result<Vec<EpochSpan>, EpochError> {
    let len = epoch_len_samples(fs, epoch_s);
    if record_len < len {
        return Err(EpochError::TooShort {
            record_len,
            epoch_len: len,
        });
    }
    let hop = ((len as f64) * (1.0 - overlap)).round() as usize;
    let hop = hop.max(1);
    let mut spans: Vec<EpochSpan> = (0..=record_len - len)
        .step_by(hop)
        .map(|start| EpochSpan {
            start,
            end: start + len,
        })
        .collect();
    if spans.last().map(|s| s.end) != Some(record_len) {
        spans.push(EpochSpan {
            start: record_len - len,
            end: record_len,
        });
    }
    Ok(spans)
}

/// Majority label over one epoch's annotation slice.
///
/// All-undefined epochs are excluded. Otherwise the most frequent
/// annotation wins; an undefined plurality falls back to the binary
/// majority, and a 1-vs-0 tie resolves to Arousal.
pub fn majority_label(ann: &[i8], epoch_len: usize) -> Result<EpochLabel, EpochError> {
    if ann.len() != epoch_len {
        return Err(EpochError::WrongSliceLength {
            expected: epoch_len,
            actual: ann.len(),
        });
    }
    let n_undef = ann.iter().filter(|&&a| a == -1).count();
    if n_undef == ann.len() {
        return Ok(EpochLabel::Excluded);
    }
    let n_arousal = ann.iter().filter(|&&a| a == 1).count();
    let n_non = ann.len() - n_undef - n_arousal;
    if n_arousal >= n_non {
        Ok(EpochLabel::Arousal)
    } else {
        Ok(EpochLabel::NonArousal)
    }
}

/// Training epochs of a record: segment, label, drop excluded.
pub fn labeled_epochs(record: &Record, epoch_s: u32) -> Result<Vec<LabeledEpoch>, EpochError> {
    let len = epoch_len_samples(record.sampling_rate, epoch_s);
    let spans = segment_train(record.len(), record.sampling_rate, epoch_s)?;
    let mut out = Vec::with_capacity(spans.len());
    for span in spans {
        let label = majority_label(&record.annotations[span.start..span.end], len)?;
        if label != EpochLabel::Excluded {
            out.push(LabeledEpoch { span, label });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::test_record;
    use crate::{EPOCH_SAMPLES, EPOCH_SECONDS, SAMPLING_RATE_HZ};

    #[test]
    fn train_spans_tile_exactly() {
        let spans = segment_train(18000, 200, 30).unwrap();
        assert_eq!(
            spans,
            vec![
                EpochSpan { start: 0, end: 6000 },
                EpochSpan { start: 6000, end: 12000 },
                EpochSpan { start: 12000, end: 18000 },
            ]
        );
    }

    #[test]
    fn train_drops_trailing_partial() {
        let spans = segment_train(20000, 200, 30).unwrap();
        assert_eq!(spans.len(), 3);
        assert_eq!(spans.last().unwrap().end, 18000);
    }

    #[test]
    fn train_rejects_short_record() {
        assert!(segment_train(5999, 200, 30).is_err());
    }

    #[test]
    fn test_spans_half_overlap() {
        let spans = segment_test(18000, 200, 30, 0.5).unwrap();
        let starts: Vec<usize> = spans.iter().map(|s| s.start).collect();
        assert_eq!(starts, vec![0, 3000, 6000, 9000, 12000]);
    }

    #[test]
    fn test_spans_end_anchor_covers_tail() {
        let spans = segment_test(19000, 200, 30, 0.5).unwrap();
        assert_eq!(spans.len(), 6);
        assert_eq!(*spans.last().unwrap(), EpochSpan { start: 13000, end: 19000 });
        // full coverage
        let mut covered = vec![false; 19000];
        for s in &spans {
            covered[s.start..s.end].fill(true);
        }
        assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn test_spans_single_epoch_record() {
        let spans = segment_test(6000, 200, 30, 0.5).unwrap();
        assert_eq!(spans, vec![EpochSpan { start: 0, end: 6000 }]);
    }

    #[test]
    fn majority_arousal_beats_undefined() {
        let mut ann = vec![1i8; 4200];
        ann.extend(vec![-1i8; 1800]);
        assert_eq!(majority_label(&ann, 6000).unwrap(), EpochLabel::Arousal);
    }

    #[test]
    fn all_undefined_is_excluded() {
        let ann = vec![-1i8; 6000];
        assert_eq!(majority_label(&ann, 6000).unwrap(), EpochLabel::Excluded);
    }

    #[test]
    fn tie_resolves_to_arousal() {
        let mut ann = vec![1i8; 3000];
        ann.extend(vec![0i8; 3000]);
        assert_eq!(majority_label(&ann, 6000).unwrap(), EpochLabel::Arousal);
    }

    #[test]
    fn undefined_plurality_falls_back_to_binary_majority() {
        // 40% undefined / 35% arousal / 25% non-arousal -> Arousal
        let mut ann = vec![-1i8; 2400];
        ann.extend(vec![1i8; 2100]);
        ann.extend(vec![0i8; 1500]);
        assert_eq!(majority_label(&ann, 6000).unwrap(), EpochLabel::Arousal);
        // 40% undefined / 25% arousal / 35% non-arousal -> NonArousal
        let mut ann = vec![-1i8; 2400];
        ann.extend(vec![1i8; 1500]);
        ann.extend(vec![0i8; 2100]);
        assert_eq!(majority_label(&ann, 6000).unwrap(), EpochLabel::NonArousal);
    }

    #[test]
    fn wrong_slice_length_rejected() {
        assert!(majority_label(&[0i8; 100], 6000).is_err());
    }

    #[test]
    fn labeled_epochs_alternating_blocks() {
        let mut r = test_record(EPOCH_SAMPLES * 4);
        for e in 0..4 {
            let v = if e % 2 == 0 { 1 } else { 0 };
            r.annotations[e * EPOCH_SAMPLES..(e + 1) * EPOCH_SAMPLES].fill(v);
        }
        let epochs = labeled_epochs(&r, EPOCH_SECONDS).unwrap();
        let labels: Vec<EpochLabel> = epochs.iter().map(|e| e.label).collect();
        assert_eq!(
            labels,
            vec![
                EpochLabel::Arousal,
                EpochLabel::NonArousal,
                EpochLabel::Arousal,
                EpochLabel::NonArousal,
            ]
        );
        let _ = SAMPLING_RATE_HZ;
    }

    #[test]
    fn labeled_epochs_skips_all_undefined() {
        let mut r = test_record(EPOCH_SAMPLES * 10);
        r.annotations[3 * EPOCH_SAMPLES..4 * EPOCH_SAMPLES].fill(-1);
        let epochs = labeled_epochs(&r, EPOCH_SECONDS).unwrap();
        assert_eq!(epochs.len(), 9);
    }
}
