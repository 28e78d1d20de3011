//! End-to-end properties: epoching, classifier behavior on planted structure,
//! and sample-wise prediction fusion.

use arousal_core::classifier::{
    fit_bagged, load_db, save_db, train_subject, ModelDatabase, TrainOutcome, TrainParams,
};
use arousal_core::dsp::{band_power, periodogram};
use arousal_core::epoch::{labeled_epochs, majority_label, segment_test, EpochLabel};
use arousal_core::features::extract_epoch;
use arousal_core::scoring::predict_record;
use arousal_core::synth::synth_record;
use arousal_core::{
    ChannelRole, EpochSignals, FeatureConfig, SynthParams, EPOCH_SAMPLES, EPOCH_SECONDS,
    FEATURE_COUNT,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // every sample of the record is covered by at least one test span, and
    // all spans have the exact epoch length
    #[test]
    fn test_spans_cover_every_sample(extra in 0usize..13_000) {
        let n = EPOCH_SAMPLES + extra;
        let spans = segment_test(n, 200, EPOCH_SECONDS, 0.5).unwrap();
        let mut covered = vec![false; n];
        for s in &spans {
            prop_assert_eq!(s.end - s.start, EPOCH_SAMPLES);
            prop_assert!(s.end <= n);
            covered[s.start..s.end].iter_mut().for_each(|c| *c = true);
        }
        prop_assert!(covered.iter().all(|&c| c));
        // spans are sorted and distinct
        for w in spans.windows(2) {
            prop_assert!(w[0].start < w[1].start);
        }
    }

    // majority_label agrees with a naive per-value recount
    #[test]
    fn majority_label_matches_recount(ann in prop::collection::vec(-1i8..=1, 10..200)) {
        let label = majority_label(&ann, ann.len()).unwrap();
        let c1 = ann.iter().filter(|&&a| a == 1).count();
        let c0 = ann.iter().filter(|&&a| a == 0).count();
        let expected = if c1 + c0 == 0 {
            EpochLabel::Excluded
        } else if c1 >= c0 {
            EpochLabel::Arousal
        } else {
            EpochLabel::NonArousal
        };
        prop_assert_eq!(label, expected);
    }
}

// labeled_epochs must agree with recounting the raw annotation stream
#[test]
fn labeled_epochs_match_annotation_recount() {
    let params = SynthParams {
        duration_s: 900.0,
        seed: 21,
        ..SynthParams::default()
    };
    let record = synth_record("s10", &params).unwrap();
    let epochs = labeled_epochs(&record, EPOCH_SECONDS).unwrap();
    assert!(!epochs.is_empty());

    let mut expected = Vec::new();
    let mut start = 0;
    while start + EPOCH_SAMPLES <= record.len() {
        let ann = &record.annotations[start..start + EPOCH_SAMPLES];
        let c1 = ann.iter().filter(|&&a| a == 1).count();
        let c0 = ann.iter().filter(|&&a| a == 0).count();
        if c1 + c0 > 0 {
            let label = if c1 >= c0 {
                EpochLabel::Arousal
            } else {
                EpochLabel::NonArousal
            };
            expected.push((start, label));
        }
        start += EPOCH_SAMPLES;
    }
    assert_eq!(epochs.len(), expected.len());
    for (e, (start, label)) in epochs.iter().zip(&expected) {
        assert_eq!(e.span.start, *start);
        assert_eq!(e.label, *label);
    }
}

// with the arousal signature switched off, beta-band EEG power must be
// statistically indistinguishable between arousal and non-arousal epochs
#[test]
fn zero_strength_leaves_no_beta_signature() {
    let params = SynthParams {
        duration_s: 3600.0,
        signature_strength: 0.0,
        seed: 5,
        ..SynthParams::default()
    };
    let record = synth_record("s11", &params).unwrap();
    let epochs = labeled_epochs(&record, EPOCH_SECONDS).unwrap();
    let eeg = record.channel(ChannelRole::Eeg1).unwrap();

    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for e in &epochs {
        let x: Vec<f64> = eeg[e.span.start..e.span.end]
            .iter()
            .map(|&v| f64::from(v))
            .collect();
        let s = periodogram(&x, 200.0).unwrap();
        let beta = band_power(&s, 13.0, 31.0).unwrap();
        let cls = usize::from(e.label == EpochLabel::Arousal);
        sums[cls] += beta;
        counts[cls] += 1;
    }
    assert!(counts[0] >= 10 && counts[1] >= 10, "counts {counts:?}");
    let ratio = (sums[1] / counts[1] as f64) / (sums[0] / counts[0] as f64);
    assert!(
        (0.95..=1.05).contains(&ratio),
        "beta power ratio {ratio} outside [0.95, 1.05]"
    );
}

// planted two-Gaussian structure in 428 dimensions must be recovered
#[test]
fn bagged_trees_separate_planted_gaussians() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let informative: Vec<usize> = (0..10).map(|i| 13 + 41 * i).collect();
    let mut draw = |label: bool| -> Vec<f64> {
        (0..FEATURE_COUNT)
            .map(|d| {
                let v: f64 = StandardNormal.sample(&mut rng);
                // 5 sigma separation on the informative dimensions
                if label && informative.contains(&d) {
                    v + 5.0
                } else {
                    v
                }
            })
            .collect()
    };
    let n_train = 300;
    let n_test = 150;
    let train: Vec<(Vec<f64>, bool)> = (0..n_train).map(|i| {
        let label = i % 2 == 0;
        (draw(label), label)
    }).collect();
    let test: Vec<(Vec<f64>, bool)> = (0..n_test).map(|i| {
        let label = i % 2 == 1;
        (draw(label), label)
    }).collect();

    let rows: Vec<&[f64]> = train.iter().map(|(r, _)| r.as_slice()).collect();
    let labels: Vec<bool> = train.iter().map(|(_, l)| *l).collect();
    let params = TrainParams {
        n_trees: 10,
        max_depth: 8,
        seed: 42,
        ..TrainParams::default()
    };
    let ensemble = fit_bagged(&rows, &labels, &params).unwrap();

    let correct = test
        .iter()
        .filter(|(x, l)| (ensemble.predict_proba(x).unwrap() >= 0.5) == *l)
        .count();
    let accuracy = correct as f64 / n_test as f64;
    assert!(accuracy >= 0.98, "accuracy {accuracy}");
}

// predict_record must equal per-span prediction plus per-sample averaging
// done by hand, and the model database must survive a save/load round trip
#[test]
fn prediction_fusion_matches_manual_average() {
    let train_params = SynthParams {
        duration_s: 600.0,
        seed: 33,
        ..SynthParams::default()
    };
    let record = synth_record("s12", &train_params).unwrap();
    let cfg = FeatureConfig::default();
    let tp = TrainParams {
        n_trees: 5,
        max_depth: 6,
        ..TrainParams::default()
    };
    let model = match train_subject(&record, &tp, EPOCH_SECONDS, &cfg, 9).unwrap() {
        TrainOutcome::Trained(m) => *m,
        TrainOutcome::Skipped { reason, .. } => panic!("training skipped: {reason}"),
    };
    let db = ModelDatabase::new(vec![model]);

    let eval_params = SynthParams {
        duration_s: 150.0,
        seed: 34,
        ..SynthParams::default()
    };
    let eval = synth_record("s13", &eval_params).unwrap();
    let probs = predict_record(&eval, &db, EPOCH_SECONDS, 0.5, &cfg).unwrap();
    assert_eq!(probs.probs.len(), eval.len());
    assert!(probs.probs.iter().all(|&p| (0.0..=1.0).contains(&p)));

    // manual fusion
    let spans = segment_test(eval.len(), eval.sampling_rate, EPOCH_SECONDS, 0.5).unwrap();
    let mut sum = vec![0.0f64; eval.len()];
    let mut count = vec![0u32; eval.len()];
    for &span in &spans {
        let signals = EpochSignals::from_record(&eval, span).unwrap();
        let fv = extract_epoch(&signals, 200.0, &cfg).unwrap();
        let p = db.predict_mean(&fv.values).unwrap();
        for i in span.start..span.end {
            sum[i] += p;
            count[i] += 1;
        }
    }
    for (i, &got) in probs.probs.iter().enumerate() {
        let want = sum[i] / f64::from(count[i]);
        assert!((got - want).abs() <= 1e-12, "sample {i}: {got} vs {want}");
    }

    // persistence changes nothing
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("models.bin");
    save_db(&db, &path).unwrap();
    let loaded = load_db(&path).unwrap();
    let reloaded = predict_record(&eval, &loaded, EPOCH_SECONDS, 0.5, &cfg).unwrap();
    assert_eq!(reloaded.probs, probs.probs);
}

// training the same subject twice yields an identical model: the per-subject
// seed depends only on the global seed and the subject id
#[test]
fn training_is_deterministic() {
    let params = SynthParams {
        duration_s: 600.0,
        seed: 77,
        ..SynthParams::default()
    };
    let record = synth_record("s14", &params).unwrap();
    let cfg = FeatureConfig::default();
    let tp = TrainParams {
        n_trees: 3,
        max_depth: 5,
        ..TrainParams::default()
    };
    let fit = || match train_subject(&record, &tp, EPOCH_SECONDS, &cfg, 11).unwrap() {
        TrainOutcome::Trained(m) => *m,
        TrainOutcome::Skipped { reason, .. } => panic!("training skipped: {reason}"),
    };
    assert_eq!(fit(), fit());
}
