//! Property tests for the library invariants that hold over whole input
//! families rather than single examples.

use adq_core::eval::auc;
use adq_core::linear::soft_threshold;
use adq_core::metrics::{compute_stats, EngagementRecord, Event};
use adq_core::signal::{dct2, log_compress, stft, stft_frame_count, AudioClip, Spectrogram};
use adq_core::timbre::{block_mcv_summary, FrameFeatureSequence};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stft_frame_count_matches_closed_form(
        len in 1usize..200_000,
        frame_pow in 6u32..13,
        overlap_num in 0usize..8,
    ) {
        let frame_length = 1usize << frame_pow;
        let overlap = overlap_num as f64 / 8.0;
        let clip = AudioClip::new(vec![0.01; len], 44100, "p").unwrap();
        let spec = stft(&clip, frame_length, overlap).unwrap();

        let hop = ((frame_length as f64 * (1.0 - overlap)).round() as usize).max(1);
        let expected = if len < frame_length { 1 } else { (len - frame_length) / hop + 1 };
        prop_assert_eq!(spec.frames, expected);
        prop_assert_eq!(spec.frames, stft_frame_count(len, frame_length, hop));
        prop_assert_eq!(spec.bins, frame_length / 2 + 1);
    }

    #[test]
    fn dct2_agrees_with_direct_summation(values in prop::collection::vec(-10.0f64..10.0, 8..64)) {
        let m = values.len();
        let fast = dct2(&values, m).unwrap();
        for (k, &got) in fast.iter().enumerate() {
            let mut acc = 0.0;
            for (n, &x) in values.iter().enumerate() {
                acc += x
                    * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2 * m) as f64).cos();
            }
            acc *= if k == 0 { (1.0 / m as f64).sqrt() } else { (2.0 / m as f64).sqrt() };
            let denom = acc.abs().max(1.0);
            prop_assert!((got - acc).abs() / denom < 1e-9, "k={} {} vs {}", k, got, acc);
        }
    }

    #[test]
    fn log_compress_is_monotone_and_fixes_zero(
        mut magnitudes in prop::collection::vec(0.0f64..100.0, 2..40),
        power in 0.5f64..4.0,
        scale in 0.01f64..2.0,
    ) {
        magnitudes.sort_by(|a, b| a.total_cmp(b));
        let n = magnitudes.len();
        let spec = Spectrogram {
            magnitudes,
            bins: n,
            frames: 1,
            bin_frequencies: (0..n).map(|i| i as f64).collect(),
            frame_hop: 1,
            frame_length: 2,
        };
        let out = log_compress(&spec, power, scale).unwrap();
        for pair in out.magnitudes.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
        for (a, b) in spec.magnitudes.iter().zip(out.magnitudes.iter()) {
            if *a == 0.0 {
                prop_assert_eq!(*b, 0.0);
            }
        }
        // Strict monotonicity over distinct inputs.
        for pair in spec.magnitudes.windows(2).zip(out.magnitudes.windows(2)) {
            if pair.0[0] < pair.0[1] {
                prop_assert!(pair.1[0] < pair.1[1]);
            }
        }
    }

    #[test]
    fn auc_survives_monotone_transforms(
        scores in prop::collection::vec(-5.0f64..5.0, 10..60),
        label_bits in prop::collection::vec(0u8..2, 10..60),
    ) {
        let n = scores.len().min(label_bits.len());
        let scores = &scores[..n];
        let labels = &label_bits[..n];
        prop_assume!(labels.iter().any(|&l| l == 0) && labels.iter().any(|&l| l == 1));

        let base = auc(scores, labels).unwrap();
        let shifted: Vec<f64> = scores.iter().map(|s| 2.5 * s + 11.0).collect();
        let squashed: Vec<f64> = scores.iter().map(|s| s.tanh()).collect();
        prop_assert!((auc(&shifted, labels).unwrap() - base).abs() < 1e-12);
        prop_assert!((auc(&squashed, labels).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn soft_threshold_closed_form(v in -10.0f64..10.0, t in 0.0f64..5.0) {
        let expected = if v.abs() <= t { 0.0 } else { v.signum() * (v.abs() - t) };
        prop_assert_eq!(soft_threshold(v, t), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn block_summary_matches_materialized_blocks(
        dims in 1usize..4,
        frames in 5usize..160,
        block_length in 2usize..40,
        block_hop in 1usize..20,
        seed in 0u64..1000,
    ) {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let values: Vec<f64> = (0..dims * frames).map(|_| next()).collect();
        let seq = FrameFeatureSequence {
            values: values.clone(),
            dims,
            frames,
            feature_names: (0..dims).map(|d| format!("f{d}")).collect(),
        };
        let got = block_mcv_summary(&seq, block_length, block_hop).unwrap().values;

        // Oracle: materialize every block and compute stats directly.
        let at = |d: usize, t: usize| values[d * frames + t];
        let mut blocks: Vec<Vec<f64>> = Vec::new();
        let mut spans: Vec<(usize, usize)> = Vec::new();
        if frames < block_length {
            spans.push((0, frames));
        } else {
            let mut s = 0;
            while s + block_length <= frames {
                spans.push((s, block_length));
                s += block_hop;
            }
        }
        for (start, len) in spans {
            let mut mcv = Vec::new();
            let means: Vec<f64> = (0..dims)
                .map(|d| (start..start + len).map(|t| at(d, t)).sum::<f64>() / len as f64)
                .collect();
            mcv.extend_from_slice(&means);
            for i in 0..dims {
                for j in i..dims {
                    let cov = if len < 2 {
                        0.0
                    } else {
                        (start..start + len)
                            .map(|t| (at(i, t) - means[i]) * (at(j, t) - means[j]))
                            .sum::<f64>()
                            / (len - 1) as f64
                    };
                    mcv.push(cov);
                }
            }
            blocks.push(mcv);
        }
        let mcv_len = dims + dims * (dims + 1) / 2;
        let nb = blocks.len() as f64;
        for k in 0..mcv_len {
            let mean = blocks.iter().map(|b| b[k]).sum::<f64>() / nb;
            let var = blocks.iter().map(|b| (b[k] - mean) * (b[k] - mean)).sum::<f64>() / nb;
            prop_assert!((got[k] - mean).abs() <= 1e-9 * mean.abs().max(1.0));
            prop_assert!((got[mcv_len + k] - var).abs() <= 1e-9 * var.abs().max(1.0));
        }
    }

    #[test]
    fn engagement_stats_are_order_invariant(
        seed in 0u64..500,
        n_records in 5usize..60,
    ) {
        let mut state = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(7);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut records = Vec::new();
        for _ in 0..n_records {
            let ad = format!("ad{}", next() % 5);
            let user = format!("u{}", next() % 7);
            let is_click = next() % 3 == 0;
            records.push(EngagementRecord {
                ad_id: ad,
                user_id: user,
                event: if is_click { Event::Click } else { Event::Impression },
                dwell_seconds: (next() % 12) as f64,
                timestamp: (next() % 1000) as f64,
            });
        }
        let baseline = compute_stats(&records, 5.0).unwrap();
        let mut reversed = records.clone();
        reversed.reverse();
        prop_assert_eq!(compute_stats(&reversed, 5.0).unwrap(), baseline);
    }
}
