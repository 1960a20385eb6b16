//! Timbre features: temporal dynamics (RMS/ZCR), block MFCCs and their
//! deltas, and mel-spectral patterns.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::signal::{mel_spectrogram, stft, AudioClip, MelSpectrogram, SignalError};

/// Timbre analysis framing: 2048 samples with 50% overlap.
pub const FRAME_LENGTH: usize = 2048;
pub const OVERLAP: f64 = 0.5;

/// Mel resolution of the cepstral path and of the MSP path.
pub const MFCC_MEL_BANDS: usize = 128;
pub const MSP_MEL_BANDS: usize = 32;
pub const MFCC_COEFFS: usize = 20;

/// Block-statistics geometry for the MCV summaries (~2.3 s blocks).
pub const MCV_BLOCK_LENGTH: usize = 100;
pub const MCV_BLOCK_HOP: usize = 50;

/// Frames per MSP block and positions kept per band.
pub const MSP_BLOCK_FRAMES: usize = 10;

pub use crate::signal::LOG_FLOOR;

/// A per-frame feature sequence: `dims` rows over `frames` columns,
/// stored dimension-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatureSequence {
    pub values: Vec<f64>,
    pub dims: usize,
    pub frames: usize,
    pub feature_names: Vec<String>,
}

impl FrameFeatureSequence {
    #[inline]
    pub fn value(&self, dim: usize, frame: usize) -> f64 {
        self.values[dim * self.frames + frame]
    }

    #[inline]
    pub fn dim_row(&self, dim: usize) -> &[f64] {
        &self.values[dim * self.frames..(dim + 1) * self.frames]
    }

    /// One frame gathered across dimensions.
    pub fn frame(&self, frame: usize) -> Vec<f64> {
        (0..self.dims).map(|d| self.value(d, frame)).collect()
    }
}

/// Mean + vectorized covariance upper triangle per block, then mean and
/// variance of those vectors across blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    pub values: Vec<f64>,
    pub block_length: usize,
    pub block_hop: usize,
}

/// Per-frame RMS energy and zero-crossing rate.
pub fn tfd_frames(clip: &AudioClip) -> FrameFeatureSequence {
    let hop = (FRAME_LENGTH as f64 * (1.0 - OVERLAP)) as usize;
    let frames = crate::signal::stft_frame_count(clip.samples.len(), FRAME_LENGTH, hop);

    let mut values = vec![0.0; 2 * frames];
    for t in 0..frames {
        let start = t * hop;
        let mut energy = 0.0;
        let mut crossings = 0usize;
        let mut prev = 0.0f64;
        for n in 0..FRAME_LENGTH {
            let x = clip.samples.get(start + n).copied().unwrap_or(0.0);
            energy += x * x;
            if n > 0 && prev * x < 0.0 {
                crossings += 1;
            }
            prev = x;
        }
        values[t] = math::sqrt(energy / FRAME_LENGTH as f64);
        values[frames + t] = crossings as f64 / (FRAME_LENGTH - 1) as f64;
    }

    FrameFeatureSequence {
        values,
        dims: 2,
        frames,
        feature_names: vec!["rms".into(), "zcr".into()],
    }
}

/// Cepstra of a log mel spectrogram, keeping `MFCC_COEFFS` coefficients
/// and skipping coefficient 0 (overall scale).
pub fn cepstral_frames(mel: &MelSpectrogram) -> Result<FrameFeatureSequence, SignalError> {
    let frames = mel.frames;
    let mut values = vec![0.0; MFCC_COEFFS * frames];
    let mut log_bands = vec![0.0; mel.band_count];
    for t in 0..frames {
        for (b, slot) in log_bands.iter_mut().enumerate() {
            *slot = math::ln(mel.value(b, t).max(LOG_FLOOR));
        }
        let coeffs = crate::signal::dct2(&log_bands, MFCC_COEFFS + 1)?;
        for (c, &v) in coeffs.iter().skip(1).enumerate() {
            values[c * frames + t] = v;
        }
    }
    Ok(FrameFeatureSequence {
        values,
        dims: MFCC_COEFFS,
        frames,
        feature_names: (1..=MFCC_COEFFS).map(|c| format!("mfcc_{c:02}")).collect(),
    })
}

/// Per-frame MFCCs (coefficients 1..=20 of the 128-band log mel cepstrum).
pub fn mfcc_frames(clip: &AudioClip) -> Result<FrameFeatureSequence, SignalError> {
    let spec = stft(clip, FRAME_LENGTH, OVERLAP)?;
    let mel = mel_spectrogram(&spec, MFCC_MEL_BANDS)?;
    cepstral_frames(&mel)
}

/// Frame-to-frame difference; one all-zero frame when the input has a
/// single frame.
pub fn delta(seq: &FrameFeatureSequence) -> FrameFeatureSequence {
    let out_frames = if seq.frames > 1 { seq.frames - 1 } else { 1 };
    let mut values = vec![0.0; seq.dims * out_frames];
    if seq.frames > 1 {
        for d in 0..seq.dims {
            let row = seq.dim_row(d);
            let out = &mut values[d * out_frames..(d + 1) * out_frames];
            for t in 0..out_frames {
                out[t] = row[t + 1] - row[t];
            }
        }
    }
    FrameFeatureSequence {
        values,
        dims: seq.dims,
        frames: out_frames,
        feature_names: seq.feature_names.iter().map(|n| format!("delta_{n}")).collect(),
    }
}

/// Per-block mean + covariance upper triangle (sample covariance), then
/// the across-block mean and population variance of those vectors.
///
/// Clips with fewer frames than one block use a single truncated block,
/// which makes the across-block variance zero.
pub fn block_mcv_summary(
    seq: &FrameFeatureSequence,
    block_length: usize,
    block_hop: usize,
) -> Result<BlockSummary, SignalError> {
    if block_length < 2 {
        return Err(SignalError::InvalidParameter("block_length must be >= 2".into()));
    }
    if block_hop == 0 {
        return Err(SignalError::InvalidParameter("block_hop must be >= 1".into()));
    }

    let d = seq.dims;
    let mcv_len = d + d * (d + 1) / 2;
    let mut block_vectors: Vec<Vec<f64>> = Vec::new();

    let mut starts: Vec<(usize, usize)> = Vec::new();
    if seq.frames < block_length {
        starts.push((0, seq.frames));
    } else {
        let mut s = 0;
        while s + block_length <= seq.frames {
            starts.push((s, block_length));
            s += block_hop;
        }
    }

    for (start, len) in starts {
        let mut mcv = Vec::with_capacity(mcv_len);
        let mut means = vec![0.0; d];
        for (dim, m) in means.iter_mut().enumerate() {
            *m = math::mean(&seq.dim_row(dim)[start..start + len]);
        }
        mcv.extend_from_slice(&means);
        for i in 0..d {
            let row_i = &seq.dim_row(i)[start..start + len];
            for j in i..d {
                let row_j = &seq.dim_row(j)[start..start + len];
                let cov = if len < 2 {
                    0.0
                } else {
                    row_i
                        .iter()
                        .zip(row_j.iter())
                        .map(|(&a, &b)| (a - means[i]) * (b - means[j]))
                        .sum::<f64>()
                        / (len - 1) as f64
                };
                mcv.push(cov);
            }
        }
        block_vectors.push(mcv);
    }

    let mut values = Vec::with_capacity(2 * mcv_len);
    for k in 0..mcv_len {
        let column: Vec<f64> = block_vectors.iter().map(|v| v[k]).collect();
        values.push(math::mean(&column));
    }
    for k in 0..mcv_len {
        let column: Vec<f64> = block_vectors.iter().map(|v| v[k]).collect();
        values.push(math::population_variance(&column));
    }

    Ok(BlockSummary { values, block_length, block_hop })
}

/// 60th percentile with linear interpolation between order statistics.
fn percentile_60(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let h = (sorted.len() - 1) as f64 * 0.6;
    let lo = math::floor(h) as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Mel-spectral patterns from an existing coarse mel spectrogram: sort
/// each band inside non-overlapping 10-frame blocks, then take the 60th
/// percentile of every (band, sorted position) across blocks.
///
/// Output is band-major: 32 bands x 10 positions = 320 values.
pub fn msp_from_mel(mel: &MelSpectrogram) -> Vec<f64> {
    let bands = mel.band_count;
    let block = MSP_BLOCK_FRAMES;

    // Fewer frames than one block: a single right-zero-padded block.
    let (n_blocks, padded) =
        if mel.frames < block { (1, true) } else { (mel.frames / block, false) };

    let mut out = Vec::with_capacity(bands * block);
    let mut per_block: Vec<Vec<f64>> = vec![Vec::with_capacity(block); n_blocks];
    for band in 0..bands {
        for (b, sorted) in per_block.iter_mut().enumerate() {
            sorted.clear();
            for t in 0..block {
                let frame = b * block + t;
                let v = if padded && frame >= mel.frames { 0.0 } else { mel.value(band, frame) };
                sorted.push(v);
            }
            sorted.sort_by(|a, b| a.total_cmp(b));
        }
        for pos in 0..block {
            let mut column: Vec<f64> = per_block.iter().map(|s| s[pos]).collect();
            column.sort_by(|a, b| a.total_cmp(b));
            out.push(percentile_60(&column));
        }
    }
    out
}

/// Mel-spectral patterns of a clip (32-band mel over the timbre framing).
pub fn msp(clip: &AudioClip) -> Result<Vec<f64>, SignalError> {
    let spec = stft(clip, FRAME_LENGTH, OVERLAP)?;
    let mel = mel_spectrogram(&spec, MSP_MEL_BANDS)?;
    Ok(msp_from_mel(&mel))
}

/// All timbre blocks concatenated: TFD(10), MFCC(460), DMFCC(460), MSP(320).
pub fn timbre_vector(clip: &AudioClip) -> Result<Vec<f64>, SignalError> {
    let mut out = Vec::with_capacity(1250);
    let tfd = tfd_frames(clip);
    out.extend(block_mcv_summary(&tfd, MCV_BLOCK_LENGTH, MCV_BLOCK_HOP)?.values);
    let mfcc = mfcc_frames(clip)?;
    out.extend(block_mcv_summary(&mfcc, MCV_BLOCK_LENGTH, MCV_BLOCK_HOP)?.values);
    let dmfcc = delta(&mfcc);
    out.extend(block_mcv_summary(&dmfcc, MCV_BLOCK_LENGTH, MCV_BLOCK_HOP)?.values);
    out.extend(msp(clip)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use core::f64::consts::PI;

    fn clip_from(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 44100, "t".to_string()).unwrap()
    }

    fn sine(freq: f64, amplitude: f64, seconds: f64) -> AudioClip {
        let n = (seconds * 44100.0) as usize;
        clip_from(
            (0..n)
                .map(|i| amplitude * math::sin(2.0 * PI * freq * i as f64 / 44100.0))
                .collect(),
        )
    }

    fn seq(dims: usize, frames: usize, values: Vec<f64>) -> FrameFeatureSequence {
        FrameFeatureSequence {
            values,
            dims,
            frames,
            feature_names: (0..dims).map(|d| format!("f{d}")).collect(),
        }
    }

    #[test]
    fn tfd_of_silence_is_zero() {
        let tfd = tfd_frames(&clip_from(vec![0.0; 44100]));
        assert!(tfd.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tfd_of_square_wave_has_unit_rms_and_known_zcr() {
        let period = 441.0; // 100 Hz
        let samples: Vec<f64> = (0..44100)
            .map(|i| if (i as f64 % period) < period / 2.0 { 1.0 } else { -1.0 })
            .collect();
        let tfd = tfd_frames(&clip_from(samples));
        for t in 0..tfd.frames {
            assert!((tfd.value(0, t) - 1.0).abs() < 1e-12, "rms");
            assert!((tfd.value(1, t) - 2.0 * 100.0 / 44100.0).abs() < 7e-4, "zcr");
        }
    }

    #[test]
    fn tfd_sine_rms_matches_time_domain_value() {
        let tfd = tfd_frames(&sine(440.0, 0.5, 1.0));
        // Interior frames of a 0.5-amplitude sine: RMS = 0.5 / sqrt(2).
        for t in 1..tfd.frames - 1 {
            assert!((tfd.value(0, t) - 0.5 / math::sqrt(2.0)).abs() < 1e-2);
        }
    }

    #[test]
    fn cepstrum_of_flat_mel_bands_is_zero_after_coefficient_zero() {
        let mel = MelSpectrogram {
            bands: vec![0.3; 128 * 4],
            band_count: 128,
            frames: 4,
            band_centers_hz: (0..128).map(|i| i as f64).collect(),
        };
        let ceps = cepstral_frames(&mel).unwrap();
        assert_eq!(ceps.dims, 20);
        assert!(ceps.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn mfcc_has_twenty_dims_per_frame() {
        let mfcc = mfcc_frames(&sine(440.0, 0.4, 0.4)).unwrap();
        assert_eq!(mfcc.dims, 20);
        assert!(mfcc.frames >= 1);
        assert!(mfcc.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mfcc_is_gain_invariant_once_scale_coefficient_is_dropped() {
        // Noisy harmonic signal keeps every mel band above the log floor.
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut noise = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let base: Vec<f64> = (0..22050)
            .map(|i| {
                let t = i as f64 / 44100.0;
                0.2 * math::sin(2.0 * PI * 440.0 * t)
                    + 0.1 * math::sin(2.0 * PI * 1973.0 * t)
                    + 0.05 * noise()
            })
            .collect();
        let doubled: Vec<f64> = base.iter().map(|&x| 2.0 * x).collect();

        let a = mfcc_frames(&clip_from(base)).unwrap();
        let b = mfcc_frames(&clip_from(doubled)).unwrap();
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn spectral_tilt_flips_coefficient_one_sign() {
        let mut state = 0x0f0f_f0f0_1234_4321u64;
        let mut noise = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let white: Vec<f64> = (0..44100).map(|_| noise()).collect();

        // One-pole low-pass vs first-difference high-pass of the same noise.
        let mut low = vec![0.0; white.len()];
        for i in 1..white.len() {
            low[i] = 0.95 * low[i - 1] + 0.05 * white[i];
        }
        let mut high = vec![0.0; white.len()];
        for i in 1..white.len() {
            high[i] = white[i] - white[i - 1];
        }

        let c_low = mfcc_frames(&clip_from(low)).unwrap();
        let c_high = mfcc_frames(&clip_from(high)).unwrap();
        let mean_low = math::mean(c_low.dim_row(0));
        let mean_high = math::mean(c_high.dim_row(0));
        assert!(
            mean_low * mean_high < 0.0,
            "tilt coefficient should flip sign: {mean_low} vs {mean_high}"
        );
    }

    #[test]
    fn delta_examples() {
        let constant = seq(2, 5, vec![3.0; 10]);
        assert!(delta(&constant).values.iter().all(|&v| v == 0.0));

        let ramp = seq(1, 5, vec![0.0, 1.5, 3.0, 4.5, 6.0]);
        let d = delta(&ramp);
        assert_eq!(d.frames, 4);
        assert!(d.values.iter().all(|&v| (v - 1.5).abs() < 1e-12));

        // Telescoping: deltas sum to last - first.
        let random = seq(1, 6, vec![0.3, -1.0, 2.0, 0.5, 0.9, -0.2]);
        let d = delta(&random);
        let sum: f64 = d.values.iter().sum();
        assert!((sum - (-0.2 - 0.3)).abs() < 1e-12);

        // Single frame degenerates to one zero frame.
        let single = seq(3, 1, vec![1.0, 2.0, 3.0]);
        let d = delta(&single);
        assert_eq!(d.frames, 1);
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn block_summary_dimensions_match_the_ledger() {
        let mfcc_like = seq(20, 350, vec![0.1; 20 * 350]);
        let s = block_mcv_summary(&mfcc_like, MCV_BLOCK_LENGTH, MCV_BLOCK_HOP).unwrap();
        assert_eq!(s.values.len(), 460); // 2 * (20 + 210)

        let tfd_like = seq(2, 350, vec![0.1; 2 * 350]);
        let s = block_mcv_summary(&tfd_like, MCV_BLOCK_LENGTH, MCV_BLOCK_HOP).unwrap();
        assert_eq!(s.values.len(), 10); // 2 * (2 + 3)
    }

    #[test]
    fn block_summary_of_constant_frames() {
        let constant = seq(3, 400, vec![2.5; 3 * 400]);
        let s = block_mcv_summary(&constant, 100, 50).unwrap();
        let mcv_len = 3 + 6;
        for k in 0..3 {
            assert!((s.values[k] - 2.5).abs() < 1e-12, "means equal the constant");
        }
        for k in 3..mcv_len {
            assert!(s.values[k].abs() < 1e-12, "covariances are zero");
        }
        for k in mcv_len..2 * mcv_len {
            assert!(s.values[k].abs() < 1e-12, "across-block variance is zero");
        }
    }

    #[test]
    fn block_summary_matches_brute_force_oracle() {
        // Independent oracle: materialize blocks, compute stats directly.
        let d = 3;
        let frames = 237;
        let mut state = 0xfeed_beef_dead_c0deu64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let values: Vec<f64> = (0..d * frames).map(|_| next()).collect();
        let s = seq(d, frames, values.clone());
        let got = block_mcv_summary(&s, 60, 25).unwrap().values;

        let frame_at = |dim: usize, t: usize| values[dim * frames + t];
        let mut blocks: Vec<Vec<f64>> = Vec::new();
        let mut start = 0;
        while start + 60 <= frames {
            let mut mcv = Vec::new();
            let mut means = Vec::new();
            for dim in 0..d {
                let m = (start..start + 60).map(|t| frame_at(dim, t)).sum::<f64>() / 60.0;
                means.push(m);
            }
            mcv.extend_from_slice(&means);
            for i in 0..d {
                for j in i..d {
                    let c = (start..start + 60)
                        .map(|t| (frame_at(i, t) - means[i]) * (frame_at(j, t) - means[j]))
                        .sum::<f64>()
                        / 59.0;
                    mcv.push(c);
                }
            }
            blocks.push(mcv);
            start += 25;
        }
        let mcv_len = d + d * (d + 1) / 2;
        let nb = blocks.len() as f64;
        for k in 0..mcv_len {
            let mean = blocks.iter().map(|b| b[k]).sum::<f64>() / nb;
            let var = blocks.iter().map(|b| (b[k] - mean) * (b[k] - mean)).sum::<f64>() / nb;
            let denom = mean.abs().max(1e-9);
            assert!((got[k] - mean).abs() / denom < 1e-9, "mean slot {k}");
            let denom = var.abs().max(1e-9);
            assert!((got[mcv_len + k] - var).abs() / denom < 1e-9, "var slot {k}");
        }
    }

    #[test]
    fn msp_is_320_values_and_constant_maps_to_constant() {
        let out = msp(&sine(300.0, 0.3, 1.0)).unwrap();
        assert_eq!(out.len(), 320);

        let mel = MelSpectrogram {
            bands: vec![0.42; 32 * 50],
            band_count: 32,
            frames: 50,
            band_centers_hz: (0..32).map(|i| i as f64).collect(),
        };
        let out = msp_from_mel(&mel);
        assert_eq!(out.len(), 320);
        assert!(out.iter().all(|&v| (v - 0.42).abs() < 1e-12));
    }

    #[test]
    fn msp_two_block_percentile_matches_hand_computation() {
        // Band 0: block A frames 0..10 hold 0..9, block B holds 10..19.
        // After sorting, position p has values {p, 10 + p}; the 60th
        // percentile with linear interpolation is p + 0.6 * 10.
        let mut bands = vec![0.0; 32 * 20];
        for t in 0..20 {
            bands[t] = t as f64;
        }
        let mel = MelSpectrogram {
            bands,
            band_count: 32,
            frames: 20,
            band_centers_hz: (0..32).map(|i| i as f64).collect(),
        };
        let out = msp_from_mel(&mel);
        for p in 0..10 {
            assert!((out[p] - (p as f64 + 6.0)).abs() < 1e-12, "position {p}");
        }
        // Remaining bands are silent.
        assert!(out[10..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn msp_short_input_zero_pads_one_block() {
        let mel = MelSpectrogram {
            bands: vec![1.0; 32 * 4],
            band_count: 32,
            frames: 4,
            band_centers_hz: (0..32).map(|i| i as f64).collect(),
        };
        let out = msp_from_mel(&mel);
        assert_eq!(out.len(), 320);
        // Sorted block per band: [0,0,0,0,0,0,1,1,1,1].
        for band in 0..32 {
            for pos in 0..6 {
                assert_eq!(out[band * 10 + pos], 0.0);
            }
            for pos in 6..10 {
                assert_eq!(out[band * 10 + pos], 1.0);
            }
        }
    }

    #[test]
    fn timbre_vector_is_1250_finite_values() {
        let v = timbre_vector(&sine(500.0, 0.4, 1.2)).unwrap();
        assert_eq!(v.len(), 1250);
        assert!(v.iter().all(|x| x.is_finite()));
    }
}
