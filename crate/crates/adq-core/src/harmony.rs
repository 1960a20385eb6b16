//! Harmony features: pitch-class profiles from the CQT, chord/key
//! template correlations, mode, and their shift-invariant summaries.

use alloc::vec;
use alloc::vec::Vec;

use crate::cqt::{cqt, DEFAULT_F_MIN};
use crate::fft;
use crate::math;
use crate::signal::{AudioClip, SignalError, Spectrogram};

/// Harmony CQT: 12 bins/octave over 7 octaves from C1, hop 8192
/// (a 16384-sample frame at 50% overlap).
pub const BINS_PER_OCTAVE: usize = 12;
pub const OCTAVES: usize = 7;
pub const HOP: usize = 8192;

/// Pitch-class order of every 12-dim profile: A, A#, ..., G#.
pub const PITCH_CLASSES: [&str; 12] =
    ["A", "A#", "B", "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#"];

/// Offset of pitch class A from the C-rooted CQT bin grid.
const A_OFFSET: usize = 9;

/// Octave-folded pitch-class energies of one CQT frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HpcpFrame {
    pub classes: [f64; 12],
}

/// Chord and key templates, each row L2-normalized: 12 major then 12
/// minor, roots in [`PITCH_CLASSES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateBank {
    pub chord_templates: Vec<[f64; 12]>,
    pub key_templates: Vec<[f64; 12]>,
}

/// Krumhansl-Kessler key profiles, indexed by interval above the tonic.
const KK_MAJOR: [f64; 12] =
    [6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88];
const KK_MINOR: [f64; 12] =
    [6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17];

fn l2_normalize(row: &mut [f64; 12]) {
    let norm = math::sqrt(row.iter().map(|v| v * v).sum());
    if norm > 0.0 {
        for v in row.iter_mut() {
            *v /= norm;
        }
    }
}

impl TemplateBank {
    /// Binary triads and Krumhansl-Kessler profiles rotated through the
    /// 12 roots.
    pub fn standard() -> Self {
        let mut chord_templates = Vec::with_capacity(24);
        let mut key_templates = Vec::with_capacity(24);
        for minor in [false, true] {
            let triad: [usize; 3] = if minor { [0, 3, 7] } else { [0, 4, 7] };
            let profile = if minor { KK_MINOR } else { KK_MAJOR };
            for root in 0..12 {
                let mut chord = [0.0; 12];
                for &interval in &triad {
                    chord[(root + interval) % 12] = 1.0;
                }
                l2_normalize(&mut chord);
                chord_templates.push(chord);

                let mut key = [0.0; 12];
                for (c, slot) in key.iter_mut().enumerate() {
                    *slot = profile[(c + 12 - root) % 12];
                }
                l2_normalize(&mut key);
                key_templates.push(key);
            }
        }
        TemplateBank { chord_templates, key_templates }
    }

    /// "C" .. "B" then "Cm" .. "Bm" style name for a template index.
    pub fn template_name(index: usize) -> alloc::string::String {
        let root = PITCH_CLASSES[index % 12];
        if index < 12 {
            alloc::format!("{root}")
        } else {
            alloc::format!("{root}m")
        }
    }
}

/// Octave folding of a harmony CQT: class p of frame i sums the CQT bins
/// of that pitch class across all octaves. Class 0 is anchored at A.
pub fn hpcp_from_cqt(spec: &Spectrogram) -> Vec<HpcpFrame> {
    let mut frames = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let mut classes = [0.0; 12];
        for b in 0..spec.bins {
            classes[(b + 12 - A_OFFSET) % 12] += spec.value(b, t);
        }
        frames.push(HpcpFrame { classes });
    }
    frames
}

/// Pitch-class profile sequence of a clip.
pub fn hpcp(clip: &AudioClip) -> Result<Vec<HpcpFrame>, SignalError> {
    let spec = cqt(clip, BINS_PER_OCTAVE * OCTAVES, BINS_PER_OCTAVE, DEFAULT_F_MIN, HOP)?;
    Ok(hpcp_from_cqt(&spec))
}

pub fn mean_hpcp(frames: &[HpcpFrame]) -> [f64; 12] {
    let mut mean = [0.0; 12];
    if frames.is_empty() {
        return mean;
    }
    for f in frames {
        for (m, &v) in mean.iter_mut().zip(f.classes.iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= frames.len() as f64;
    }
    mean
}

/// First 9 DFT magnitudes of the L1-normalized mean pitch-class profile.
/// The 12-point transform makes the result exactly invariant to circular
/// transposition.
pub fn sihpcp(frames: &[HpcpFrame]) -> Vec<f64> {
    let mut mean = mean_hpcp(frames);
    let sum: f64 = mean.iter().sum();
    if sum > 0.0 {
        for v in mean.iter_mut() {
            *v /= sum;
        }
    }
    fft::dft_magnitudes(&mean, 9)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y.iter()) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        // Zero-variance input correlates 0 by convention.
        return 0.0;
    }
    (sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0)
}

/// Per-frame Pearson correlations with the 24 chord templates,
/// chord-major: `values[chord * frames + frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chordogram {
    pub values: Vec<f64>,
    pub frames: usize,
}

impl Chordogram {
    #[inline]
    pub fn value(&self, chord: usize, frame: usize) -> f64 {
        self.values[chord * self.frames + frame]
    }
}

pub fn chordogram(frames: &[HpcpFrame], bank: &TemplateBank) -> Chordogram {
    let n = frames.len();
    let mut values = vec![0.0; 24 * n];
    for (t, frame) in frames.iter().enumerate() {
        for (c, template) in bank.chord_templates.iter().enumerate() {
            values[c * n + t] = pearson(&frame.classes, template);
        }
    }
    Chordogram { values, frames: n }
}

/// Chord correlations (mean over frames) and the normalized histogram of
/// per-frame chord estimates. Frames whose correlation column is all
/// zero (silence) do not vote in the histogram.
pub fn chord_features(cg: &Chordogram) -> (Vec<f64>, Vec<f64>) {
    let n = cg.frames;
    let mut chc = vec![0.0; 24];
    let mut ch = vec![0.0; 24];
    if n == 0 {
        return (chc, ch);
    }
    for c in 0..24 {
        chc[c] = math::mean(&cg.values[c * n..(c + 1) * n]);
    }
    let mut voiced = 0usize;
    for t in 0..n {
        let mut best = 0usize;
        let mut best_v = f64::MIN;
        let mut any_nonzero = false;
        for c in 0..24 {
            let v = cg.value(c, t);
            if v != 0.0 {
                any_nonzero = true;
            }
            if v > best_v {
                best_v = v;
                best = c;
            }
        }
        if any_nonzero {
            ch[best] += 1.0;
            voiced += 1;
        }
    }
    if voiced > 0 {
        for v in ch.iter_mut() {
            *v /= voiced as f64;
        }
    }
    (chc, ch)
}

/// Pearson correlation of the mean profile with the 24 key templates.
pub fn key_correlations(frames: &[HpcpFrame], bank: &TemplateBank) -> Vec<f64> {
    let mean = mean_hpcp(frames);
    bank.key_templates.iter().map(|t| pearson(&mean, t)).collect()
}

/// 1 for major, 0 for minor; ties break toward major.
pub fn mode_estimate(key_corr: &[f64]) -> u8 {
    let best_major = key_corr[..12].iter().fold(f64::MIN, |m, &v| m.max(v));
    let best_minor = key_corr[12..24].iter().fold(f64::MIN, |m, &v| m.max(v));
    u8::from(best_major >= best_minor)
}

/// Shift-invariant summary of 24 concatenated major/minor activations:
/// first 9 DFT magnitudes of (major + minor) followed by the first 9 of
/// (major - minor). 12-point transforms keep it exactly invariant under
/// a common circular rotation of both halves.
pub fn shift_invariant_24(x: &[f64]) -> Result<Vec<f64>, SignalError> {
    if x.len() != 24 {
        return Err(SignalError::InvalidParameter(
            "shift_invariant_24 expects 12 major + 12 minor activations".into(),
        ));
    }
    let sum: Vec<f64> = (0..12).map(|i| x[i] + x[12 + i]).collect();
    let diff: Vec<f64> = (0..12).map(|i| x[i] - x[12 + i]).collect();
    let mut out = fft::dft_magnitudes(&sum, 9);
    out.extend(fft::dft_magnitudes(&diff, 9));
    Ok(out)
}

/// All harmony blocks in ledger order: SIHPCP(9), MODE(1), SICH(18),
/// SICHC(18), SIKC(18) — 64 values.
pub fn harmony_vector(clip: &AudioClip) -> Result<Vec<f64>, SignalError> {
    let frames = hpcp(clip)?;
    let bank = TemplateBank::standard();

    let mut out = Vec::with_capacity(64);
    out.extend(sihpcp(&frames));

    let kc = key_correlations(&frames, &bank);
    out.push(mode_estimate(&kc) as f64);

    let cg = chordogram(&frames, &bank);
    let (chc, ch) = chord_features(&cg);
    out.extend(shift_invariant_24(&ch)?);
    out.extend(shift_invariant_24(&chc)?);
    out.extend(shift_invariant_24(&kc)?);
    Ok(out)
}
