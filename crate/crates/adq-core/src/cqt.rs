//! Constant-Q transform: geometrically spaced bins at musical-note
//! resolution, each computed by windowed correlation with a complex
//! exponential whose length keeps Q cycles in the window.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;
use crate::signal::{hann, AudioClip, SignalError, Spectrogram};

/// Default lowest bin: musical C1.
pub const DEFAULT_F_MIN: f64 = 32.70;

/// Constant-Q spectrogram with `bins` bins at `bins_per_octave` spacing
/// starting from `f_min`, one frame every `hop` samples.
///
/// Bin k sits at `f_min * 2^(k/B)` with `Q = 1 / (2^(1/B) - 1)`. The
/// Hann correlation window spans two Q-periods (capped at the clip
/// length): at that length the window's effective bandwidth equals the
/// constant-Q bin spacing and its first null lands exactly on the
/// neighboring bins, so a centered tone stays in one bin. Responses are
/// normalized by the window weight sum.
pub fn cqt(
    clip: &AudioClip,
    bins: usize,
    bins_per_octave: usize,
    f_min: f64,
    hop: usize,
) -> Result<Spectrogram, SignalError> {
    if bins_per_octave < 1 || bins < bins_per_octave {
        return Err(SignalError::InvalidParameter(format!(
            "need bins >= bins_per_octave >= 1, got {bins}/{bins_per_octave}"
        )));
    }
    if f_min <= 0.0 {
        return Err(SignalError::InvalidParameter("f_min must be positive".into()));
    }
    if hop == 0 {
        return Err(SignalError::InvalidParameter("hop must be positive".into()));
    }
    let nyquist = clip.sample_rate as f64 / 2.0;
    let f_max = f_min * math::powf(2.0, bins as f64 / bins_per_octave as f64);
    if f_max > nyquist {
        return Err(SignalError::InvalidParameter(format!(
            "top of the {bins}-bin range ({f_max:.1} Hz) exceeds Nyquist ({nyquist:.1} Hz)"
        )));
    }

    let q = 1.0 / (math::powf(2.0, 1.0 / bins_per_octave as f64) - 1.0);
    let samples = &clip.samples;
    let frames = samples.len() / hop + 1;

    let mut magnitudes = vec![0.0; bins * frames];
    let mut bin_frequencies = Vec::with_capacity(bins);
    for k in 0..bins {
        let f_k = f_min * math::powf(2.0, k as f64 / bins_per_octave as f64);
        bin_frequencies.push(f_k);

        let full_len =
            (math::ceil(2.0 * q * clip.sample_rate as f64 / f_k) as usize).clamp(2, samples.len());
        let window = hann(full_len);
        let window_sum: f64 = window.iter().sum();
        let phase_step = -2.0 * PI * f_k / clip.sample_rate as f64;

        // Precompute the windowed complex kernel once per bin.
        let kernel: Vec<(f64, f64)> = window
            .iter()
            .enumerate()
            .map(|(n, &w)| {
                let ang = phase_step * n as f64;
                (w * math::cos(ang) / window_sum, w * math::sin(ang) / window_sum)
            })
            .collect();

        let row = &mut magnitudes[k * frames..(k + 1) * frames];
        for (t, slot) in row.iter_mut().enumerate() {
            let start = t * hop;
            if start >= samples.len() {
                continue;
            }
            let avail = (samples.len() - start).min(full_len);
            let mut re = 0.0;
            let mut im = 0.0;
            for (x, (kr, ki)) in samples[start..start + avail].iter().zip(kernel.iter()) {
                re += x * kr;
                im += x * ki;
            }
            *slot = math::sqrt(re * re + im * im);
        }
    }

    Ok(Spectrogram {
        magnitudes,
        bins,
        frames,
        bin_frequencies,
        frame_hop: hop,
        frame_length: 0,
    })
}
