//! Shared signal-processing primitives: audio container, STFT, mel
//! filterbank, DCT, log compression, and sample-rate conversion.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use num_complex::Complex64;

use crate::fft;
use crate::math;

/// Analysis sample rate every extractor assumes.
pub const ANALYSIS_SAMPLE_RATE: u32 = 44100;

/// Floor applied before any log of a magnitude, keeping silence finite.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalError {
    /// A constructor invariant was violated.
    InvalidClip(String),
    /// A transform was called with out-of-contract parameters.
    InvalidParameter(String),
}

impl fmt::Display for SignalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalError::InvalidClip(msg) => write!(f, "invalid clip: {msg}"),
            SignalError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for SignalError {}

/// Decoded mono waveform. The raw input to every feature extractor.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub id: String,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32, id: impl Into<String>) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::InvalidClip("samples must be non-empty".into()));
        }
        if sample_rate == 0 {
            return Err(SignalError::InvalidClip("sample_rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(SignalError::InvalidClip("samples must all be finite".into()));
        }
        Ok(AudioClip { samples, sample_rate, id: id.into() })
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Magnitude spectrogram, stored bin-major: `magnitudes[bin * frames + frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Vec<f64>,
    pub bins: usize,
    pub frames: usize,
    /// Center frequency of each bin, strictly increasing.
    pub bin_frequencies: Vec<f64>,
    pub frame_hop: usize,
    pub frame_length: usize,
}

impl Spectrogram {
    #[inline]
    pub fn value(&self, bin: usize, frame: usize) -> f64 {
        self.magnitudes[bin * self.frames + frame]
    }

    #[inline]
    pub fn bin_row(&self, bin: usize) -> &[f64] {
        &self.magnitudes[bin * self.frames..(bin + 1) * self.frames]
    }

    /// One spectral frame gathered across bins.
    pub fn frame_column(&self, frame: usize) -> Vec<f64> {
        (0..self.bins).map(|b| self.value(b, frame)).collect()
    }
}

/// Mel-band energies, stored band-major like [`Spectrogram`].
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub bands: Vec<f64>,
    pub band_count: usize,
    pub frames: usize,
    pub band_centers_hz: Vec<f64>,
}

impl MelSpectrogram {
    #[inline]
    pub fn value(&self, band: usize, frame: usize) -> f64 {
        self.bands[band * self.frames + frame]
    }

    pub fn frame_column(&self, frame: usize) -> Vec<f64> {
        (0..self.band_count).map(|b| self.value(b, frame)).collect()
    }
}

/// Triangular mel filterbank: `band_count` rows over `stft_bins` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub weights: Vec<f64>,
    pub band_count: usize,
    pub stft_bins: usize,
    pub band_centers_hz: Vec<f64>,
    /// Per-row [start, end) of the nonzero support, to skip zero weights.
    support: Vec<(usize, usize)>,
}

impl MelFilterbank {
    #[inline]
    pub fn row(&self, band: usize) -> &[f64] {
        &self.weights[band * self.stft_bins..(band + 1) * self.stft_bins]
    }
}

/// Mel scale used throughout: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    const LINEAR_STEP: f64 = 200.0 / 3.0;
    const BREAK_HZ: f64 = 1000.0;
    const BREAK_MEL: f64 = 15.0; // 1000 / (200/3)
    if hz < BREAK_HZ {
        hz / LINEAR_STEP
    } else {
        BREAK_MEL + math::ln(hz / BREAK_HZ) / (math::ln(6.4) / 27.0)
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    const LINEAR_STEP: f64 = 200.0 / 3.0;
    const BREAK_MEL: f64 = 15.0;
    if mel < BREAK_MEL {
        mel * LINEAR_STEP
    } else {
        1000.0 * math::exp((mel - BREAK_MEL) * (math::ln(6.4) / 27.0))
    }
}

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - math::cos(2.0 * PI * n as f64 / len as f64)))
        .collect()
}

/// Frame count for a hop-advanced analysis that needs one full frame;
/// shorter signals are zero-padded to exactly one frame.
pub fn stft_frame_count(samples: usize, frame_length: usize, hop: usize) -> usize {
    if samples < frame_length {
        1
    } else {
        (samples - frame_length) / hop + 1
    }
}

/// Magnitude STFT with a periodic Hann window.
///
/// Returns bins `0..=frame_length/2`; magnitudes are unnormalized DFT
/// magnitudes of the windowed frame.
pub fn stft(clip: &AudioClip, frame_length: usize, overlap: f64) -> Result<Spectrogram, SignalError> {
    if !frame_length.is_power_of_two() || frame_length < 2 {
        return Err(SignalError::InvalidParameter(format!(
            "frame_length must be a power of two >= 2, got {frame_length}"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(SignalError::InvalidParameter(format!(
            "overlap must lie in [0, 1), got {overlap}"
        )));
    }
    let hop = (math::round(frame_length as f64 * (1.0 - overlap)) as usize).max(1);
    let frames = stft_frame_count(clip.samples.len(), frame_length, hop);
    let bins = frame_length / 2 + 1;
    let window = hann(frame_length);

    let mut magnitudes = vec![0.0; bins * frames];
    let mut buf = vec![Complex64::new(0.0, 0.0); frame_length];
    for t in 0..frames {
        let start = t * hop;
        for (n, slot) in buf.iter_mut().enumerate() {
            let sample = clip.samples.get(start + n).copied().unwrap_or(0.0);
            *slot = Complex64::new(sample * window[n], 0.0);
        }
        fft::fft_in_place(&mut buf);
        for (k, c) in buf.iter().take(bins).enumerate() {
            magnitudes[k * frames + t] = fft::magnitude(*c);
        }
    }

    let bin_hz = clip.sample_rate as f64 / frame_length as f64;
    Ok(Spectrogram {
        magnitudes,
        bins,
        frames,
        bin_frequencies: (0..bins).map(|k| k as f64 * bin_hz).collect(),
        frame_hop: hop,
        frame_length,
    })
}

/// Triangular filters on the mel scale covering 0 Hz to `sample_rate / 2`.
pub fn mel_filterbank(stft_bins: usize, sample_rate: u32, band_count: usize) -> Result<MelFilterbank, SignalError> {
    if band_count < 1 {
        return Err(SignalError::InvalidParameter("band_count must be >= 1".into()));
    }
    if stft_bins < 2 {
        return Err(SignalError::InvalidParameter("need at least 2 stft bins".into()));
    }
    let nyquist = sample_rate as f64 / 2.0;
    let mel_max = hz_to_mel(nyquist);
    let edges_hz: Vec<f64> = (0..band_count + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (band_count + 1) as f64))
        .collect();

    let bin_hz = nyquist / (stft_bins - 1) as f64;
    let mut weights = vec![0.0; band_count * stft_bins];
    let mut support = Vec::with_capacity(band_count);
    for m in 0..band_count {
        let (lo, center, hi) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
        let mut first = stft_bins;
        let mut last = 0;
        for k in 0..stft_bins {
            let f = k as f64 * bin_hz;
            let w = if f <= center {
                (f - lo) / (center - lo)
            } else {
                (hi - f) / (hi - center)
            };
            if w > 0.0 {
                weights[m * stft_bins + k] = w;
                first = first.min(k);
                last = k + 1;
            }
        }
        support.push((first.min(last), last));
    }

    Ok(MelFilterbank {
        weights,
        band_count,
        stft_bins,
        band_centers_hz: edges_hz[1..=band_count].to_vec(),
        support,
    })
}

/// Mel-band magnitudes: each frame of `spec` multiplied with the filterbank.
pub fn mel_spectrogram(spec: &Spectrogram, band_count: usize) -> Result<MelSpectrogram, SignalError> {
    // Last bin of an STFT sits at Nyquist, which recovers the sample rate.
    let sample_rate = math::round(spec.bin_frequencies.last().copied().unwrap_or(0.0) * 2.0) as u32;
    let bank = mel_filterbank(spec.bins, sample_rate, band_count)?;

    let frames = spec.frames;
    let mut bands = vec![0.0; band_count * frames];
    for m in 0..band_count {
        let (start, end) = bank.support[m];
        let row = bank.row(m);
        let out = &mut bands[m * frames..(m + 1) * frames];
        for k in start..end {
            let w = row[k];
            if w == 0.0 {
                continue;
            }
            let spec_row = spec.bin_row(k);
            for (o, s) in out.iter_mut().zip(spec_row.iter()) {
                *o += w * s;
            }
        }
    }

    Ok(MelSpectrogram { bands, band_count, frames, band_centers_hz: bank.band_centers_hz })
}

/// Type-II DCT with orthonormal scaling, first `keep` coefficients.
///
/// Power-of-two-friendly sizes go through the FFT; anything else falls
/// back to the direct summation.
pub fn dct2(values: &[f64], keep: usize) -> Result<Vec<f64>, SignalError> {
    let m = values.len();
    if keep < 1 || keep > m {
        return Err(SignalError::InvalidParameter(format!(
            "keep must lie in 1..={m}, got {keep}"
        )));
    }

    let unscaled: Vec<f64> = if (4 * m).is_power_of_two() {
        // Even-symmetric length-4M extension: the real part of its FFT
        // halves to the DCT-II sum.
        let mut buf = vec![Complex64::new(0.0, 0.0); 4 * m];
        for (n, &x) in values.iter().enumerate() {
            buf[2 * n + 1].re = x;
            buf[4 * m - 2 * n - 1].re = x;
        }
        fft::fft_in_place(&mut buf);
        buf.iter().take(keep).map(|c| c.re / 2.0).collect()
    } else {
        (0..keep)
            .map(|k| {
                values
                    .iter()
                    .enumerate()
                    .map(|(n, &x)| x * math::cos(PI * (2 * n + 1) as f64 * k as f64 / (2 * m) as f64))
                    .sum()
            })
            .collect()
    };

    let scale0 = math::sqrt(1.0 / m as f64);
    let scale = math::sqrt(2.0 / m as f64);
    Ok(unscaled
        .iter()
        .enumerate()
        .map(|(k, &v)| v * if k == 0 { scale0 } else { scale })
        .collect())
}

/// Log amplitude compression `m -> ln(1 + scale * m^power)`.
pub fn log_compress(spec: &Spectrogram, power: f64, scale: f64) -> Result<Spectrogram, SignalError> {
    if power <= 0.0 || scale <= 0.0 {
        return Err(SignalError::InvalidParameter(format!(
            "power and scale must be positive, got power={power} scale={scale}"
        )));
    }
    let mut out = spec.clone();
    for v in out.magnitudes.iter_mut() {
        *v = math::ln(1.0 + scale * math::powf(*v, power));
    }
    Ok(out)
}

fn sinc(x: f64) -> f64 {
    if math::abs(x) < 1e-12 {
        1.0
    } else {
        math::sin(PI * x) / (PI * x)
    }
}

/// Windowed-sinc resampling to `target_rate`.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, SignalError> {
    if target_rate == 0 {
        return Err(SignalError::InvalidParameter("target_rate must be positive".into()));
    }
    if clip.sample_rate == target_rate {
        return Ok(clip.clone());
    }

    let src = clip.sample_rate as f64;
    let dst = target_rate as f64;
    let out_len = (math::round(clip.samples.len() as f64 * dst / src) as usize).max(1);

    // Cutoff scales down when decimating so the kernel stays anti-aliasing.
    let cutoff = (dst / src).min(1.0);
    let half_width = 48.0 / cutoff;
    let n_max = clip.samples.len() as isize - 1;

    let mut out = Vec::with_capacity(out_len);
    for t in 0..out_len {
        let p = t as f64 * src / dst;
        let lo = math::ceil(p - half_width).max(0.0) as isize;
        let hi = (math::floor(p + half_width) as isize).min(n_max);
        let mut acc = 0.0;
        for n in lo..=hi {
            let d = p - n as f64;
            let taper = 0.5 * (1.0 + math::cos(PI * d / half_width));
            acc += clip.samples[n as usize] * cutoff * sinc(cutoff * d) * taper;
        }
        out.push(acc);
    }

    AudioClip::new(out, target_rate, clip.id.clone())
}

/// Resample to the 44.1 kHz analysis rate unless the clip is already there.
pub fn to_analysis_rate(clip: &AudioClip) -> Result<AudioClip, SignalError> {
    if clip.sample_rate == ANALYSIS_SAMPLE_RATE {
        Ok(clip.clone())
    } else {
        resample(clip, ANALYSIS_SAMPLE_RATE)
    }
}
