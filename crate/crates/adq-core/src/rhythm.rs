//! Rhythm features: accent signals, tempogram and tempo estimates,
//! tempogram ratios, dynamic-programming beat tracking, beat profiles,
//! and the Mellin scale transform.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::fft;
use crate::math;
use crate::signal::{stft, AudioClip, SignalError, Spectrogram, LOG_FLOOR};

/// Rhythm analysis framing: 2048 samples with 87.5% overlap (hop 256).
pub const FRAME_LENGTH: usize = 2048;
pub const OVERLAP: f64 = 0.875;

/// Tempogram resolution: integer BPM bins 0..=499.
pub const TEMPOGRAM_BINS: usize = 500;

/// Tempo search window.
pub const TEMPO_MIN_BPM: usize = 40;
pub const TEMPO_MAX_BPM: usize = 250;

/// Fallback estimate for degenerate (all-zero) tempograms.
pub const TEMPO_SENTINEL: f64 = 120.0;

/// Transition-cost weight of the beat-tracking objective.
pub const BEAT_TIGHTNESS: f64 = 100.0;

/// Beat-profile resolution.
pub const BEAT_PROFILE_BINS: usize = 36;

/// Mellin transform output size and u-axis discretization.
pub const MELLIN_COEFFS: usize = 512;
const MELLIN_GRID: usize = 2048;
/// Fixed log-lag range [1, 1e5) frames, so the grid is signal-independent
/// and a tempo change maps to a pure shift along the u axis.
const MELLIN_MAX_LAG: f64 = 1e5;

/// The 13 tempo ratios sampled by the tempogram-ratio feature, in order.
pub const TGR_RATIOS: [f64; 13] = [
    4.0,
    8.0 / 3.0,
    3.0,
    2.0,
    4.0 / 3.0,
    1.5,
    1.0,
    2.0 / 3.0,
    0.75,
    0.5,
    1.0 / 3.0,
    0.375,
    0.25,
];

/// Frequency ranges of the accent bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Full,
    /// 27.5 Hz - 220 Hz
    Bass,
    /// 220 Hz - 1.76 kHz
    Treble,
    /// 1.76 kHz - 14.08 kHz
    High,
}

impl Band {
    pub fn range_hz(self) -> Option<(f64, f64)> {
        match self {
            Band::Full => None,
            Band::Bass => Some((27.5, 220.0)),
            Band::Treble => Some((220.0, 1760.0)),
            Band::High => Some((1760.0, 14080.0)),
        }
    }
}

/// Onset-strength envelope: one non-negative value per analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AccentSignal {
    pub values: Vec<f64>,
    /// Frames per second.
    pub frame_rate: f64,
    pub band: Band,
}

/// Repetition strength per integer BPM, indices 0..=499.
#[derive(Debug, Clone, PartialEq)]
pub struct Tempogram {
    pub weights: Vec<f64>,
    pub band: Band,
}

/// Beat positions from the dynamic-programming tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatGrid {
    pub beat_frames: Vec<usize>,
    pub tempo_used: f64,
}

fn band_bins(spec: &Spectrogram, band: Band) -> (usize, usize) {
    match band.range_hz() {
        None => (0, spec.bins),
        Some((lo, hi)) => {
            let mut start = spec.bins;
            let mut end = 0;
            for (k, &f) in spec.bin_frequencies.iter().enumerate() {
                if f >= lo && f < hi {
                    start = start.min(k);
                    end = k + 1;
                }
            }
            (start.min(end), end)
        }
    }
}

/// Accent signals for several bands off one spectrogram: half-wave
/// rectified first difference of the per-bin log magnitudes, summed over
/// the band's bins, with a leading zero to keep the frame count.
fn accents_from_spec(spec: &Spectrogram, frame_rate: f64, bands: &[Band]) -> Vec<AccentSignal> {
    let frames = spec.frames;
    let mut flux: Vec<Vec<f64>> = bands.iter().map(|_| vec![0.0; frames]).collect();
    let mut prev_log = vec![0.0; spec.bins];
    let mut cur_log = vec![0.0; spec.bins];
    let ranges: Vec<(usize, usize)> = bands.iter().map(|&b| band_bins(spec, b)).collect();

    for t in 0..frames {
        for (k, slot) in cur_log.iter_mut().enumerate() {
            *slot = math::ln(spec.value(k, t).max(LOG_FLOOR));
        }
        if t > 0 {
            for (band_idx, &(start, end)) in ranges.iter().enumerate() {
                let mut acc = 0.0;
                for k in start..end {
                    let d = cur_log[k] - prev_log[k];
                    if d > 0.0 {
                        acc += d;
                    }
                }
                flux[band_idx][t] = acc;
            }
        }
        core::mem::swap(&mut prev_log, &mut cur_log);
    }

    bands
        .iter()
        .zip(flux)
        .map(|(&band, values)| AccentSignal { values, frame_rate, band })
        .collect()
}

/// Onset-strength envelope of a clip for one band.
pub fn accent_signal(clip: &AudioClip, band: Band) -> Result<AccentSignal, SignalError> {
    let spec = stft(clip, FRAME_LENGTH, OVERLAP)?;
    let frame_rate = clip.sample_rate as f64 / spec.frame_hop as f64;
    Ok(accents_from_spec(&spec, frame_rate, &[band]).pop().unwrap())
}

/// Autocorrelation r[k] = sum_n a[n] a[n-k] for k in 0..max_lag, with
/// out-of-range terms treated as zero. Runs through the FFT; the direct
/// double sum is the test oracle.
pub fn autocorrelation(a: &AccentSignal, max_lag: usize) -> Result<Vec<f64>, SignalError> {
    let n = a.values.len();
    if max_lag > n {
        return Err(SignalError::InvalidParameter(
            "max_lag must not exceed the signal length".into(),
        ));
    }
    let size = fft::next_pow2(2 * n);
    let mut buf = fft::fft_real_padded(&a.values, size);
    for v in buf.iter_mut() {
        let m = v.re * v.re + v.im * v.im;
        *v = Complex64::new(m, 0.0);
    }
    fft::ifft_in_place(&mut buf);
    Ok(buf.iter().take(max_lag).map(|c| c.re.max(0.0)).collect())
}

fn interpolate(values: &[f64], at: f64) -> f64 {
    if at < 0.0 || values.is_empty() {
        return 0.0;
    }
    let lo = math::floor(at) as usize;
    if lo + 1 >= values.len() {
        return if lo < values.len() { values[lo] } else { 0.0 };
    }
    let frac = at - lo as f64;
    values[lo] + frac * (values[lo + 1] - values[lo])
}

/// Integral of the piecewise-linear interpolant of `values` over [a, b],
/// treating everything outside [0, len-1] as zero.
fn integrate_linear(values: &[f64], a: f64, b: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let top = (values.len() - 1) as f64;
    let a = a.max(0.0);
    let b = b.min(top);
    if b <= a {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut x = a;
    while x < b {
        let next_break = math::floor(x) + 1.0;
        let x1 = if next_break < b { next_break } else { b };
        let v0 = interpolate(values, x);
        let v1 = interpolate(values, x1);
        acc += 0.5 * (v0 + v1) * (x1 - x);
        x = x1;
    }
    acc
}

/// Tempogram over integer BPM 1..=499 (index 0 is defined as zero):
/// the autocorrelation read at lag = frame_rate * 60 / bpm.
///
/// A 3-lag box filter runs over the autocorrelation first: fractional
/// beat periods split a peak across two adjacent lags while their even
/// multiples stay concentrated, and without the filter that biases the
/// argmax toward subharmonics.
pub fn tempogram_linear(a: &AccentSignal) -> Result<Tempogram, SignalError> {
    let r = autocorrelation(a, a.values.len())?;
    let smoothed: Vec<f64> = (0..r.len())
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 2).min(r.len());
            r[lo..hi].iter().sum::<f64>() / 3.0
        })
        .collect();
    let mut weights = vec![0.0; TEMPOGRAM_BINS];
    for (bpm, w) in weights.iter_mut().enumerate().skip(1) {
        let lag = a.frame_rate * 60.0 / bpm as f64;
        if lag <= (smoothed.len() - 1) as f64 {
            *w = interpolate(&smoothed, lag).max(0.0);
        }
    }
    Ok(Tempogram { weights, band: a.band })
}

/// Primary and secondary tempo estimates in BPM.
///
/// Primary is the argmax over the 40-250 BPM window; secondary is the
/// strongest local maximum at least 10 BPM away, falling back to the
/// primary. An all-zero tempogram yields the 120 BPM sentinel twice.
pub fn estimate_tempo(tg: &Tempogram) -> (f64, f64) {
    let w = &tg.weights;
    let lo = TEMPO_MIN_BPM;
    let hi = TEMPO_MAX_BPM.min(w.len() - 1);

    let mut primary = 0usize;
    let mut best = 0.0;
    for b in lo..=hi {
        if w[b] > best {
            best = w[b];
            primary = b;
        }
    }
    if best <= 0.0 {
        return (TEMPO_SENTINEL, TEMPO_SENTINEL);
    }

    let mut secondary = primary;
    let mut best_secondary = 0.0;
    for b in lo..=hi {
        if b.abs_diff(primary) < 10 {
            continue;
        }
        let left = if b > 0 { w[b - 1] } else { 0.0 };
        let right = if b + 1 < w.len() { w[b + 1] } else { 0.0 };
        if w[b] >= left && w[b] >= right && w[b] > best_secondary {
            best_secondary = w[b];
            secondary = b;
        }
    }
    (primary as f64, secondary as f64)
}

/// Tempogram sampled at the 13 [`TGR_RATIOS`] multiples of `tempo`,
/// normalized by the value at the tempo itself when nonzero. Ratios
/// falling outside [1, 499] BPM contribute zero.
pub fn tempogram_ratios(tg: &Tempogram, tempo: f64) -> Result<Vec<f64>, SignalError> {
    if !(tempo > 0.0 && tempo <= 499.0) {
        return Err(SignalError::InvalidParameter("tempo must lie in (0, 499]".into()));
    }
    let sample = |bpm: f64| -> f64 {
        if !(1.0..=499.0).contains(&bpm) {
            0.0
        } else {
            interpolate(&tg.weights, bpm).max(0.0)
        }
    };
    let mut out: Vec<f64> = TGR_RATIOS.iter().map(|&r| sample(r * tempo)).collect();
    let at_tempo = out[6];
    if at_tempo > 0.0 {
        for v in out.iter_mut() {
            *v /= at_tempo;
        }
    }
    Ok(out)
}

/// Beat positions maximizing accent pickup minus a log-spacing penalty
/// around the target period, by forward DP with backtrace.
pub fn beat_track(a: &AccentSignal, tempo: f64) -> Result<BeatGrid, SignalError> {
    if tempo <= 0.0 {
        return Err(SignalError::InvalidParameter("tempo must be positive".into()));
    }
    let period = a.frame_rate * 60.0 / tempo;
    let n = a.values.len();

    // Degenerate: nothing longer than one beat period to track.
    if (n as f64) < period || n < 2 {
        let argmax = a
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0;
        return Ok(BeatGrid { beat_frames: vec![argmax], tempo_used: tempo });
    }

    // Scale normalization keeps the tightness meaningful across inputs.
    let sigma = math::sqrt(math::population_variance(&a.values));
    let accent: Vec<f64> =
        if sigma > 0.0 { a.values.iter().map(|v| v / sigma).collect() } else { a.values.clone() };

    let p_min = (math::ceil(period / 2.0) as usize).max(1);
    let p_max = (math::floor(period * 2.0) as usize).max(p_min + 1);

    let mut score = vec![0.0f64; n];
    let mut backlink = vec![usize::MAX; n];
    for t in 0..n {
        let mut best = f64::MIN;
        let mut best_prev = usize::MAX;
        let upper = t.min(p_max);
        if t >= p_min {
            for p in p_min..=upper {
                let prev = t - p;
                let log_ratio = math::ln(p as f64 / period);
                let candidate = score[prev] - BEAT_TIGHTNESS * log_ratio * log_ratio;
                if candidate > best {
                    best = candidate;
                    best_prev = prev;
                }
            }
        }
        if best > 0.0 {
            score[t] = accent[t] + best;
            backlink[t] = best_prev;
        } else {
            score[t] = accent[t];
        }
    }

    let mut cursor = score
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0;
    let mut beats = vec![cursor];
    while backlink[cursor] != usize::MAX {
        cursor = backlink[cursor];
        beats.push(cursor);
    }
    beats.reverse();
    Ok(BeatGrid { beat_frames: beats, tempo_used: tempo })
}

/// Mean accent shape between successive beats, resampled to 36 bins and
/// normalized to peak 1. Fewer than two beats yields all zeros.
pub fn beat_profile(a: &AccentSignal, beats: &BeatGrid) -> Vec<f64> {
    let bins = BEAT_PROFILE_BINS;
    let mut profile = vec![0.0; bins];
    if beats.beat_frames.len() < 2 {
        return profile;
    }

    let mut spans = 0usize;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for pair in beats.beat_frames.windows(2) {
        let (left, right) = (pair[0], pair[1].min(a.values.len()));
        let len = right.saturating_sub(left);
        if len == 0 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for j in 0..len {
            let bin = (j * bins) / len;
            sums[bin] += a.values[left + j];
            counts[bin] += 1;
        }
        for (bin, &c) in counts.iter().enumerate() {
            if c > 0 {
                profile[bin] += sums[bin] / c as f64;
            }
        }
        spans += 1;
    }
    if spans == 0 {
        return profile;
    }
    for v in profile.iter_mut() {
        *v /= spans as f64;
    }
    let peak = profile.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak > 0.0 {
        for v in profile.iter_mut() {
            *v /= peak;
        }
    }
    profile
}

/// Magnitude of the discretized scale transform of the accent signal's
/// biased autocorrelation: resample the autocorrelation on a fixed
/// exponential lag grid, weight by sqrt(lag), and keep the first 512
/// DFT magnitudes. Time-scaling the input shifts the grid, which the
/// magnitude ignores.
pub fn mellin(a: &AccentSignal) -> Result<Vec<f64>, SignalError> {
    let n = a.values.len();
    if n < 2 || a.values.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; MELLIN_COEFFS]);
    }
    let r = autocorrelation(a, n)?;
    let biased: Vec<f64> = r.iter().map(|v| v / n as f64).collect();

    // Area-weighted resampling onto the exponential grid: each cell takes
    // the mean of the autocorrelation over its lag interval, so narrow
    // peaks keep their mass wherever they land relative to the grid.
    let du = math::ln(MELLIN_MAX_LAG) / MELLIN_GRID as f64;
    let mut grid = vec![Complex64::new(0.0, 0.0); MELLIN_GRID];
    for (j, slot) in grid.iter_mut().enumerate() {
        let lag = math::exp(j as f64 * du);
        if lag > (n - 1) as f64 {
            break;
        }
        let cell_lo = math::exp((j as f64 - 0.5) * du);
        let cell_hi = math::exp((j as f64 + 0.5) * du);
        let mean = integrate_linear(&biased, cell_lo, cell_hi) / (cell_hi - cell_lo);
        slot.re = mean * math::sqrt(lag);
    }
    fft::fft_in_place(&mut grid);
    Ok(grid.iter().take(MELLIN_COEFFS).map(|c| fft::magnitude(*c)).collect())
}

/// All rhythm blocks in ledger order: TEMPO(2), TG_LIN(500), TGR bass /
/// treble / high (13 each), BPDIST bass / treble / high (36 each),
/// Mellin(512) — 1161 values.
///
/// The full-band accent drives the tempo estimate, the shared beat grid,
/// and the Mellin transform; the per-band accents feed their own
/// tempogram ratios and beat profiles.
pub fn rhythm_vector(clip: &AudioClip) -> Result<Vec<f64>, SignalError> {
    let spec = stft(clip, FRAME_LENGTH, OVERLAP)?;
    let frame_rate = clip.sample_rate as f64 / spec.frame_hop as f64;
    let accents = accents_from_spec(&spec, frame_rate, &[Band::Full, Band::Bass, Band::Treble, Band::High]);
    let (full, bands) = accents.split_first().unwrap();

    let tg_full = tempogram_linear(full)?;
    let (primary, secondary) = estimate_tempo(&tg_full);

    let mut out = Vec::with_capacity(1161);
    out.push(primary);
    out.push(secondary);
    out.extend_from_slice(&tg_full.weights);

    for band_accent in bands {
        let tg = tempogram_linear(band_accent)?;
        out.extend(tempogram_ratios(&tg, primary)?);
    }

    let beats = beat_track(full, primary)?;
    for band_accent in bands {
        out.extend(beat_profile(band_accent, &beats));
    }

    out.extend(mellin(full)?);
    Ok(out)
}
