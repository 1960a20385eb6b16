//! Synthetic audio and engagement-log generators used by the test
//! suites and for demo corpora: click tracks, speech-band babble, and a
//! two-class ad corpus where the "good" class pulses more slowly and
//! keeps its speech band cleaner.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use adq_core::signal::AudioClip;
use anyhow::{Context, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SAMPLE_RATE: u32 = 44100;

/// Short decaying tone bursts on an isochronous grid.
pub fn click_track(bpm: f64, seconds: f64, amplitude: f64) -> Vec<f64> {
    let n = (seconds * SAMPLE_RATE as f64) as usize;
    let period = 60.0 / bpm * SAMPLE_RATE as f64;
    let mut samples = vec![0.0; n];
    let mut k = 0.0;
    while (k * period) < n as f64 {
        let start = (k * period) as usize;
        for j in 0..256.min(n - start) {
            let t = j as f64;
            samples[start + j] +=
                amplitude * (-t / 48.0).exp() * (2.0 * PI * 1500.0 * t / SAMPLE_RATE as f64).sin();
        }
        k += 1.0;
    }
    samples
}

/// Speech-band (300 Hz - 3 kHz) noise with a syllable-rate envelope.
pub fn speech_babble(seconds: f64, amplitude: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = (seconds * SAMPLE_RATE as f64) as usize;
    let white: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // Band-pass as the difference of two one-pole low-passes.
    let alpha_hi = one_pole_alpha(3000.0);
    let alpha_lo = one_pole_alpha(300.0);
    let mut lp_hi = 0.0;
    let mut lp_lo = 0.0;
    let syllable_rate = rng.gen_range(3.0..5.5);
    let phase = rng.gen_range(0.0..PI);
    let mut out = Vec::with_capacity(n);
    for (i, &x) in white.iter().enumerate() {
        lp_hi += alpha_hi * (x - lp_hi);
        lp_lo += alpha_lo * (x - lp_lo);
        let band = lp_hi - lp_lo;
        let t = i as f64 / SAMPLE_RATE as f64;
        let envelope = 0.35 + 0.65 * (PI * syllable_rate * t + phase).sin().abs();
        out.push(amplitude * band * envelope);
    }
    out
}

fn one_pole_alpha(cutoff_hz: f64) -> f64 {
    let x = 2.0 * PI * cutoff_hz / SAMPLE_RATE as f64;
    x / (x + 1.0)
}

/// Full-band noise floor.
pub fn broadband_noise(seconds: f64, amplitude: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = (seconds * SAMPLE_RATE as f64) as usize;
    (0..n).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect()
}

/// One synthetic ad. Good ads pulse at 60-90 BPM with a clean speech
/// band; bad ads pulse at 150-210 BPM under a heavy noise floor.
pub fn synth_ad(id: &str, good: bool, seconds: f64, rng: &mut ChaCha8Rng) -> AudioClip {
    let (bpm, click_amp, speech_amp, noise_amp) = if good {
        (rng.gen_range(60.0..90.0), 0.5, 0.45, 0.03)
    } else {
        (rng.gen_range(150.0..210.0), 0.5, 0.12, 0.28)
    };
    let clicks = click_track(bpm, seconds, click_amp);
    let speech = speech_babble(seconds, speech_amp, rng);
    let noise = broadband_noise(seconds, noise_amp, rng);
    let samples: Vec<f64> = clicks
        .iter()
        .zip(speech.iter())
        .zip(noise.iter())
        .map(|((&c, &s), &n)| (c + s + n).clamp(-1.0, 1.0))
        .collect();
    AudioClip::new(samples, SAMPLE_RATE, id).expect("synthetic clip is valid")
}

/// Deterministic two-class corpus, ids `ad000`..; even indices good.
pub fn synth_corpus(n_ads: usize, seconds: f64, seed: u64) -> Vec<(AudioClip, u8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_ads)
        .map(|i| {
            let good = i % 2 == 0;
            let clip = synth_ad(&format!("ad{i:03}"), good, seconds, &mut rng);
            (clip, u8::from(good))
        })
        .collect()
}

/// PCM16 RIFF/WAVE writer for feeding the CLI with synthetic audio.
pub fn write_wav_pcm16(path: &Path, samples: &[f64], sample_rate: u32) -> Result<()> {
    let data_len = (samples.len() * 2) as u32;
    let mut bytes = Vec::with_capacity(44 + samples.len() * 2);
    bytes.extend_from_slice(b"RIFF");
    bytes.extend_from_slice(&(36 + data_len).to_le_bytes());
    bytes.extend_from_slice(b"WAVE");
    bytes.extend_from_slice(b"fmt ");
    bytes.extend_from_slice(&16u32.to_le_bytes());
    bytes.extend_from_slice(&1u16.to_le_bytes());
    bytes.extend_from_slice(&1u16.to_le_bytes());
    bytes.extend_from_slice(&sample_rate.to_le_bytes());
    bytes.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    bytes.extend_from_slice(&2u16.to_le_bytes());
    bytes.extend_from_slice(&16u16.to_le_bytes());
    bytes.extend_from_slice(b"data");
    bytes.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).with_context(|| format!("cannot write wav {}", path.display()))
}

/// Engagement log rows for a set of ads whose long-click propensity
/// follows their quality flag; returns CSV text with header.
pub fn synth_event_log(ads: &[(String, u8)], impressions_per_ad: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("ad_id,user_id,event,dwell_seconds,timestamp\n");
    let mut ts = 0u64;
    for (ad_id, label) in ads {
        let long_click_rate = if *label == 1 { 0.05 } else { 0.008 };
        for i in 0..impressions_per_ad {
            let user = format!("u{:04}", rng.gen_range(0..5000));
            out.push_str(&format!("{ad_id},{user},impression,0,{ts}\n"));
            ts += 1;
            if rng.gen_range(0.0..1.0) < long_click_rate {
                let dwell = rng.gen_range(6.0..40.0);
                out.push_str(&format!("{ad_id},{user},click,{dwell},{ts}\n"));
                ts += 1;
            } else if i % 37 == 0 {
                // occasional short (noise) click
                let dwell = rng.gen_range(0.0..4.0);
                out.push_str(&format!("{ad_id},{user},click,{dwell},{ts}\n"));
                ts += 1;
            }
        }
    }
    out
}
