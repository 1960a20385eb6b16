//! Binary spectrogram format: a fixed 64-byte header followed by the
//! bin-major magnitude matrix as little-endian f32.

use std::fs;
use std::path::Path;

use adq_core::signal::Spectrogram;
use anyhow::{bail, Context, Result};

const MAGIC: &[u8; 8] = b"ADQSPEC\0";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 64;

/// CQT/compression parameters carried in the header.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramMeta {
    pub hop: u32,
    pub sample_rate: u32,
    pub bins_per_octave: u32,
    pub f_min: f64,
    pub power: f64,
    pub scale: f64,
}

pub fn write_spectrogram(path: &Path, spec: &Spectrogram, meta: &SpectrogramMeta) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * spec.magnitudes.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(spec.bins as u32).to_le_bytes());
    bytes.extend_from_slice(&(spec.frames as u32).to_le_bytes());
    bytes.extend_from_slice(&meta.hop.to_le_bytes());
    bytes.extend_from_slice(&meta.sample_rate.to_le_bytes());
    bytes.extend_from_slice(&meta.bins_per_octave.to_le_bytes());
    bytes.extend_from_slice(&meta.f_min.to_le_bytes());
    bytes.extend_from_slice(&meta.power.to_le_bytes());
    bytes.extend_from_slice(&meta.scale.to_le_bytes());
    bytes.resize(HEADER_LEN, 0);
    for &v in &spec.magnitudes {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_spectrogram(path: &Path) -> Result<(Spectrogram, SpectrogramMeta)> {
    let bytes =
        fs::read(path).with_context(|| format!("cannot read spectrogram {}", path.display()))?;
    if bytes.len() < HEADER_LEN {
        bail!("{}: truncated header", path.display());
    }
    if &bytes[0..8] != MAGIC {
        bail!("{}: not an adq spectrogram (bad magic)", path.display());
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let f64_at = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        bail!("{}: unsupported version {version}", path.display());
    }
    let bins = u32_at(12) as usize;
    let frames = u32_at(16) as usize;
    let meta = SpectrogramMeta {
        hop: u32_at(20),
        sample_rate: u32_at(24),
        bins_per_octave: u32_at(28),
        f_min: f64_at(32),
        power: f64_at(40),
        scale: f64_at(48),
    };
    let expected = HEADER_LEN + 4 * bins * frames;
    if bytes.len() != expected {
        bail!("{}: payload holds {} bytes, expected {}", path.display(), bytes.len(), expected);
    }

    let magnitudes: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let ratio = 2f64.powf(1.0 / meta.bins_per_octave as f64);
    let bin_frequencies: Vec<f64> = (0..bins).map(|k| meta.f_min * ratio.powi(k as i32)).collect();
    Ok((
        Spectrogram {
            magnitudes,
            bins,
            frames,
            bin_frequencies,
            frame_hop: meta.hop as usize,
            frame_length: 0,
        },
        meta,
    ))
}
