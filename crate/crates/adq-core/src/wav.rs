//! RIFF/WAVE decoding from a byte slice (PCM 16-bit and IEEE float32).
//!
//! Stereo is averaged to mono and PCM samples are scaled to [-1, 1].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::signal::AudioClip;

#[derive(Debug, Clone, PartialEq)]
pub enum WavError {
    /// Container structure problems, naming the offending field.
    Malformed(String),
    /// Parsable container with a codec this decoder does not accept.
    UnsupportedCodec(String),
    /// A data chunk with no samples in it.
    EmptyPayload,
}

impl fmt::Display for WavError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WavError::Malformed(what) => write!(f, "malformed wav: {what}"),
            WavError::UnsupportedCodec(what) => write!(f, "unsupported wav codec: {what}"),
            WavError::EmptyPayload => write!(f, "wav data chunk holds zero samples"),
        }
    }
}

impl core::error::Error for WavError {}

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

fn read_u16(bytes: &[u8], at: usize, field: &str) -> Result<u16, WavError> {
    bytes
        .get(at..at + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or_else(|| WavError::Malformed(format!("truncated {field}")))
}

fn read_u32(bytes: &[u8], at: usize, field: &str) -> Result<u32, WavError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| WavError::Malformed(format!("truncated {field}")))
}

struct Format {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Decode a RIFF/WAVE byte stream into a mono [`AudioClip`].
///
/// The clip id is left empty; callers name the clip after its source.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, WavError> {
    if bytes.len() < 12 {
        return Err(WavError::Malformed(format!(
            "header needs 12 bytes, got {}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(WavError::Malformed("RIFF magic missing".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(WavError::Malformed("WAVE form type missing".into()));
    }

    let mut fmt: Option<Format> = None;
    let mut data: Option<&[u8]> = None;
    let mut at = 12usize;
    while at + 8 <= bytes.len() {
        let chunk_id = &bytes[at..at + 4];
        let chunk_len = read_u32(bytes, at + 4, "chunk size")? as usize;
        let body_start = at + 8;
        let body_end = body_start + chunk_len;
        if body_end > bytes.len() {
            return Err(WavError::Malformed(format!(
                "chunk {:?} overruns file",
                core::str::from_utf8(chunk_id).unwrap_or("????")
            )));
        }
        match chunk_id {
            b"fmt " => {
                fmt = Some(Format {
                    format_tag: read_u16(bytes, body_start, "fmt format tag")?,
                    channels: read_u16(bytes, body_start + 2, "fmt channel count")?,
                    sample_rate: read_u32(bytes, body_start + 4, "fmt sample rate")?,
                    bits_per_sample: read_u16(bytes, body_start + 14, "fmt bits per sample")?,
                });
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {}
        }
        // Chunks are word-aligned.
        at = body_end + (chunk_len & 1);
    }

    let fmt = fmt.ok_or_else(|| WavError::Malformed("fmt chunk missing".into()))?;
    let data = data.ok_or_else(|| WavError::Malformed("data chunk missing".into()))?;

    if fmt.channels == 0 {
        return Err(WavError::Malformed("fmt channel count is zero".into()));
    }
    if fmt.sample_rate == 0 {
        return Err(WavError::Malformed("fmt sample rate is zero".into()));
    }

    let interleaved: Vec<f64> = match (fmt.format_tag, fmt.bits_per_sample) {
        (FORMAT_PCM, 16) => {
            if data.len() % 2 != 0 {
                return Err(WavError::Malformed("data chunk not 16-bit aligned".into()));
            }
            data.chunks_exact(2)
                .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
                .collect()
        }
        (FORMAT_IEEE_FLOAT, 32) => {
            if data.len() % 4 != 0 {
                return Err(WavError::Malformed("data chunk not 32-bit aligned".into()));
            }
            data.chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect()
        }
        (tag, bits) => {
            return Err(WavError::UnsupportedCodec(format!(
                "format tag {tag} with {bits} bits per sample (PCM16 and float32 only)"
            )))
        }
    };

    if interleaved.is_empty() {
        return Err(WavError::EmptyPayload);
    }

    let channels = fmt.channels as usize;
    let frames = interleaved.len() / channels;
    if frames == 0 {
        return Err(WavError::EmptyPayload);
    }
    let mono: Vec<f64> = (0..frames)
        .map(|i| {
            interleaved[i * channels..(i + 1) * channels].iter().sum::<f64>() / channels as f64
        })
        .collect();

    AudioClip::new(mono, fmt.sample_rate, "").map_err(|e| WavError::Malformed(format!("{e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    /// Independent little RIFF writer used only as the test oracle.
    fn wav_bytes(channels: u16, sample_rate: u32, pcm: &[i16]) -> Vec<u8> {
        let data_len = (pcm.len() * 2) as u32;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&sample_rate.to_le_bytes());
        let byte_rate = sample_rate * channels as u32 * 2;
        out.extend_from_slice(&byte_rate.to_le_bytes());
        out.extend_from_slice(&(channels * 2).to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&data_len.to_le_bytes());
        for s in pcm {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    #[test]
    fn one_second_of_silence_decodes_to_zeros() {
        let bytes = wav_bytes(1, 44100, &vec![0i16; 44100]);
        let clip = decode_wav(&bytes).unwrap();
        assert_eq!(clip.sample_rate, 44100);
        assert_eq!(clip.samples.len(), 44100);
        assert!(clip.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn full_scale_sine_round_trips_within_one_lsb() {
        let n = 44100;
        let pcm: Vec<i16> = (0..n)
            .map(|i| {
                let v = libm::sin(2.0 * PI * 440.0 * i as f64 / 44100.0);
                libm::round(v * 32767.0) as i16
            })
            .collect();
        let bytes = wav_bytes(1, 44100, &pcm);
        let clip = decode_wav(&bytes).unwrap();

        // Sample-by-sample comparison against the synthesis script above.
        for (decoded, &raw) in clip.samples.iter().zip(pcm.iter()) {
            assert!((decoded - raw as f64 / 32768.0).abs() < 1e-12);
        }
        let peak = clip.samples.iter().fold(0.0f64, |a, &s| a.max(s.abs()));
        assert!((peak - 1.0).abs() <= 1.0 / 32768.0, "peak {peak}");
    }

    #[test]
    fn truncated_header_is_rejected() {
        assert!(matches!(decode_wav(&[0u8; 8]), Err(WavError::Malformed(_))));
    }

    #[test]
    fn stereo_averages_to_mono() {
        // L = 0.5, R = -0.5 -> 0; L = R = 0.25 -> 0.25.
        let pcm = vec![16384i16, -16384, 8192, 8192];
        let clip = decode_wav(&wav_bytes(2, 22050, &pcm)).unwrap();
        assert_eq!(clip.samples.len(), 2);
        assert!(clip.samples[0].abs() < 1e-12);
        assert!((clip.samples[1] - 0.25).abs() < 1e-12);
        assert_eq!(clip.sample_rate, 22050);
    }

    #[test]
    fn float32_payload_decodes() {
        let samples = [0.25f32, -0.5, 1.0, 0.0];
        let data_len = (samples.len() * 4) as u32;
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36 + data_len).to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&3u16.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&48000u32.to_le_bytes());
        bytes.extend_from_slice(&(48000u32 * 4).to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&32u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&data_len.to_le_bytes());
        for s in samples {
            bytes.extend_from_slice(&s.to_le_bytes());
        }
        let clip = decode_wav(&bytes).unwrap();
        assert_eq!(clip.samples, vec![0.25, -0.5, 1.0, 0.0]);
    }

    #[test]
    fn unsupported_codec_and_empty_payload_are_named() {
        let mut bytes = wav_bytes(1, 44100, &[0i16; 4]);
        bytes[20] = 85; // format tag -> mp3
        assert!(matches!(decode_wav(&bytes), Err(WavError::UnsupportedCodec(_))));

        let empty = wav_bytes(1, 44100, &[]);
        assert!(matches!(decode_wav(&empty), Err(WavError::EmptyPayload)));
    }
}
