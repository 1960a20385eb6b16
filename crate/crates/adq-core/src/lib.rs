//! Core algorithms for the audio ad quality pipeline.
//!
//! Everything in this crate is a pure function of in-memory data: signal
//! transforms (STFT, mel, DCT, CQT), the timbre/rhythm/harmony feature
//! extractors, engagement-log arithmetic (LCR / R-LCR and percentile
//! labels), the linear and neural models with hand-rolled backprop, and
//! the cross-validation/AUC evaluation machinery. File formats, the CLI,
//! and anything that touches the OS live in the companion `adq` crate.
//!
//! The crate is `no_std` (alloc required) and routes float math through
//! `libm`, so results are bit-identical across platforms.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cqt;
pub mod eval;
pub mod features;
pub mod fft;
pub mod harmony;
pub mod linear;
pub(crate) mod math;
pub mod metrics;
pub mod neural;
pub mod rhythm;
pub mod signal;
pub mod timbre;
pub mod wav;

pub use signal::{AudioClip, MelSpectrogram, Spectrogram};
