//! IO, file formats, batch drivers, and synthetic-signal helpers around
//! the `adq-core` algorithms. The `adq` binary wires these into the
//! extract / spectrogram / label / train / evaluate / score / report
//! subcommands.

pub mod extract;
pub mod formats;
pub mod synth;
