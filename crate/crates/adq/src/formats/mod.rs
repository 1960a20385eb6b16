//! On-disk formats: event logs, feature tables, labels, binary
//! spectrograms, model files, and evaluation reports.

pub mod event_log;
pub mod features;
pub mod labels;
pub mod models;
pub mod report;
pub mod spectrogram;

pub use event_log::parse_event_log;
pub use features::{read_features, write_features};
pub use labels::{read_labels, write_labels, write_stats};
pub use models::{
    read_cnn, read_linear, read_mlp, write_cnn, write_linear, write_mlp, MlpStandardization,
};
pub use report::{write_coefficients, write_fold_csv, write_runtime_table};
pub use spectrogram::{read_spectrogram, write_spectrogram, SpectrogramMeta};
