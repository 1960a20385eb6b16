//! Batch drivers: WAV directory to feature matrix or log-CQT files,
//! parallel over files with per-file failure collection.

use std::fs;
use std::path::{Path, PathBuf};

use adq_core::cqt::{cqt, DEFAULT_F_MIN};
use adq_core::features::{feature_names, feature_vector, ledger_total};
use adq_core::linear::FeatureMatrix;
use adq_core::signal::{log_compress, to_analysis_rate, AudioClip, Spectrogram};
use adq_core::wav::decode_wav;
use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use crate::formats::spectrogram::SpectrogramMeta;
use crate::formats::write_spectrogram;

/// CNN front-end parameters: 100 log-CQT bins, hop 1024, power-law 2
/// compression scaled by 0.1.
pub const CNN_CQT_BINS: usize = 100;
pub const CNN_CQT_HOP: usize = 1024;
pub const CNN_BINS_PER_OCTAVE: usize = 12;
pub const LOG_POWER: f64 = 2.0;
pub const LOG_SCALE: f64 = 0.1;

pub struct ExtractOutcome {
    pub matrix: FeatureMatrix,
    /// (file stem, error) for every file that failed.
    pub failures: Vec<(String, String)>,
}

/// Sorted `.wav` paths directly inside `dir`.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in
        fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?
    {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("wav") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        bail!("no .wav files in {}", dir.display());
    }
    Ok(paths)
}

/// Decode one WAV into a 44.1 kHz clip named after its file stem.
pub fn load_clip(path: &Path) -> Result<AudioClip> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut clip = decode_wav(&bytes).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    clip.id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("unnamed").to_string();
    to_analysis_rate(&clip).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn run_parallel<T: Send>(
    paths: &[PathBuf],
    workers: Option<usize>,
    job: impl Fn(&Path) -> Result<T> + Sync,
) -> Vec<(String, Result<T>)> {
    let work = |paths: &[PathBuf]| {
        paths
            .par_iter()
            .map(|path| {
                let id =
                    path.file_stem().and_then(|s| s.to_str()).unwrap_or("unnamed").to_string();
                (id, job(path))
            })
            .collect()
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(|| work(paths)),
        None => work(paths),
    }
}

/// Extract the full hand-crafted feature vector for every WAV in `dir`.
/// Rows are ordered by ad id; failures are collected, not fatal.
pub fn extract_features_dir(dir: &Path, workers: Option<usize>) -> Result<ExtractOutcome> {
    let paths = list_wavs(dir)?;
    let mut results = run_parallel(&paths, workers, |path| {
        let clip = load_clip(path)?;
        feature_vector(&clip).map_err(|e| anyhow!("{}: {e}", path.display()))
    });
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut data = Vec::new();
    let mut ad_ids = Vec::new();
    let mut failures = Vec::new();
    for (id, outcome) in results {
        match outcome {
            Ok(values) => {
                data.extend(values);
                ad_ids.push(id);
            }
            Err(e) => failures.push((id, format!("{e:#}"))),
        }
    }
    if ad_ids.is_empty() {
        bail!("every file failed extraction");
    }
    let rows = ad_ids.len();
    let matrix = FeatureMatrix::new(data, rows, ledger_total(), feature_names(), ad_ids)
        .map_err(|e| anyhow!("assembled matrix is invalid: {e}"))?;
    Ok(ExtractOutcome { matrix, failures })
}

/// The CNN front end: log-compressed 100-bin CQT of one clip.
pub fn log_cqt(clip: &AudioClip) -> Result<Spectrogram> {
    let spec = cqt(clip, CNN_CQT_BINS, CNN_BINS_PER_OCTAVE, DEFAULT_F_MIN, CNN_CQT_HOP)
        .map_err(|e| anyhow!("{}: {e}", clip.id))?;
    log_compress(&spec, LOG_POWER, LOG_SCALE).map_err(|e| anyhow!("{}: {e}", clip.id))
}

/// Compute and store one `<stem>.cqt` per WAV. Returns (written ids,
/// failures).
pub fn spectrogram_dir(
    dir: &Path,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<(Vec<String>, Vec<(String, String)>)> {
    let paths = list_wavs(dir)?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let meta = SpectrogramMeta {
        hop: CNN_CQT_HOP as u32,
        sample_rate: adq_core::signal::ANALYSIS_SAMPLE_RATE,
        bins_per_octave: CNN_BINS_PER_OCTAVE as u32,
        f_min: DEFAULT_F_MIN,
        power: LOG_POWER,
        scale: LOG_SCALE,
    };
    let mut results = run_parallel(&paths, workers, |path| {
        let clip = load_clip(path)?;
        let spec = log_cqt(&clip)?;
        let out = out_dir.join(format!("{}.cqt", clip.id));
        write_spectrogram(&out, &spec, &meta)?;
        Ok(())
    });
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut written = Vec::new();
    let mut failures = Vec::new();
    for (id, outcome) in results {
        match outcome {
            Ok(()) => written.push(id),
            Err(e) => failures.push((id, format!("{e:#}"))),
        }
    }
    Ok((written, failures))
}
