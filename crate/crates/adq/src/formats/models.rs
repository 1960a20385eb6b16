//! Model files. The linear model is one self-describing JSON document;
//! neural models are a compact JSON header line followed by the flat
//! parameter vector as little-endian f64.

use std::fs;
use std::path::Path;

use adq_core::linear::{LinearModel, Standardization};
use adq_core::neural::{Cnn, CnnConfig, ConvLayerSpec, Mlp};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct StandardizationDoc {
    kept_columns: Vec<usize>,
    means: Vec<f64>,
    stds: Vec<f64>,
    dropped_columns: Vec<String>,
}

impl From<&Standardization> for StandardizationDoc {
    fn from(s: &Standardization) -> Self {
        StandardizationDoc {
            kept_columns: s.kept_columns.clone(),
            means: s.means.clone(),
            stds: s.stds.clone(),
            dropped_columns: s.dropped_columns.clone(),
        }
    }
}

impl From<StandardizationDoc> for Standardization {
    fn from(d: StandardizationDoc) -> Self {
        Standardization {
            kept_columns: d.kept_columns,
            means: d.means,
            stds: d.stds,
            dropped_columns: d.dropped_columns,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LinearDoc {
    format: String,
    lambda: f64,
    intercept: f64,
    weights: Vec<f64>,
    column_names: Vec<String>,
    standardization: StandardizationDoc,
    feature_ledger_total: usize,
}

pub fn write_linear(path: &Path, model: &LinearModel) -> Result<()> {
    let doc = LinearDoc {
        format: "adq.linear/1".into(),
        lambda: model.lambda,
        intercept: model.intercept,
        weights: model.weights.clone(),
        column_names: model.column_names.clone(),
        standardization: (&model.standardization).into(),
        feature_ledger_total: adq_core::features::ledger_total(),
    };
    fs::write(path, serde_json::to_string(&doc)?)
        .with_context(|| format!("cannot write model to {}", path.display()))
}

pub fn read_linear(path: &Path) -> Result<LinearModel> {
    let doc: LinearDoc = serde_json::from_slice(
        &fs::read(path).with_context(|| format!("cannot read model {}", path.display()))?,
    )
    .with_context(|| format!("{} is not a linear model file", path.display()))?;
    if doc.format != "adq.linear/1" {
        bail!("{}: unknown model format {:?}", path.display(), doc.format);
    }
    Ok(LinearModel {
        weights: doc.weights,
        intercept: doc.intercept,
        lambda: doc.lambda,
        standardization: doc.standardization.into(),
        column_names: doc.column_names,
    })
}

/// Standardization applied to MLP inputs at training time, stored with
/// the model so scoring can reproduce it.
pub type MlpStandardization = Standardization;

#[derive(Serialize, Deserialize)]
struct MlpHeader {
    format: String,
    sizes: Vec<usize>,
    dropout: f64,
    init_seed: u64,
    param_count: usize,
    standardization: Option<StandardizationDoc>,
}

#[derive(Serialize, Deserialize)]
struct CnnHeader {
    format: String,
    input_bins: usize,
    conv: Vec<(usize, usize, usize)>,
    dense: Vec<usize>,
    dropout: f64,
    init_seed: u64,
    param_count: usize,
}

fn write_with_payload(path: &Path, header: String, theta: &[f64]) -> Result<()> {
    let mut bytes = header.into_bytes();
    bytes.push(b'\n');
    for &v in theta {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).with_context(|| format!("cannot write model to {}", path.display()))
}

fn split_payload<'a>(bytes: &'a [u8], path: &Path) -> Result<(&'a [u8], &'a [u8])> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .with_context(|| format!("{}: missing header line", path.display()))?;
    Ok((&bytes[..newline], &bytes[newline + 1..]))
}

fn payload_to_theta(payload: &[u8], expected: usize, path: &Path) -> Result<Vec<f64>> {
    if payload.len() != expected * 8 {
        bail!(
            "{}: payload holds {} bytes, header promises {} parameters",
            path.display(),
            payload.len(),
            expected
        );
    }
    Ok(payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_mlp(path: &Path, mlp: &Mlp, standardization: Option<&Standardization>) -> Result<()> {
    let header = serde_json::to_string(&MlpHeader {
        format: "adq.mlp/1".into(),
        sizes: mlp.sizes.clone(),
        dropout: mlp.dropout,
        init_seed: mlp.init_seed,
        param_count: mlp.theta.len(),
        standardization: standardization.map(StandardizationDoc::from),
    })?;
    write_with_payload(path, header, &mlp.theta)
}

pub fn read_mlp(path: &Path) -> Result<(Mlp, Option<Standardization>)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read model {}", path.display()))?;
    let (header, payload) = split_payload(&bytes, path)?;
    let header: MlpHeader = serde_json::from_slice(header)
        .with_context(|| format!("{} is not an mlp model file", path.display()))?;
    if header.format != "adq.mlp/1" {
        bail!("{}: unknown model format {:?}", path.display(), header.format);
    }
    let theta = payload_to_theta(payload, header.param_count, path)?;
    Ok((
        Mlp {
            sizes: header.sizes,
            dropout: header.dropout,
            theta,
            init_seed: header.init_seed,
        },
        header.standardization.map(Standardization::from),
    ))
}

pub fn write_cnn(path: &Path, cnn: &Cnn) -> Result<()> {
    let header = serde_json::to_string(&CnnHeader {
        format: "adq.cnn/1".into(),
        input_bins: cnn.config.input_bins,
        conv: cnn.config.conv.iter().map(|l| (l.filters, l.kernel_len, l.pool)).collect(),
        dense: cnn.config.dense.clone(),
        dropout: cnn.config.dropout,
        init_seed: cnn.init_seed,
        param_count: cnn.theta.len(),
    })?;
    write_with_payload(path, header, &cnn.theta)
}

pub fn read_cnn(path: &Path) -> Result<Cnn> {
    let bytes = fs::read(path).with_context(|| format!("cannot read model {}", path.display()))?;
    let (header, payload) = split_payload(&bytes, path)?;
    let header: CnnHeader = serde_json::from_slice(header)
        .with_context(|| format!("{} is not a cnn model file", path.display()))?;
    if header.format != "adq.cnn/1" {
        bail!("{}: unknown model format {:?}", path.display(), header.format);
    }
    let config = CnnConfig {
        input_bins: header.input_bins,
        conv: header
            .conv
            .iter()
            .map(|&(filters, kernel_len, pool)| ConvLayerSpec { filters, kernel_len, pool })
            .collect(),
        dense: header.dense,
        dropout: header.dropout,
    };
    if config.param_count() != header.param_count {
        bail!("{}: architecture implies {} parameters, header says {}", path.display(), config.param_count(), header.param_count);
    }
    let theta = payload_to_theta(payload, header.param_count, path)?;
    Ok(Cnn { config, theta, init_seed: header.init_seed })
}
