//! Feature table CSV (`ad_id` + one named column per dimension) with a
//! JSON sidecar describing the block ledger.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adq_core::features::{ledger_total, FEATURE_LEDGER};
use adq_core::linear::FeatureMatrix;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: String,
    blocks: Vec<(String, usize)>,
    total: usize,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Write the matrix as CSV (rows in their current order) plus the
/// ledger sidecar.
pub fn write_features(path: &Path, matrix: &FeatureMatrix) -> Result<()> {
    let mut out = String::new();
    out.push_str("ad_id");
    for name in &matrix.column_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for r in 0..matrix.rows {
        out.push_str(&matrix.ad_ids[r]);
        for v in matrix.row(r) {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path)
        .with_context(|| format!("cannot create feature file {}", path.display()))?;
    file.write_all(out.as_bytes())?;

    let sidecar = Sidecar {
        format: "adq.features/1".to_string(),
        blocks: FEATURE_LEDGER.iter().map(|(n, d)| (n.to_string(), *d)).collect(),
        total: ledger_total(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a feature CSV back into a matrix.
pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open feature file {}", path.display()))?;
    let headers = reader.headers().context("feature file has no header")?;
    if headers.is_empty() || &headers[0] != "ad_id" {
        bail!("feature file must start with an ad_id column");
    }
    let column_names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let cols = column_names.len();

    let mut data = Vec::new();
    let mut ad_ids = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.with_context(|| format!("malformed feature row {}", i + 2))?;
        if row.len() != cols + 1 {
            bail!("feature row {}: expected {} fields, found {}", i + 2, cols + 1, row.len());
        }
        ad_ids.push(row[0].to_string());
        for field in row.iter().skip(1) {
            data.push(
                field
                    .parse::<f64>()
                    .with_context(|| format!("feature row {}: bad number {field:?}", i + 2))?,
            );
        }
    }
    let rows = ad_ids.len();
    FeatureMatrix::new(data, rows, cols, column_names, ad_ids)
        .map_err(|e| anyhow::anyhow!("invalid feature table: {e}"))
}
