//! Evaluation outputs: deterministic per-fold CSV, the human-readable
//! summary table with wall times, and the selected-coefficient CSV.

use std::fs;
use std::path::Path;

use adq_core::eval::EvalReport;
use anyhow::{Context, Result};

/// `method,fold,auc` rows plus a `mean`/`ci95` tail. Fully determined by
/// seeds and data, so reruns are byte-identical.
pub fn write_fold_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut out = String::from("method,fold,auc\n");
    for (fold, auc) in report.fold_aucs.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", report.method, fold, auc));
    }
    out.push_str(&format!("{},mean,{}\n", report.method, report.mean_auc));
    out.push_str(&format!("{},ci95,{}\n", report.method, report.ci95_half_width));
    fs::write(path, out).with_context(|| format!("cannot write report {}", path.display()))
}

/// Summary table with mean AUC, the 95% interval, and measured wall
/// times. Times vary run to run, so this lives apart from the
/// byte-stable artifacts.
pub fn write_runtime_table(path: &Path, reports: &[&EvalReport]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>10} {:>10} {:>12} {:>12}\n",
        "method", "mean AUC", "95% CI", "train (s)", "predict (s)"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<12} {:>10.4} {:>9.4} {:>12.4} {:>12.4}\n",
            r.method, r.mean_auc, r.ci95_half_width, r.train_seconds, r.predict_seconds
        ));
    }
    fs::write(path, out).with_context(|| format!("cannot write table {}", path.display()))
}

/// `feature,coefficient` rows, strongest first.
pub fn write_coefficients(path: &Path, coefficients: &[(String, f64)]) -> Result<()> {
    let mut out = String::from("feature,coefficient\n");
    for (name, value) in coefficients {
        out.push_str(&format!("{name},{value}\n"));
    }
    fs::write(path, out).with_context(|| format!("cannot write coefficients {}", path.display()))
}
