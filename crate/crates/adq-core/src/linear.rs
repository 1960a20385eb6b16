//! Logistic regression with an optional L1 penalty, solved by proximal
//! gradient descent with backtracking, plus the feature standardization
//! it trains on.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::eval::{auc, stratified_kfold};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// Training needs both classes present.
    SingleClass,
    ShapeMismatch(String),
    InvalidParameter(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::SingleClass => write!(f, "training data holds a single class"),
            ModelError::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            ModelError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Dense row-major feature matrix with named columns and row ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub column_names: Vec<String>,
    pub ad_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        data: Vec<f64>,
        rows: usize,
        cols: usize,
        column_names: Vec<String>,
        ad_ids: Vec<String>,
    ) -> Result<Self, ModelError> {
        if data.len() != rows * cols {
            return Err(ModelError::ShapeMismatch(format!(
                "{} values cannot fill {rows}x{cols}",
                data.len()
            )));
        }
        if column_names.len() != cols {
            return Err(ModelError::ShapeMismatch("one name per column required".into()));
        }
        if ad_ids.len() != rows {
            return Err(ModelError::ShapeMismatch("one ad id per row required".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParameter("matrix entries must be finite".into()));
        }
        Ok(FeatureMatrix { data, rows, cols, column_names, ad_ids })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Per-column transform fitted on training data. Zero-variance columns
/// are dropped and remembered by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    /// Indices into the original column order, one per kept column.
    pub kept_columns: Vec<usize>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub dropped_columns: Vec<String>,
}

impl Standardization {
    /// Standardize one raw row (original column order).
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        self.kept_columns
            .iter()
            .enumerate()
            .map(|(k, &c)| (row[c] - self.means[k]) / self.stds[k])
            .collect()
    }
}

/// Z-score each column from its own statistics; constant columns are
/// removed and listed in the returned transform.
pub fn standardize(x: &FeatureMatrix) -> Result<(FeatureMatrix, Standardization), ModelError> {
    if x.rows == 0 {
        return Err(ModelError::InvalidParameter("cannot standardize an empty matrix".into()));
    }
    let mut kept_columns = Vec::new();
    let mut means = Vec::new();
    let mut stds = Vec::new();
    let mut dropped_columns = Vec::new();

    for c in 0..x.cols {
        let column: Vec<f64> = (0..x.rows).map(|r| x.data[r * x.cols + c]).collect();
        let mean = math::mean(&column);
        let std = math::sqrt(math::population_variance(&column));
        if std > 0.0 {
            kept_columns.push(c);
            means.push(mean);
            stds.push(std);
        } else {
            dropped_columns.push(x.column_names[c].clone());
        }
    }

    let transform = Standardization { kept_columns, means, stds, dropped_columns };
    let cols = transform.kept_columns.len();
    let mut data = Vec::with_capacity(x.rows * cols);
    for r in 0..x.rows {
        data.extend(transform.apply_row(x.row(r)));
    }
    let column_names: Vec<String> =
        transform.kept_columns.iter().map(|&c| x.column_names[c].clone()).collect();
    let standardized = FeatureMatrix::new(data, x.rows, cols, column_names, x.ad_ids.clone())?;
    Ok((standardized, transform))
}

/// Trained logistic model over standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// One weight per kept column.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub standardization: Standardization,
    /// Names of the kept columns, aligned with `weights`.
    pub column_names: Vec<String>,
}

/// Training outcome: the model plus the per-iteration objective trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LrFit {
    pub model: LinearModel,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Lambda grid searched when none is supplied.
pub const LAMBDA_GRID: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];

/// Soft-threshold operator: sign(v) * max(|v| - t, 0).
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Mean binary cross-entropy and its gradient for standardized data.
/// Exposed so the optimality invariants can be checked from tests.
pub fn logistic_loss_and_gradient(
    x: &FeatureMatrix,
    y: &[u8],
    weights: &[f64],
    intercept: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; x.cols];
    let mut grad_b = 0.0;
    for r in 0..x.rows {
        let row = x.row(r);
        let z = intercept + row.iter().zip(weights.iter()).map(|(a, b)| a * b).sum::<f64>();
        let target = y[r] as f64;
        loss += math::softplus(z) - target * z;
        let residual = math::sigmoid(z) - target;
        grad_b += residual;
        for (g, &v) in grad_w.iter_mut().zip(row.iter()) {
            *g += residual * v;
        }
    }
    loss /= n;
    grad_b /= n;
    for g in grad_w.iter_mut() {
        *g /= n;
    }
    (loss, grad_w, grad_b)
}

/// Minimize mean BCE + lambda * |w|_1 (intercept unpenalized) by
/// proximal gradient with a backtracking line search, from zero
/// initialization. Standardization is fitted here and stored.
pub fn lr_train(
    x: &FeatureMatrix,
    y: &[u8],
    lambda: f64,
    max_iters: usize,
    tol: f64,
) -> Result<LrFit, ModelError> {
    if x.rows != y.len() {
        return Err(ModelError::ShapeMismatch("one label per row required".into()));
    }
    if x.rows < 2 {
        return Err(ModelError::InvalidParameter("need at least two rows".into()));
    }
    if y.iter().all(|&l| l == 0) || y.iter().all(|&l| l == 1) {
        return Err(ModelError::SingleClass);
    }
    if lambda < 0.0 {
        return Err(ModelError::InvalidParameter("lambda must be non-negative".into()));
    }

    let (xs, transform) = standardize(x)?;
    let mut weights = vec![0.0; xs.cols];
    let mut intercept = 0.0;
    let mut eta = 1.0;

    let objective =
        |w: &[f64], loss: f64| loss + lambda * w.iter().map(|v| math::abs(*v)).sum::<f64>();
    let (mut loss, mut grad_w, mut grad_b) =
        logistic_loss_and_gradient(&xs, y, &weights, intercept);
    let mut trace = vec![objective(&weights, loss)];
    let mut converged = false;

    for _ in 0..max_iters {
        // Backtrack until the quadratic upper bound holds.
        let (next_w, next_b, next_loss, next_grad);
        loop {
            let candidate_w: Vec<f64> = weights
                .iter()
                .zip(grad_w.iter())
                .map(|(&w, &g)| soft_threshold(w - eta * g, eta * lambda))
                .collect();
            let candidate_b = intercept - eta * grad_b;

            let (cand_loss, cand_gw, cand_gb) =
                logistic_loss_and_gradient(&xs, y, &candidate_w, candidate_b);
            let mut linear = (candidate_b - intercept) * grad_b;
            let mut sq = (candidate_b - intercept) * (candidate_b - intercept);
            for ((&cw, &w), &g) in candidate_w.iter().zip(weights.iter()).zip(grad_w.iter()) {
                linear += (cw - w) * g;
                sq += (cw - w) * (cw - w);
            }
            if cand_loss <= loss + linear + sq / (2.0 * eta) || eta < 1e-16 {
                next_w = candidate_w;
                next_b = candidate_b;
                next_loss = cand_loss;
                next_grad = (cand_gw, cand_gb);
                break;
            }
            eta *= 0.5;
        }

        weights = next_w;
        intercept = next_b;
        loss = next_loss;
        (grad_w, grad_b) = next_grad;
        eta *= 1.1;

        let value = objective(&weights, loss);
        let prev = *trace.last().unwrap();
        trace.push(value);
        if prev - value < tol {
            converged = true;
            break;
        }
    }

    let column_names = xs.column_names.clone();
    Ok(LrFit {
        model: LinearModel { weights, intercept, lambda, standardization: transform, column_names },
        objective_trace: trace,
        converged,
    })
}

/// P(good | x) for a raw (unstandardized) feature row.
pub fn lr_predict(model: &LinearModel, raw_row: &[f64]) -> f64 {
    let z = model
        .standardization
        .apply_row(raw_row)
        .iter()
        .zip(model.weights.iter())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        + model.intercept;
    math::sigmoid(z)
}

/// Nonzero coefficients sorted by |weight| descending (name ascending on
/// ties), mirroring the selected-features report.
pub fn selected_coefficients(model: &LinearModel) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = model
        .column_names
        .iter()
        .zip(model.weights.iter())
        .filter(|(_, &w)| w != 0.0)
        .map(|(n, &w)| (n.clone(), w))
        .collect();
    out.sort_by(|a, b| math::abs(b.1).total_cmp(&math::abs(a.1)).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Pick lambda from [`LAMBDA_GRID`] by inner stratified CV on mean AUC,
/// then refit on everything. Ties prefer the larger (sparser) lambda.
pub fn lr_train_cv(
    x: &FeatureMatrix,
    y: &[u8],
    inner_folds: usize,
    seed: u64,
) -> Result<(LrFit, f64), ModelError> {
    let mut best: Option<(f64, f64)> = None; // (mean auc, lambda)
    for &lambda in LAMBDA_GRID.iter() {
        let plan = stratified_kfold(y, &x.ad_ids, inner_folds, seed, false)
            .map_err(|e| ModelError::InvalidParameter(format!("inner cv: {e}")))?;
        let mut aucs = Vec::with_capacity(inner_folds);
        for fold in 0..plan.k {
            let train_idx = plan.train_indices(fold);
            let sub = submatrix(x, &train_idx)?;
            let sub_y: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
            let fit = lr_train(&sub, &sub_y, lambda, DEFAULT_MAX_ITERS, DEFAULT_TOL)?;
            let test_idx = plan.test_fold(fold);
            let scores: Vec<f64> =
                test_idx.iter().map(|&i| lr_predict(&fit.model, x.row(i))).collect();
            let labels: Vec<u8> = test_idx.iter().map(|&i| y[i]).collect();
            aucs.push(
                auc(&scores, &labels)
                    .map_err(|e| ModelError::InvalidParameter(format!("inner cv: {e}")))?,
            );
        }
        let mean = math::mean(&aucs);
        let better = match best {
            None => true,
            Some((best_auc, _)) => mean >= best_auc,
        };
        if better {
            best = Some((mean, lambda));
        }
    }
    let (_, lambda) = best.unwrap();
    let fit = lr_train(x, y, lambda, DEFAULT_MAX_ITERS, DEFAULT_TOL)?;
    Ok((fit, lambda))
}

/// Rows of `x` selected by index, preserving names.
pub fn submatrix(x: &FeatureMatrix, rows: &[usize]) -> Result<FeatureMatrix, ModelError> {
    let mut data = Vec::with_capacity(rows.len() * x.cols);
    let mut ad_ids = Vec::with_capacity(rows.len());
    for &r in rows {
        data.extend_from_slice(x.row(r));
        ad_ids.push(x.ad_ids[r].clone());
    }
    FeatureMatrix::new(data, rows.len(), x.cols, x.column_names.clone(), ad_ids)
}
