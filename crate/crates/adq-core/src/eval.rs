//! Evaluation machinery: rank-based AUC, stratified k-fold plans with
//! optional ad grouping, the cross-validation driver, and the feature
//! dimension ledger report.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::{FEATURE_LEDGER, NOMINAL_TOTAL};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// AUC and model training need both classes present.
    SingleClass,
    InvalidParameter(String),
    /// An ad appeared with two different labels while grouping.
    InconsistentGroup(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::SingleClass => write!(f, "both classes must be present"),
            EvalError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            EvalError::InconsistentGroup(id) => {
                write!(f, "ad {id} carries conflicting labels across items")
            }
        }
    }
}

impl core::error::Error for EvalError {}

/// Area under the ROC curve via the Mann-Whitney rank statistic; tied
/// pairs earn half credit.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::InvalidParameter("scores and labels differ in length".into()));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Average-rank walk over tie groups; 1-based ranks.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }

    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// A k-fold split of item indices, stratified by label; with grouping,
/// every item of one ad lands in the same fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Item indices per fold, each ascending.
    pub folds: Vec<Vec<usize>>,
    /// Item ids as supplied (ad ids when grouping).
    pub ids: Vec<String>,
}

impl FoldPlan {
    pub fn test_fold(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (f, items) in self.folds.iter().enumerate() {
            if f != fold {
                out.extend_from_slice(items);
            }
        }
        out.sort_unstable();
        out
    }

    /// Ad ids in one fold, deduplicated, sorted.
    pub fn fold_ids(&self, fold: usize) -> Vec<String> {
        let mut ids: Vec<String> =
            self.folds[fold].iter().map(|&i| self.ids[i].clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

/// Deterministic stratified k-fold assignment.
///
/// Groups (ads when `group_by_ad`, otherwise single items) are shuffled
/// within each class and dealt to folds in one continuing round-robin,
/// which keeps per-fold class counts and fold sizes within one of each
/// other.
pub fn stratified_kfold(
    labels: &[u8],
    ids: &[String],
    k: usize,
    seed: u64,
    group_by_ad: bool,
) -> Result<FoldPlan, EvalError> {
    if labels.len() != ids.len() {
        return Err(EvalError::InvalidParameter("labels and ids differ in length".into()));
    }
    if k < 2 || labels.is_empty() {
        return Err(EvalError::InvalidParameter("need k >= 2 and a non-empty dataset".into()));
    }

    // Group key -> (label, item indices). Without grouping each item is
    // its own group keyed by position.
    let mut groups: BTreeMap<String, (u8, Vec<usize>)> = BTreeMap::new();
    for (i, (label, id)) in labels.iter().zip(ids.iter()).enumerate() {
        let key = if group_by_ad { id.clone() } else { format!("{id}#{i}") };
        let entry = groups.entry(key).or_insert((*label, Vec::new()));
        if entry.0 != *label {
            return Err(EvalError::InconsistentGroup(id.clone()));
        }
        entry.1.push(i);
    }
    if groups.len() < k {
        return Err(EvalError::InvalidParameter(format!(
            "cannot split {} groups into {k} folds",
            groups.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for class in [0u8, 1u8] {
        let mut keys: Vec<&String> =
            groups.iter().filter(|(_, (l, _))| *l == class).map(|(key, _)| key).collect();
        keys.shuffle(&mut rng);
        for key in keys {
            folds[cursor % k].extend_from_slice(&groups[key].1);
            cursor += 1;
        }
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }

    Ok(FoldPlan { k, seed, folds, ids: ids.to_vec() })
}

/// One cross-validated method evaluation: per-fold AUCs, their mean and
/// 95% confidence half-width, and accumulated wall times.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub k: usize,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
    /// 1.96 * sample std of fold AUCs / sqrt(k).
    pub ci95_half_width: f64,
    pub train_seconds: f64,
    pub predict_seconds: f64,
}

/// Train on k-1 folds and score the held-out fold, for each fold.
///
/// `train` builds a scoring closure from training item indices; `clock`
/// supplies monotonic seconds (the caller owns how time is measured, so
/// this stays a pure library).
pub fn cross_validate<S, TrainFn>(
    labels: &[u8],
    plan: &FoldPlan,
    method: &str,
    mut train: TrainFn,
    clock: &mut dyn FnMut() -> f64,
) -> Result<EvalReport, EvalError>
where
    TrainFn: FnMut(&[usize]) -> S,
    S: FnMut(usize) -> f64,
{
    let mut fold_aucs = Vec::with_capacity(plan.k);
    let mut train_seconds = 0.0;
    let mut predict_seconds = 0.0;

    for fold in 0..plan.k {
        let train_idx = plan.train_indices(fold);
        let test_idx = plan.test_fold(fold);

        let t0 = clock();
        let mut scorer = train(&train_idx);
        let t1 = clock();
        let scores: Vec<f64> = test_idx.iter().map(|&i| scorer(i)).collect();
        let t2 = clock();
        train_seconds += t1 - t0;
        predict_seconds += t2 - t1;

        let test_labels: Vec<u8> = test_idx.iter().map(|&i| labels[i]).collect();
        fold_aucs.push(auc(&scores, &test_labels)?);
    }

    let mean_auc = math::mean(&fold_aucs);
    let ci95_half_width =
        1.96 * math::sqrt(math::sample_variance(&fold_aucs)) / math::sqrt(plan.k as f64);
    Ok(EvalReport {
        method: method.into(),
        k: plan.k,
        fold_aucs,
        mean_auc,
        ci95_half_width,
        train_seconds,
        predict_seconds,
    })
}

/// Human-readable block-dimension table with the ledger total and the
/// note about the nominal dimensionality it is usually quoted at.
pub fn feature_ledger(dataset_rows: usize, dataset_cols: Option<usize>) -> String {
    let total: usize = FEATURE_LEDGER.iter().map(|(_, d)| d).sum();
    let mut out = String::new();
    out.push_str("block      dims\n");
    for (name, dims) in FEATURE_LEDGER {
        out.push_str(&format!("{name:<10} {dims}\n"));
    }
    out.push_str(&format!("total      {total}\n"));
    out.push_str(&format!("rows       {dataset_rows}\n"));
    if let Some(cols) = dataset_cols {
        if cols != total {
            out.push_str(&format!("warning: dataset has {cols} columns, ledger expects {total}\n"));
        }
    }
    out.push_str(&format!(
        "note: block dims sum to {total}, which exceeds the nominal {NOMINAL_TOTAL}-dimension \
         figure this feature set is usually quoted at by {}\n",
        total - NOMINAL_TOTAL
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use rand::Rng;

    #[test]
    fn auc_limit_cases() {
        let labels = [0u8, 0, 1, 1];
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 0.0);
        assert_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &labels).unwrap(), 0.5);
        assert!(matches!(auc(&[0.1, 0.2], &[1, 1]), Err(EvalError::SingleClass)));
    }

    #[test]
    fn auc_matches_brute_force_pair_counting() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = 50;
            let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
            if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
                continue;
            }
            // Coarse grid forces plenty of ties.
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..10) as f64 / 10.0).collect();

            let mut concordant = 0.0;
            let mut pairs = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if labels[i] == 1 && labels[j] == 0 {
                        pairs += 1.0;
                        if scores[i] > scores[j] {
                            concordant += 1.0;
                        } else if scores[i] == scores[j] {
                            concordant += 0.5;
                        }
                    }
                }
            }
            let expected = concordant / pairs;
            assert_eq!(auc(&scores, &labels).unwrap(), expected);
        }
    }

    #[test]
    fn auc_is_invariant_under_monotone_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let labels: Vec<u8> = (0..80).map(|_| rng.gen_range(0..2) as u8).collect();
        let scores: Vec<f64> = (0..80).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let base = auc(&scores, &labels).unwrap();

        let squashed: Vec<f64> = scores.iter().map(|&s| 1.0 / (1.0 + math::exp(-s))).collect();
        assert!((auc(&squashed, &labels).unwrap() - base).abs() < 1e-12);
        let scaled: Vec<f64> = scores.iter().map(|&s| 3.0 * s + 40.0).collect();
        assert!((auc(&scaled, &labels).unwrap() - base).abs() < 1e-12);
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("ad{i:03}")).collect()
    }

    #[test]
    fn balanced_hundred_samples_split_five_five() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let plan = stratified_kfold(&labels, &ids(100), 10, 3, false).unwrap();
        for fold in 0..10 {
            let test = plan.test_fold(fold);
            assert_eq!(test.len(), 10);
            let pos = test.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!(pos, 5);
        }
    }

    #[test]
    fn fold_sizes_and_class_ratios_stay_within_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let labels: Vec<u8> = (0..83).map(|_| u8::from(rng.gen_range(0.0..1.0) < 0.3)).collect();
        let plan = stratified_kfold(&labels, &ids(83), 7, 9, false).unwrap();

        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let pos_counts: Vec<usize> = plan
            .folds
            .iter()
            .map(|f| f.iter().filter(|&&i| labels[i] == 1).count())
            .collect();
        assert!(pos_counts.iter().max().unwrap() - pos_counts.iter().min().unwrap() <= 1);

        // Folds partition the dataset.
        let mut all: Vec<usize> = plan.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..83).collect::<Vec<_>>());
    }

    #[test]
    fn grouping_keeps_all_patches_of_an_ad_together() {
        // 30 ads, 3 patches each.
        let mut labels = Vec::new();
        let mut patch_ids = Vec::new();
        for ad in 0..30 {
            for _ in 0..3 {
                labels.push((ad % 2) as u8);
                patch_ids.push(format!("ad{ad:02}"));
            }
        }
        let plan = stratified_kfold(&labels, &patch_ids, 5, 21, true).unwrap();
        for fold in 0..5 {
            for &i in plan.test_fold(fold) {
                let id = &patch_ids[i];
                for other in 0..5 {
                    if other != fold {
                        assert!(
                            !plan.test_fold(other).iter().any(|&j| &patch_ids[j] == id),
                            "{id} spans folds {fold} and {other}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_means_same_plan() {
        let labels: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let a = stratified_kfold(&labels, &ids(40), 10, 77, false).unwrap();
        let b = stratified_kfold(&labels, &ids(40), 10, 77, false).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&labels, &ids(40), 10, 78, false).unwrap();
        assert_ne!(a.folds, c.folds);
    }

    #[test]
    fn label_oracle_scores_auc_one_with_no_spread() {
        let labels: Vec<u8> = (0..60).map(|i| (i % 2) as u8).collect();
        let plan = stratified_kfold(&labels, &ids(60), 10, 1, false).unwrap();
        let mut clock = || 0.0;
        let report = cross_validate(
            &labels,
            &plan,
            "oracle",
            |_train| |i: usize| labels[i] as f64,
            &mut clock,
        )
        .unwrap();
        assert_eq!(report.mean_auc, 1.0);
        assert_eq!(report.ci95_half_width, 0.0);
        assert_eq!(report.fold_aucs.len(), 10);
    }

    #[test]
    fn coin_flip_scorer_stays_near_half() {
        let labels: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
        let plan = stratified_kfold(&labels, &ids(200), 10, 2, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let mut clock = || 0.0;
        let report = cross_validate(
            &labels,
            &plan,
            "coin",
            move |_train| {
                let mut fold_rng = ChaCha8Rng::seed_from_u64(rng.gen());
                move |_i: usize| fold_rng.gen_range(0.0..1.0)
            },
            &mut clock,
        )
        .unwrap();
        assert!((0.4..=0.6).contains(&report.mean_auc), "auc {}", report.mean_auc);
    }

    #[test]
    fn clock_time_accumulates_into_the_report() {
        let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let plan = stratified_kfold(&labels, &ids(20), 2, 1, false).unwrap();
        let mut ticks = 0u64;
        let mut clock = move || {
            ticks += 1;
            ticks as f64
        };
        let report = cross_validate(
            &labels,
            &plan,
            "timed",
            |_| |i: usize| labels[i] as f64,
            &mut clock,
        )
        .unwrap();
        // Two folds, one second per phase with the fake clock.
        assert_eq!(report.train_seconds, 2.0);
        assert_eq!(report.predict_seconds, 2.0);
    }

    #[test]
    fn ledger_report_prints_dims_and_the_discrepancy_note() {
        let report = feature_ledger(0, None);
        assert!(report.contains("TFD        10"));
        assert!(report.contains("MELLIN     512"));
        assert!(report.contains("total      2475"));
        assert!(report.contains("2440"));

        let mismatched = feature_ledger(5, Some(100));
        assert!(mismatched.contains("warning"));
    }
}
