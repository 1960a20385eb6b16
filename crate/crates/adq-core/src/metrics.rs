//! Engagement metrics: per-ad long-click-rate aggregation, the activity
//! filter, and percentile labeling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Dwell-time cutoff (seconds) separating long clicks from noise clicks.
pub const DEFAULT_DWELL_THRESHOLD: f64 = 5.0;

/// Minimum impressions an ad needs to enter a labeled dataset.
pub const MIN_IMPRESSIONS: u64 = 500;
/// Minimum long clicks (LCR mode) or long-click users (R-LCR mode).
pub const MIN_LONG_CLICKS: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    InvalidParameter(String),
    /// Good and bad percentile sets would overlap.
    LabelOverlap { ads: usize, good: usize, bad: usize },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            MetricsError::LabelOverlap { ads, good, bad } => write!(
                f,
                "label percentiles overlap: {good} good + {bad} bad out of {ads} ads"
            ),
        }
    }
}

impl core::error::Error for MetricsError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Impression,
    Click,
}

/// One row of the engagement log.
#[derive(Debug, Clone, PartialEq)]
pub struct EngagementRecord {
    pub ad_id: String,
    pub user_id: String,
    pub event: Event,
    /// Landing-page dwell in seconds; 0 for impressions.
    pub dwell_seconds: f64,
    pub timestamp: f64,
}

/// Which quality proxy drives filtering and labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityMetric {
    Lcr,
    RLcr,
}

impl QualityMetric {
    pub fn name(self) -> &'static str {
        match self {
            QualityMetric::Lcr => "LCR",
            QualityMetric::RLcr => "R-LCR",
        }
    }
}

/// Per-ad aggregates and both rate metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct AdStats {
    pub ad_id: String,
    pub impressions: u64,
    pub long_clicks: u64,
    pub unique_users_exposed: u64,
    pub unique_long_click_users: u64,
    /// long_clicks / impressions
    pub lcr: f64,
    /// unique_long_click_users / unique_users_exposed
    pub rlcr: f64,
}

impl AdStats {
    pub fn metric_value(&self, metric: QualityMetric) -> f64 {
        match metric {
            QualityMetric::Lcr => self.lcr,
            QualityMetric::RLcr => self.rlcr,
        }
    }
}

/// Aggregation output plus consistency flags.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    /// Per-ad stats, ordered by ad_id.
    pub stats: Vec<AdStats>,
    /// Ads dropped because they had clicks but no impressions.
    pub zero_impression_ads: usize,
    /// Long clicks by users with no impression of the same ad; they are
    /// still counted, this only flags the inconsistency.
    pub orphan_long_clicks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityLabel {
    pub ad_id: String,
    /// 1 = good, 0 = bad.
    pub label: u8,
    pub metric: QualityMetric,
    pub metric_value: f64,
}

#[derive(Default)]
struct AdAccumulator {
    impressions: u64,
    long_clicks: u64,
    exposed_users: BTreeSet<String>,
    long_click_users: BTreeMap<String, u64>,
}

/// Aggregate an event log into per-ad stats. A long click is a click
/// with dwell strictly greater than the threshold. Ads with zero
/// impressions are omitted and counted in the report.
pub fn compute_stats(
    records: &[EngagementRecord],
    dwell_threshold: f64,
) -> Result<StatsReport, MetricsError> {
    if !(dwell_threshold > 0.0) {
        return Err(MetricsError::InvalidParameter(format!(
            "dwell threshold must be positive, got {dwell_threshold}"
        )));
    }

    let mut ads: BTreeMap<String, AdAccumulator> = BTreeMap::new();
    for record in records {
        let acc = ads.entry(record.ad_id.clone()).or_default();
        match record.event {
            Event::Impression => {
                acc.impressions += 1;
                acc.exposed_users.insert(record.user_id.clone());
            }
            Event::Click => {
                if record.dwell_seconds > dwell_threshold {
                    acc.long_clicks += 1;
                    *acc.long_click_users.entry(record.user_id.clone()).or_insert(0) += 1;
                }
            }
        }
    }

    let mut stats = Vec::with_capacity(ads.len());
    let mut zero_impression_ads = 0usize;
    let mut orphan_long_clicks = 0usize;
    for (ad_id, acc) in ads {
        for (user, count) in &acc.long_click_users {
            if !acc.exposed_users.contains(user) {
                orphan_long_clicks += *count as usize;
            }
        }
        if acc.impressions == 0 {
            zero_impression_ads += 1;
            continue;
        }
        stats.push(AdStats {
            ad_id,
            impressions: acc.impressions,
            long_clicks: acc.long_clicks,
            unique_users_exposed: acc.exposed_users.len() as u64,
            unique_long_click_users: acc.long_click_users.len() as u64,
            lcr: acc.long_clicks as f64 / acc.impressions as f64,
            rlcr: acc.long_click_users.len() as f64 / acc.exposed_users.len() as f64,
        });
    }

    Ok(StatsReport { stats, zero_impression_ads, orphan_long_clicks })
}

/// Keep ads with enough impressions and enough of the metric-appropriate
/// long-click evidence.
pub fn filter_ads(stats: &[AdStats], metric: QualityMetric) -> Vec<AdStats> {
    stats
        .iter()
        .filter(|s| {
            s.impressions >= MIN_IMPRESSIONS
                && match metric {
                    QualityMetric::Lcr => s.long_clicks >= MIN_LONG_CLICKS,
                    QualityMetric::RLcr => s.unique_long_click_users >= MIN_LONG_CLICKS,
                }
        })
        .cloned()
        .collect()
}

/// Label the top `top_pct` percent good and the bottom `bottom_pct`
/// percent bad (ceiling counts), omitting the middle. Ties sort by ad_id
/// so labels are deterministic under input permutation.
pub fn percentile_label(
    stats: &[AdStats],
    metric: QualityMetric,
    top_pct: f64,
    bottom_pct: f64,
) -> Result<Vec<QualityLabel>, MetricsError> {
    if !(0.0..=100.0).contains(&top_pct)
        || !(0.0..=100.0).contains(&bottom_pct)
        || top_pct + bottom_pct > 100.0
    {
        return Err(MetricsError::InvalidParameter(format!(
            "percentiles must be non-negative and sum to at most 100, got {top_pct}/{bottom_pct}"
        )));
    }
    let n = stats.len();
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut order: Vec<&AdStats> = stats.iter().collect();
    order.sort_by(|a, b| {
        b.metric_value(metric)
            .total_cmp(&a.metric_value(metric))
            .then_with(|| a.ad_id.cmp(&b.ad_id))
    });

    let n_good = libm::ceil(n as f64 * top_pct / 100.0) as usize;
    let n_bad = libm::ceil(n as f64 * bottom_pct / 100.0) as usize;
    if n_good + n_bad > n {
        return Err(MetricsError::LabelOverlap { ads: n, good: n_good, bad: n_bad });
    }

    let mut labels = Vec::with_capacity(n_good + n_bad);
    for s in &order[..n_good] {
        labels.push(QualityLabel {
            ad_id: s.ad_id.clone(),
            label: 1,
            metric,
            metric_value: s.metric_value(metric),
        });
    }
    for s in &order[n - n_bad..] {
        labels.push(QualityLabel {
            ad_id: s.ad_id.clone(),
            label: 0,
            metric,
            metric_value: s.metric_value(metric),
        });
    }
    Ok(labels)
}
