//! Label and per-ad stats CSVs.

use std::fs;
use std::path::Path;

use adq_core::metrics::{AdStats, QualityLabel, QualityMetric};
use anyhow::{bail, Context, Result};

/// `ad_id,label,metric,metric_value`, rows in the given order.
pub fn write_labels(path: &Path, labels: &[QualityLabel]) -> Result<()> {
    let mut out = String::from("ad_id,label,metric,metric_value\n");
    for l in labels {
        out.push_str(&format!("{},{},{},{}\n", l.ad_id, l.label, l.metric.name(), l.metric_value));
    }
    fs::write(path, out).with_context(|| format!("cannot write labels to {}", path.display()))
}

pub fn read_labels(path: &Path) -> Result<Vec<QualityLabel>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open label file {}", path.display()))?;
    let mut labels = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.with_context(|| format!("malformed label row {}", i + 2))?;
        if row.len() != 4 {
            bail!("label row {}: expected 4 fields", i + 2);
        }
        let label: u8 = row[1].parse().with_context(|| format!("label row {}: bad label", i + 2))?;
        if label > 1 {
            bail!("label row {}: label must be 0 or 1", i + 2);
        }
        let metric = match &row[2] {
            "LCR" => QualityMetric::Lcr,
            "R-LCR" => QualityMetric::RLcr,
            other => bail!("label row {}: unknown metric {other:?}", i + 2),
        };
        labels.push(QualityLabel {
            ad_id: row[0].to_string(),
            label,
            metric,
            metric_value: row[3]
                .parse()
                .with_context(|| format!("label row {}: bad metric value", i + 2))?,
        });
    }
    Ok(labels)
}

/// `ad_id,impressions,long_clicks,unique_users,unique_long_click_users,lcr,rlcr`.
pub fn write_stats(path: &Path, stats: &[AdStats]) -> Result<()> {
    let mut out =
        String::from("ad_id,impressions,long_clicks,unique_users,unique_long_click_users,lcr,rlcr\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.ad_id,
            s.impressions,
            s.long_clicks,
            s.unique_users_exposed,
            s.unique_long_click_users,
            s.lcr,
            s.rlcr
        ));
    }
    fs::write(path, out).with_context(|| format!("cannot write stats to {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        let labels = vec![
            QualityLabel {
                ad_id: "a".into(),
                label: 1,
                metric: QualityMetric::Lcr,
                metric_value: 0.004,
            },
            QualityLabel {
                ad_id: "b".into(),
                label: 0,
                metric: QualityMetric::Lcr,
                metric_value: 0.0001,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        write_labels(&path, &labels).unwrap();
        assert_eq!(read_labels(&path).unwrap(), labels);
    }
}
