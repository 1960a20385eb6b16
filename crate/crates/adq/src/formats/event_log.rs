//! Engagement event log CSV: `ad_id,user_id,event,dwell_seconds,timestamp`.

use std::path::Path;

use adq_core::metrics::{EngagementRecord, Event};
use anyhow::{bail, Context, Result};

const EXPECTED_HEADER: [&str; 5] = ["ad_id", "user_id", "event", "dwell_seconds", "timestamp"];

/// Parse the whole log or fail with the offending line and column.
pub fn parse_event_log(path: &Path) -> Result<Vec<EngagementRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open event log {}", path.display()))?;

    let headers = reader.headers().context("event log has no header row")?;
    let got: Vec<&str> = headers.iter().collect();
    if got != EXPECTED_HEADER {
        bail!(
            "event log header must be {:?}, found {:?}",
            EXPECTED_HEADER.join(","),
            got.join(",")
        );
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.with_context(|| format!("malformed csv at line {line}"))?;
        if row.len() != 5 {
            bail!("line {line}: expected 5 fields, found {}", row.len());
        }
        let event = match &row[2] {
            "impression" => Event::Impression,
            "click" => Event::Click,
            other => bail!("line {line}, column event: unknown token {other:?}"),
        };
        let dwell_seconds: f64 = row[3]
            .parse()
            .with_context(|| format!("line {line}, column dwell_seconds: not a number"))?;
        if dwell_seconds < 0.0 {
            bail!("line {line}, column dwell_seconds: must be non-negative");
        }
        let timestamp: f64 = row[4]
            .parse()
            .with_context(|| format!("line {line}, column timestamp: not a number"))?;
        records.push(EngagementRecord {
            ad_id: row[0].to_string(),
            user_id: row[1].to_string(),
            event,
            dwell_seconds,
            timestamp,
        });
    }
    Ok(records)
}
