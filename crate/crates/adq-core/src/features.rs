//! Full feature-vector assembly and the canonical block ledger.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::harmony::harmony_vector;
use crate::rhythm::rhythm_vector;
use crate::signal::{AudioClip, SignalError};
use crate::timbre::timbre_vector;

/// Block name and dimensionality of every feature block, in vector order.
pub const FEATURE_LEDGER: &[(&str, usize)] = &[
    ("TFD", 10),
    ("MFCC", 460),
    ("DMFCC", 460),
    ("MSP", 320),
    ("TEMPO", 2),
    ("TG_LIN", 500),
    ("TGR_B", 13),
    ("TGR_T", 13),
    ("TGR_H", 13),
    ("BPDIST_B", 36),
    ("BPDIST_T", 36),
    ("BPDIST_H", 36),
    ("MELLIN", 512),
    ("SIHPCP", 9),
    ("MODE", 1),
    ("SICH", 18),
    ("SICHC", 18),
    ("SIKC", 18),
];

/// The nominal dimensionality this feature set is usually quoted at; the
/// ledger's actual total differs (see [`ledger_report`]).
pub const NOMINAL_TOTAL: usize = 2440;

pub fn ledger_total() -> usize {
    FEATURE_LEDGER.iter().map(|(_, d)| d).sum()
}

fn mcv_names(prefix: &str, dims: usize) -> Vec<String> {
    let mut names = Vec::new();
    for stat in ["block_mean", "block_var"] {
        for i in 0..dims {
            names.push(format!("{prefix}.{stat}.mean_{i}"));
        }
        for i in 0..dims {
            for j in i..dims {
                names.push(format!("{prefix}.{stat}.cov_{i}_{j}"));
            }
        }
    }
    names
}

const TGR_SLOTS: [&str; 13] = [
    "r4", "r8_3", "r3", "r2", "r4_3", "r3_2", "r1", "r2_3", "r3_4", "r1_2", "r1_3", "r3_8", "r1_4",
];

/// Column names for the full vector, ledger order, one per dimension.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(ledger_total());
    names.extend(mcv_names("TFD", 2));
    names.extend(mcv_names("MFCC", 20));
    names.extend(mcv_names("DMFCC", 20));
    for band in 0..32 {
        for pos in 0..10 {
            names.push(format!("MSP.band_{band:02}.pos_{pos}"));
        }
    }
    names.push("TEMPO.primary".into());
    names.push("TEMPO.secondary".into());
    for bpm in 0..500 {
        names.push(format!("TG_LIN.bpm_{bpm:03}"));
    }
    for band in ["B", "T", "H"] {
        for slot in TGR_SLOTS {
            names.push(format!("TGR_{band}.{slot}"));
        }
    }
    for band in ["B", "T", "H"] {
        for bin in 0..36 {
            names.push(format!("BPDIST_{band}.bin_{bin:02}"));
        }
    }
    for c in 0..512 {
        names.push(format!("MELLIN.c_{c:03}"));
    }
    for k in 0..9 {
        names.push(format!("SIHPCP.bin_{k}"));
    }
    names.push("MODE.major".into());
    for block in ["SICH", "SICHC", "SIKC"] {
        for k in 0..9 {
            names.push(format!("{block}.sum_{k}"));
        }
        for k in 0..9 {
            names.push(format!("{block}.diff_{k}"));
        }
    }
    names
}

/// The complete hand-crafted feature vector of one clip, ledger order.
pub fn feature_vector(clip: &AudioClip) -> Result<Vec<f64>, SignalError> {
    let mut out = Vec::with_capacity(ledger_total());
    out.extend(timbre_vector(clip)?);
    out.extend(rhythm_vector(clip)?);
    out.extend(harmony_vector(clip)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn ledger_blocks_match_the_published_table() {
        let expected: &[(&str, usize)] = &[
            ("TFD", 10),
            ("MFCC", 460),
            ("DMFCC", 460),
            ("MSP", 320),
            ("TEMPO", 2),
            ("TG_LIN", 500),
            ("TGR_B", 13),
            ("TGR_T", 13),
            ("TGR_H", 13),
            ("BPDIST_B", 36),
            ("BPDIST_T", 36),
            ("BPDIST_H", 36),
            ("MELLIN", 512),
            ("SIHPCP", 9),
            ("MODE", 1),
            ("SICH", 18),
            ("SICHC", 18),
            ("SIKC", 18),
        ];
        assert_eq!(FEATURE_LEDGER, expected);
        assert_eq!(ledger_total(), 2475);
        assert_eq!(ledger_total() as i64 - NOMINAL_TOTAL as i64, 35);
    }

    #[test]
    fn names_cover_every_dimension_uniquely() {
        let names = feature_names();
        assert_eq!(names.len(), ledger_total());
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len(), "names must be unique");
        assert_eq!(names[0], "TFD.block_mean.mean_0");
        assert!(names.contains(&"MFCC.block_mean.cov_3_7".to_string()));
    }

    #[test]
    fn full_vector_matches_the_ledger() {
        let n = 44100;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / 44100.0;
                0.4 * libm::sin(2.0 * core::f64::consts::PI * 330.0 * t)
                    + if i % 22050 < 200 { 0.4 } else { 0.0 }
            })
            .collect();
        let clip = AudioClip::new(samples, 44100, "mix".to_string()).unwrap();
        let v = feature_vector(&clip).unwrap();
        assert_eq!(v.len(), ledger_total());
        assert!(v.iter().all(|x| x.is_finite()));

        let silence = AudioClip::new(vec![0.0; 44100], 44100, "s".to_string()).unwrap();
        let v = feature_vector(&silence).unwrap();
        assert_eq!(v.len(), 2475);
    }
}
