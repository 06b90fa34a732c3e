//! Persistent formats: zero-list text files, JSON checkpoints and CSV
//! exports. All writes go through a temp file in the target directory
//! followed by a rename, so a crash never leaves a truncated file at the
//! final path.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    BalanceAccumulator, BenfordReport, GapHistogram, GapPercentages, LastDigitReport, ZeroGrowthRow,
    LAST_DIGITS,
};
use crate::walker::{CrossingRecord, TriangleLadder};

pub const ZERO_LIST_FORMAT: &str = "jladder-zero-list-v1";
pub const CHECKPOINT_VERSION: u32 = 1;

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// A crossing record read back from disk, with whatever header metadata the
/// file carried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroListFile {
    pub record: CrossingRecord,
    pub limit: Option<u64>,
}

/// Write a crossing record as plain decimal text: '#'-prefixed header lines,
/// then one position per line.
pub fn write_zero_list(record: &CrossingRecord, limit: u64, path: &Path) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&format!("# format: {ZERO_LIST_FORMAT}\n"));
    buf.push_str(&format!("# level: {}\n", record.level));
    buf.push_str(&format!("# limit: {limit}\n"));
    buf.push_str(&format!("# count: {}\n", record.positions.len()));
    for &p in &record.positions {
        buf.push_str(&format!("{p}\n"));
    }
    atomic_write(path, buf.as_bytes())
}

/// Read a zero list. Accepts the native format and two-column
/// "index value" b-file style text, auto-detected per line.
pub fn read_zero_list(path: &Path) -> Result<ZeroListFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };

    let mut level: Option<i64> = None;
    let mut limit: Option<u64> = None;
    let mut declared_count: Option<usize> = None;
    let mut positions: Vec<u64> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((key, value)) = rest.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "level" => {
                        level = Some(value.parse().map_err(|_| {
                            parse_err(lineno, format!("bad level '{value}'"))
                        })?)
                    }
                    "limit" => {
                        limit = Some(value.parse().map_err(|_| {
                            parse_err(lineno, format!("bad limit '{value}'"))
                        })?)
                    }
                    "count" => {
                        declared_count = Some(value.parse().map_err(|_| {
                            parse_err(lineno, format!("bad count '{value}'"))
                        })?)
                    }
                    _ => {} // unknown header keys are ignored
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let value = match fields.as_slice() {
            [v] => v,
            [_, v] => v, // b-file style: "index value"
            _ => {
                return Err(parse_err(
                    lineno,
                    format!("expected 1 or 2 columns, got {}", fields.len()),
                ))
            }
        };
        let p: u64 = value
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad position '{value}'")))?;
        if let Some(&prev) = positions.last() {
            if p <= prev {
                return Err(parse_err(
                    lineno,
                    format!("positions not strictly increasing: {prev} then {p}"),
                ));
            }
        }
        positions.push(p);
    }

    if let Some(c) = declared_count {
        if c != positions.len() {
            return Err(parse_err(
                text.lines().count(),
                format!("header declares {c} positions but the body has {}", positions.len()),
            ));
        }
    }

    Ok(ZeroListFile {
        record: CrossingRecord {
            level: level.unwrap_or(0),
            positions,
        },
        limit,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: i64,
    pub count: u64,
}

/// Resumable walk snapshot at a segment boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Walked-to position; the walk resumes by stepping from here.
    pub n: u64,
    pub y: i64,
    pub parity: u8,
    pub levels: Vec<LevelCount>,
    pub balance: BalanceAccumulator,
    pub plan_hash: String,
    /// Unix seconds; metadata only, never compared.
    pub written_at: u64,
}

/// Hash of the walk plan a checkpoint belongs to. The target limit is not
/// part of it: resuming toward a different limit is supported, resuming with
/// a different segment layout is not.
pub fn plan_hash(segment_size: u64) -> String {
    // FNV-1a, enough to catch accidental plan mixups.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in format!("segment_size={segment_size}").bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_checkpoint(cp: &Checkpoint, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(cp)
        .map_err(|e| Error::Inconsistency(format!("checkpoint serialization: {e}")))?;
    atomic_write(path, json.as_bytes())
}

/// Read and validate a checkpoint against the expected plan hash.
pub fn read_checkpoint(path: &Path, expected_plan_hash: &str) -> Result<Checkpoint> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    if cp.version != CHECKPOINT_VERSION {
        return Err(Error::IncompatibleCheckpoint(format!(
            "version {} (expected {CHECKPOINT_VERSION})",
            cp.version
        )));
    }
    if cp.plan_hash != expected_plan_hash {
        return Err(Error::IncompatibleCheckpoint(format!(
            "plan hash {} does not match the requested plan {}",
            cp.plan_hash, expected_plan_hash
        )));
    }
    Ok(cp)
}

/// RFC-4180-style CSV with a mandatory header row. Values are written in
/// full-precision decimal with '.' as the separator.
pub fn export_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips.
    format!("{v}")
}

pub fn write_gap_histogram_csv(hist: &GapHistogram, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = hist
        .counts
        .iter()
        .map(|(&g, &c)| vec![g.to_string(), c.to_string()])
        .collect();
    export_csv(path, &["gap", "count"], &rows)
}

pub fn write_benford_csv(report: &BenfordReport, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..9)
        .map(|d| {
            vec![
                (d + 1).to_string(),
                fmt_f64(report.observed[d]),
                fmt_f64(report.expected[d]),
            ]
        })
        .collect();
    export_csv(path, &["digit", "observed", "expected"], &rows)
}

pub fn write_last_digit_csv(report: &LastDigitReport, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..5)
        .map(|i| {
            vec![
                LAST_DIGITS[i].to_string(),
                report.counts[i].to_string(),
                fmt_f64(report.percentages[i]),
            ]
        })
        .collect();
    export_csv(path, &["digit", "count", "percent"], &rows)
}

pub fn write_growth_csv(rows: &[ZeroGrowthRow], path: &Path) -> Result<()> {
    let data: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.zeroes.to_string(),
                fmt_f64(r.sqrt_n),
                fmt_f64(r.cbrt_n),
                r.pi_n.to_string(),
                r.within_band.to_string(),
            ]
        })
        .collect();
    export_csv(
        path,
        &["n", "zeroes", "sqrt_n", "cbrt_n", "pi_n", "within_band"],
        &data,
    )
}

pub fn write_gap_percentages_csv(report: &GapPercentages, path: &Path) -> Result<()> {
    let mut rows: Vec<Vec<String>> = report
        .per_gap
        .iter()
        .map(|&(g, p)| vec![format!("gap_{g}"), fmt_f64(p)])
        .collect();
    for &(t, p) in &report.cumulative {
        rows.push(vec![format!("le_{t}"), fmt_f64(p)]);
    }
    export_csv(path, &["bucket", "percent"], &rows)
}

pub fn write_triangle_csv(ladder: &TriangleLadder, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = ladder
        .points
        .iter()
        .map(|&(x, y)| vec![x.to_string(), y.to_string()])
        .collect();
    export_csv(path, &["x", "y"], &rows)
}

pub fn write_balance_csv(acc: &BalanceAccumulator, path: &Path) -> Result<()> {
    let rows = vec![
        vec!["c_pos".to_string(), acc.c_pos.to_string()],
        vec!["c_neg".to_string(), acc.c_neg.to_string()],
        vec!["c_zero".to_string(), acc.c_zero.to_string()],
        vec!["a_pos_halfunits".to_string(), acc.a_pos_halfunits.to_string()],
        vec!["a_neg_halfunits".to_string(), acc.a_neg_halfunits.to_string()],
    ];
    export_csv(path, &["quantity", "value"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn record(positions: &[u64]) -> CrossingRecord {
        CrossingRecord {
            level: 0,
            positions: positions.to_vec(),
        }
    }

    #[test]
    fn zero_list_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("zeroes.txt");
        let rec = record(&[1, 3, 7]);
        write_zero_list(&rec, 10, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.ends_with("1\n3\n7\n"), "{text}");
        let back = read_zero_list(&path).unwrap();
        assert_eq!(back.record, rec);
        assert_eq!(back.limit, Some(10));
        assert!(!path.with_extension("tmp").exists());
    }

    #[test]
    fn empty_zero_list() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.txt");
        write_zero_list(&record(&[]), 0, &path).unwrap();
        let back = read_zero_list(&path).unwrap();
        assert!(back.record.positions.is_empty());
    }

    #[test]
    fn b_file_style_ingest() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a064940.txt");
        fs::write(&path, "1 1\n2 3\n3 7\n").unwrap();
        let back = read_zero_list(&path).unwrap();
        assert_eq!(back.record.positions, vec![1, 3, 7]);
        assert_eq!(back.record.level, 0);
    }

    #[test]
    fn non_monotonic_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "3\n1\n").unwrap();
        let err = read_zero_list(&path).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn count_mismatch_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "# count: 5\n1\n3\n").unwrap();
        assert!(matches!(read_zero_list(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn malformed_line_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "1\nx\n").unwrap();
        assert!(matches!(read_zero_list(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn checkpoint_roundtrip_and_guards() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("cp.json");
        let hash = plan_hash(1000);
        let cp = Checkpoint {
            version: CHECKPOINT_VERSION,
            n: 1002,
            y: -5,
            parity: 1,
            levels: vec![LevelCount { level: 0, count: 16 }],
            balance: BalanceAccumulator::new(),
            plan_hash: hash.clone(),
            written_at: unix_now(),
        };
        write_checkpoint(&cp, &path).unwrap();
        let back = read_checkpoint(&path, &hash).unwrap();
        assert_eq!(back, cp);

        let err = read_checkpoint(&path, &plan_hash(2000)).unwrap_err();
        assert!(matches!(err, Error::IncompatibleCheckpoint(_)));

        let mut old = cp.clone();
        old.version = 99;
        write_checkpoint(&old, &path).unwrap();
        let err = read_checkpoint(&path, &hash).unwrap_err();
        assert!(matches!(err, Error::IncompatibleCheckpoint(_)));
    }

    #[test]
    fn csv_shape() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("gaps.csv");
        let mut counts = std::collections::BTreeMap::new();
        counts.insert(2u64, 1u64);
        counts.insert(4, 10);
        let hist = GapHistogram {
            counts,
            total_gaps: 11,
            max_gap: 4,
        };
        write_gap_histogram_csv(&hist, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "gap,count\n2,1\n4,10\n");
    }
}
