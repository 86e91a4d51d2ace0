//! File formats: field CSV with JSON sidecar metadata, report documents,
//! and sweep tables. All numeric CSV output carries 17 significant digits.

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::params::ProblemParams;
use crate::solver::SweepRow;
use crate::variational::SolveReport;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Formats with 17 significant digits (round-trip exact for f64).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Sidecar metadata of a stored field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub r_max: f64,
    pub n: usize,
    pub s: f64,
}

pub fn field_csv_string(field: &RadialField) -> String {
    let mut out = String::with_capacity(field.values().len() * 48 + 8);
    out.push_str("r,u\n");
    let dr = field.grid().spacing();
    for (i, v) in field.values().iter().enumerate() {
        let r = (i + 1) as f64 * dr;
        let _ = writeln!(out, "{},{}", fmt_f64(r), fmt_f64(*v));
    }
    out
}

/// Writes `<path>` (CSV) and `<path>.meta.json` (sidecar).
pub fn write_field(path: &Path, field: &RadialField, s: f64) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, field_csv_string(field))?;
    let meta = FieldMetadata {
        r_max: field.grid().r_max(),
        n: field.grid().n(),
        s,
    };
    std::fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&meta)?,
    )?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

/// Reads a field CSV with its sidecar; the values are validated against the
/// reconstructed grid.
pub fn read_field(path: &Path) -> Result<(RadialField, FieldMetadata)> {
    let meta: FieldMetadata =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let grid = Arc::new(RadialGrid::new(meta.r_max, meta.n)?);
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::with_capacity(meta.n);
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            continue; // header
        }
        let mut cols = line.split(',');
        let (_r, u) = (cols.next(), cols.next());
        let u = u.ok_or_else(|| Error::invalid("field csv", format!("line {lineno}: missing value column")))?;
        values.push(u.trim().parse::<f64>().map_err(|e| {
            Error::invalid("field csv", format!("line {lineno}: {e}"))
        })?);
    }
    Ok((RadialField::new(grid, values)?, meta))
}

/// A solver report as stored on disk: scalars plus a relative path to the
/// field CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub params: ProblemParams,
    pub report: SolveReport,
    /// Path of the field CSV, relative to this document's directory.
    pub field_csv: String,
}

pub fn write_report_document(path: &Path, doc: &ReportDocument) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(doc)?)?;
    Ok(())
}

pub fn read_report_document(path: &Path) -> Result<ReportDocument> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub const SWEEP_HEADER: &str =
    "mu,m_level,sigma_level,seminorm_local,lambda_local,lambda_mp,h_distance,converged";

pub fn sweep_csv_string(rows: &[SweepRow]) -> String {
    let opt = |v: &Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(row.mu),
            opt(&row.m_level),
            fmt_f64(row.sigma_level),
            opt(&row.seminorm_local),
            opt(&row.lambda_local),
            fmt_f64(row.lambda_mp),
            fmt_f64(row.h_distance),
            row.converged,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_within_tolerance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fields/u.csv");
        let grid = Arc::new(RadialGrid::new(12.5, 64).unwrap());
        let u = RadialField::gaussian(grid, 1.1, 0.73);
        write_field(&path, &u, 0.9).unwrap();
        let (v, meta) = read_field(&path).unwrap();
        assert_eq!(meta.n, 64);
        assert_eq!(meta.r_max, 12.5);
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }

    #[test]
    fn sweep_csv_has_full_header_and_blank_optionals() {
        let rows = vec![SweepRow {
            mu: 0.5,
            m_level: None,
            sigma_level: 1.25,
            seminorm_local: None,
            lambda_local: None,
            lambda_mp: -2.0,
            h_distance: 0.1,
            converged: true,
        }];
        let text = sweep_csv_string(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("5.0000000000000000e-1,,1.25"));
    }
}
