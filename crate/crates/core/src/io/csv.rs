//! Convergence traces as CSV.

use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::metrics::MetricsRow;

pub const HEADER: &str = "iter,nrmse_probe,data_residual,pairwise,wall_ms";

/// 17 significant digits, `.` decimal separator.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders rows; an absent NRMSE is an empty field.
pub fn to_string(rows: &[MetricsRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        let nrmse = r.nrmse_probe.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            nrmse,
            fmt_f64(r.data_residual),
            fmt_f64(r.pairwise),
            fmt_f64(r.wall_ms)
        );
    }
    out
}

pub fn write(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_atomic(path, to_string(rows).as_bytes())
}

fn bad(path: &Path, msg: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Parses a trace written by [`write`] (or any CSV with the same columns in
/// any order).
pub fn parse(path: &Path, text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad(path, "empty file"))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| bad(path, format!("missing column `{name}`")))
    };
    let (ci, cn, cd, cp, cw) = (
        col("iter")?,
        col("nrmse_probe")?,
        col("data_residual")?,
        col("pairwise")?,
        col("wall_ms")?,
    );
    let mut rows: Vec<MetricsRow> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let lineno = lineno + 2;
        if fields.len() != header.len() {
            return Err(bad(path, format!("line {lineno}: expected {} fields", header.len())));
        }
        let num = |i: usize| -> Result<f64> {
            let v: f64 = fields[i]
                .parse()
                .map_err(|_| bad(path, format!("line {lineno}: `{}` is not a number", fields[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(path, format!("line {lineno}: non-finite value")))
            }
        };
        let iter: usize = fields[ci]
            .parse()
            .map_err(|_| bad(path, format!("line {lineno}: bad iteration `{}`", fields[ci])))?;
        if rows.last().is_some_and(|r| r.iter >= iter) {
            return Err(bad(path, format!("line {lineno}: iterations must increase")));
        }
        rows.push(MetricsRow {
            iter,
            nrmse_probe: if fields[cn].is_empty() { None } else { Some(num(cn)?) },
            data_residual: num(cd)?,
            pairwise: num(cp)?,
            wall_ms: num(cw)?,
        });
    }
    Ok(rows)
}

pub fn read(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(path, &text)
}
