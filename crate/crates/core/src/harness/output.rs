//! CSV and JSON persistence.
//!
//! CSV files are UTF-8 with LF line endings and shortest round-trip float
//! formatting, so identical results give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::Result;

pub const ORDER_HEADER: [&str; 7] = ["k", "p_plus_1", "n_coarse", "n_fine", "order_u", "order_phi", "span"];
pub const COERCIVITY_HEADER: [&str; 10] =
    ["k", "p_plus_1", "n", "h", "kh_over_p", "ndof", "lambda_min", "iterations", "time_s", "status"];
pub const TRACE_HEADER: [&str; 5] = ["x", "re_u", "im_u", "re_u_exact", "im_u_exact"];
pub const SURFACE_HEADER: [&str; 6] = ["x", "y", "re_u", "im_u", "re_u_exact", "im_u_exact"];
pub const SELFTEST_HEADER: [&str; 4] = ["check", "value", "limit", "status"];

/// Write `rows` under `header`. The header is written even for an empty table.
pub fn write_csv<T: Serialize>(rows: &[T], header: &[&str], w: impl Write) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<()> {
    write_csv(rows, header, BufWriter::new(File::create(path)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_s: f64,
    /// Per-row wall time in output order; `None` for rows that did not run.
    pub rows: Vec<Option<f64>>,
}

/// Run metadata written next to the CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub experiment: String,
    /// SHA-256 of the canonical config JSON.
    pub config_hash: Option<String>,
    pub config: Option<RunConfig>,
    pub override_caps: bool,
    pub threads: usize,
    pub timings: Timings,
    pub outputs: Vec<String>,
    pub failed_rows: usize,
    pub skipped_rows: usize,
}

pub fn emit_meta(meta: &Meta, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, meta)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: Option<usize>,
        s: String,
    }

    #[test]
    fn empty_fields_and_quoting() {
        let mut buf = Vec::new();
        let rows = [Row { a: 0.1, b: None, s: "failed: a, b".into() }, Row { a: 1e-20, b: Some(3), s: "ok".into() }];
        write_csv(&rows, &["a", "b", "s"], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,s\n0.1,,\"failed: a, b\"\n1e-20,3,ok\n");
    }

    #[test]
    fn header_without_rows() {
        let mut buf = Vec::new();
        write_csv::<Row>(&[], &TRACE_HEADER, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,re_u,im_u,re_u_exact,im_u_exact\n");
    }
}
