//! Trace CSV files: one row per recorded round.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dsgpa_core::TraceRecord;

use crate::error::{Result, SimError};

pub const TRACE_HEADER: &str =
    "k,consensus_err,grad_norm_2,grad_norm_pg,fbar,W1,W2,W3,W4,W,wall_ns";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_trace(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 200);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.k,
            fmt_float(r.consensus_err),
            fmt_float(r.grad_norm_2),
            fmt_float(r.grad_norm_pg),
            fmt_float(r.fbar)
        );
        match &r.lyapunov {
            Some(w) => {
                for v in [w.w1, w.w2, w.w3, w.w4, w.total] {
                    out.push(',');
                    out.push_str(&fmt_float(v));
                }
            }
            None => out.push_str(",,,,,"),
        }
        out.push(',');
        if let Some(ns) = r.wall_ns {
            let _ = write!(out, "{ns}");
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(records: &[TraceRecord], path: &Path) -> Result<()> {
    fs::write(path, format_trace(records)).map_err(|e| SimError::io(path, e))
}

/// The fields `summarize` needs from one trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub consensus_err: f64,
    pub grad_norm_2: f64,
    pub grad_norm_pg: f64,
    pub fbar: f64,
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRACE_HEADER => {}
        _ => return Err(SimError::format(path, 1, "missing trace header")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = |msg: &str| SimError::format(path, i + 1, msg);
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 11 {
                return Err(bad("expected 11 columns"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("malformed number"));
            Ok(TraceRow {
                k: fields[0]
                    .parse()
                    .map_err(|_| bad("malformed round index"))?,
                consensus_err: num(fields[1])?,
                grad_norm_2: num(fields[2])?,
                grad_norm_pg: num(fields[3])?,
                fbar: num(fields[4])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsgpa_core::LyapunovTerms;

    fn rec(k: usize, lyap: bool, wall: Option<u64>) -> TraceRecord {
        TraceRecord {
            k,
            consensus_err: 0.1,
            grad_norm_2: 1.0 / 3.0,
            grad_norm_pg: 2.0,
            fbar: -1e-300,
            lyapunov: lyap.then_some(LyapunovTerms {
                w1: 1.0,
                w2: 2.0,
                w3: -0.5,
                w4: 0.25,
                total: 2.75,
            }),
            wall_ns: wall,
        }
    }

    #[test]
    fn columns_and_precision() {
        let text = format_trace(&[rec(0, false, None), rec(5, true, Some(17))]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(
            lines[1],
            "0,1.0000000000000001e-1,3.3333333333333331e-1,2.0000000000000000e0,-1.0000000000000000e-300,,,,,,"
        );
        assert!(lines[2].ends_with(",2.7500000000000000e0,17"));
        assert_eq!(lines[2].split(',').count(), 11);
    }

    #[test]
    fn floats_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -2.2250738585072014e-308,
            5e-324,
        ] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn reads_back_what_it_writes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace(&[rec(0, true, None), rec(3, true, Some(4))], &path).unwrap();
        let rows = read_trace(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].k, 3);
        assert_eq!(rows[1].grad_norm_2, 1.0 / 3.0);
    }
}
