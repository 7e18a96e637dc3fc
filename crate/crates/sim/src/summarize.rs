//! Per-algorithm statistics over a results directory.
//!
//! Final metrics come from the last row of each trace file. When
//! `summary.csv` is present it supplies each trace's label and status;
//! otherwise labels are taken from the `<label>__seed<seed>.csv` file names
//! and every run counts as converged. Diverged runs are counted but left out
//! of the means.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Result, SimError};
use crate::experiment::SUMMARY_FILE;
use crate::trace::read_trace;

#[derive(Debug, Clone, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let std = if values.len() > 1 {
            // Deviations are scaled by the largest one so huge finite values do not overflow.
            let scale = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            if scale == 0.0 || !scale.is_finite() {
                scale
            } else {
                let ss: f64 = values.iter().map(|v| ((v - mean) / scale).powi(2)).sum();
                scale * (ss / (m - 1.0)).sqrt()
            }
        } else {
            0.0
        };
        Some(Stat { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub label: String,
    pub converged: usize,
    pub diverged: usize,
    pub consensus_err: Option<Stat>,
    pub grad_norm_2: Option<Stat>,
    pub fbar: Option<Stat>,
}

#[derive(Debug, Deserialize)]
struct SummaryRow {
    label: String,
    status: String,
    trace: String,
}

struct Entry {
    label: String,
    diverged: bool,
    trace: String,
}

fn entries(dir: &Path) -> Result<Vec<Entry>> {
    let summary = dir.join(SUMMARY_FILE);
    if summary.is_file() {
        let mut reader = csv::Reader::from_path(&summary)
            .map_err(|e| SimError::format(&summary, 1, e.to_string()))?;
        let mut out = Vec::new();
        for (i, row) in reader.deserialize::<SummaryRow>().enumerate() {
            let row = row.map_err(|e| SimError::format(&summary, i + 2, e.to_string()))?;
            out.push(Entry {
                label: row.label,
                diverged: row.status == "diverged",
                trace: row.trace,
            });
        }
        return Ok(out);
    }
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| SimError::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".csv") && n.contains("__seed"))
        .collect();
    names.sort();
    Ok(names
        .into_iter()
        .map(|name| Entry {
            label: name[..name.rfind("__seed").expect("filtered")].to_string(),
            diverged: false,
            trace: name,
        })
        .collect())
}

/// Groups in order of first appearance.
pub fn summarize_dir(dir: &Path) -> Result<Vec<GroupSummary>> {
    if !dir.is_dir() {
        return Err(SimError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let entries = entries(dir)?;
    if entries.is_empty() {
        return Err(SimError::NoTraces(dir.to_path_buf()));
    }
    let mut order: Vec<String> = Vec::new();
    let mut finals: Vec<(String, bool, [f64; 3])> = Vec::new();
    for e in entries {
        let path = dir.join(&e.trace);
        let rows = read_trace(&path)?;
        let last = rows
            .last()
            .ok_or_else(|| SimError::format(&path, 2, "trace has no rows"))?;
        if !order.contains(&e.label) {
            order.push(e.label.clone());
        }
        finals.push((
            e.label,
            e.diverged,
            [last.consensus_err, last.grad_norm_2, last.fbar],
        ));
    }
    Ok(order
        .into_iter()
        .map(|label| {
            let mine: Vec<&(String, bool, [f64; 3])> =
                finals.iter().filter(|f| f.0 == label).collect();
            let ok: Vec<[f64; 3]> = mine.iter().filter(|f| !f.1).map(|f| f.2).collect();
            let column = |c: usize| Stat::of(&ok.iter().map(|v| v[c]).collect::<Vec<_>>());
            GroupSummary {
                converged: ok.len(),
                diverged: mine.len() - ok.len(),
                consensus_err: column(0),
                grad_norm_2: column(1),
                fbar: column(2),
                label,
            }
        })
        .collect())
}

pub fn format_table(groups: &[GroupSummary]) -> String {
    let width = groups
        .iter()
        .map(|g| g.label.len())
        .chain(["algorithm".len()])
        .max()
        .unwrap_or(9);
    let cell = |s: &Option<Stat>| match s {
        Some(s) => format!("{:.6e} ± {:.2e}", s.mean, s.std),
        None => "-".to_string(),
    };
    let mut out = format!(
        "{:<width$}  {:>4}  {:>8}  {:<24}  {:<24}  {:<24}\n",
        "algorithm", "runs", "diverged", "consensus_err", "grad_norm_2", "fbar"
    );
    for g in groups {
        out.push_str(&format!(
            "{:<width$}  {:>4}  {:>8}  {:<24}  {:<24}  {:<24}\n",
            g.label,
            g.converged + g.diverged,
            g.diverged,
            cell(&g.consensus_err),
            cell(&g.grad_norm_2),
            cell(&g.fbar),
        ));
    }
    out
}
