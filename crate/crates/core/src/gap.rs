//! Per-case PSNR gap between a method and its upper bound.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::MetricTable;

#[derive(Clone, Debug, PartialEq)]
pub struct GapRow {
    pub case: String,
    pub method: f64,
    pub upper: f64,
    /// `upper - method`, possibly negative.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapSummary {
    pub max_delta: f64,
    pub mean_delta: f64,
    pub argmax_case: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapTable {
    pub rows: Vec<GapRow>,
    /// Cases present in only one of the two tables.
    pub uncompared: Vec<String>,
    pub summary: GapSummary,
}

/// Pairs rows by case name, in the method table's order. The first case
/// wins ties for the maximum.
pub fn compute_gap(method: &MetricTable, upper: &MetricTable) -> Result<GapTable> {
    let mut rows = Vec::new();
    let mut uncompared = Vec::new();
    for m in &method.rows {
        match upper.row(&m.case) {
            Some(u) => rows.push(GapRow {
                case: m.case.clone(),
                method: m.psnr_mean,
                upper: u.psnr_mean,
                delta: u.psnr_mean - m.psnr_mean,
            }),
            None => uncompared.push(m.case.clone()),
        }
    }
    for u in &upper.rows {
        if method.row(&u.case).is_none() {
            uncompared.push(u.case.clone());
        }
    }
    if rows.is_empty() {
        return Err(Error::Table("the two tables share no case".into()));
    }
    let mut best = &rows[0];
    for r in &rows[1..] {
        if r.delta > best.delta {
            best = r;
        }
    }
    let summary = GapSummary {
        max_delta: best.delta,
        mean_delta: rows.iter().map(|r| r.delta).sum::<f64>() / rows.len() as f64,
        argmax_case: best.case.clone(),
    };
    Ok(GapTable {
        rows,
        uncompared,
        summary,
    })
}

impl GapTable {
    /// `case,method,upper,delta` rows followed by a `summary` row holding the
    /// column means.
    pub fn to_csv(&self) -> Result<String> {
        let n = self.rows.len() as f64;
        let mean = |f: fn(&GapRow) -> f64| self.rows.iter().map(f).sum::<f64>() / n;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["case", "method", "upper", "delta"])?;
        for r in &self.rows {
            w.write_record([
                r.case.clone(),
                r.method.to_string(),
                r.upper.to_string(),
                r.delta.to_string(),
            ])?;
        }
        w.write_record([
            "summary".to_string(),
            mean(|r| r.method).to_string(),
            mean(|r| r.upper).to_string(),
            self.summary.mean_delta.to_string(),
        ])?;
        let bytes = w.into_inner().map_err(|e| Error::Table(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Table(e.to_string()))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Case | Method | Upper | Δ |\n|---|---:|---:|---:|\n");
        for r in &self.rows {
            writeln!(out, "| {} | {:.2} | {:.2} | {:.2} |", r.case, r.method, r.upper, r.delta).unwrap();
        }
        writeln!(
            out,
            "\nmax Δ {:.2} at {}, mean Δ {:.2}",
            self.summary.max_delta, self.summary.argmax_case, self.summary.mean_delta
        )
        .unwrap();
        if !self.uncompared.is_empty() {
            writeln!(out, "uncompared: {}", self.uncompared.join(", ")).unwrap();
        }
        out
    }
}
