//! Rendering of study reports as CSV, JSON and markdown.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{StudyRecord, StudyReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Md,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "md" | "markdown" => Ok(Format::Md),
            other => Err(Error::Config(format!(
                "unknown format `{other}`; valid formats: csv, json, md"
            ))),
        }
    }
}

pub const CSV_HEADER: &str = "n,lambda,lambda_error,eoc_lambda,vector_error,eoc_vector,wall_time_ms";

/// Rate cell: empty on the first row, `floor` when a neighbouring error fell
/// below the floor.
fn rate_cell(i: usize, rate: Option<f64>, floored: bool, fmt: impl Fn(f64) -> String) -> String {
    match rate {
        Some(v) => fmt(v),
        None if i == 0 && !floored => String::new(),
        None => "floor".to_string(),
    }
}

fn floored_pair(records: &[StudyRecord], i: usize, vector: bool) -> bool {
    let hit = |r: &StudyRecord| if vector { r.vector_floor } else { r.lambda_floor };
    hit(&records[i]) || (i > 0 && hit(&records[i - 1]))
}

pub fn render_csv(report: &StudyReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let full = |v: f64| format!("{v:?}");
    for (i, r) in report.records.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{},{:?},{},{:.3}",
            r.n,
            r.lambda,
            r.lambda_error,
            rate_cell(i, r.eoc_lambda, floored_pair(&report.records, i, false), full),
            r.vector_error,
            rate_cell(i, r.eoc_vector, floored_pair(&report.records, i, true), full),
            r.wall_time_ms
        );
    }
    out
}

pub fn render_json(report: &StudyReport) -> String {
    serde_json::to_string_pretty(report).expect("reports serialise") + "\n"
}

pub fn render_markdown(report: &StudyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}, r = {}, kernel {} (reference: {:?}, g = {})",
        report.method, report.r, report.kernel, report.reference, report.quad_order
    );
    out.push('\n');
    out.push_str("| n | error | rate | vector error | rate |\n");
    out.push_str("|---:|---:|---:|---:|---:|\n");
    let rate = |v: f64| format!("{v:.2}");
    for (i, r) in report.records.iter().enumerate() {
        let _ = writeln!(
            out,
            "| {} | {:.2e} | {} | {:.2e} | {} |",
            r.n,
            r.lambda_error,
            rate_cell(i, r.eoc_lambda, floored_pair(&report.records, i, false), rate),
            r.vector_error,
            rate_cell(i, r.eoc_vector, floored_pair(&report.records, i, true), rate),
        );
    }
    out
}

pub fn render_report(report: &StudyReport, format: Format) -> String {
    match format {
        Format::Csv => render_csv(report),
        Format::Json => render_json(report),
        Format::Md => render_markdown(report),
    }
}
