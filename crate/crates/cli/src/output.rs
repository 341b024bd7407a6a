//! Report JSON and per-check CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use mtwkit_core::report::{SampleTable, VerificationReport, TOOL_VERSION};
use mtwkit_core::Verdict;

use crate::CliError;

pub const CSV_VERSION: &str = "v1";

/// One document per campaign.
#[derive(Clone, Debug, Serialize)]
pub struct CampaignReport {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub cost: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub reports: Vec<VerificationReport>,
}

impl CampaignReport {
    pub fn new(cost: &str, seed: u64, reports: Vec<VerificationReport>) -> Self {
        Self { tool: "mtwkit", tool_version: TOOL_VERSION, cost: cost.into(), seed, verdict: overall(&reports), reports }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// 0 if every check passed, 1 on any violation, 2 if some check could
    /// not evaluate anything.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => 0,
            Verdict::Violated => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

fn overall(reports: &[VerificationReport]) -> Verdict {
    if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        Verdict::Violated
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

/// CSV text: a versioned comment line, the header row, then rows with 17
/// significant digits.
pub fn csv(table: &SampleTable, check: &str, cost: &str, seed: u64) -> String {
    let mut s = format!("# mtwkit csv {CSV_VERSION} check={check} cost={cost} seed={seed}\n");
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:.16e}");
        }
        s.push('\n');
    }
    s
}

/// Writes `report` and the CSV files; returns the paths written.
pub fn write_all(dir: &Path, report_name: &str, report: &CampaignReport, with_csv: bool) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Runtime(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    if with_csv {
        for (k, r) in report.reports.iter().enumerate() {
            if let Some(t) = &r.table {
                let p = dir.join(format!("{k:02}_{}.csv", r.check));
                fs::write(&p, csv(t, &r.check, &r.cost, r.seed.unwrap_or(report.seed))).map_err(|e| io(&p, e))?;
                written.push(p);
            }
        }
    }
    let p = dir.join(report_name);
    fs::write(&p, report.to_json()).map_err(|e| io(&p, e))?;
    written.push(p);
    Ok(written)
}
