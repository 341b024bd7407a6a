//! Structured outcome of a verification campaign.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violated,
    Inconclusive,
}

/// A configuration exhibiting the worst (or a violating) margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl Witness {
    pub fn new(description: impl Into<String>) -> Self {
        Self { description: description.into(), values: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, v: impl Into<Vec<f64>>) -> Self {
        self.values.insert(key.to_string(), v.into());
        self
    }

    pub fn with_scalar(self, key: &str, v: f64) -> Self {
        self.with(key, vec![v])
    }
}

/// Per-sample rows destined for CSV output; never part of the JSON report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

/// Margins follow one convention throughout: positive means the checked
/// inequality holds with room to spare, negative means it is violated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub cost: String,
    pub verdict: Verdict,
    pub samples: u64,
    pub failures: u64,
    pub skipped: u64,
    pub worst_margin: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub table: Option<SampleTable>,
}

impl VerificationReport {
    pub fn new(check: &str, cost: &str) -> Self {
        Self {
            check: check.to_string(),
            cost: cost.to_string(),
            verdict: Verdict::Inconclusive,
            samples: 0,
            failures: 0,
            skipped: 0,
            worst_margin: None,
            witnesses: Vec::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            seed: None,
            tool_version: TOOL_VERSION.to_string(),
            wall_time_s: 0.0,
            table: None,
        }
    }

    /// Records a margin; non-finite values are ignored so the report stays
    /// representable in JSON.
    pub fn observe_margin(&mut self, m: f64) {
        if m.is_finite() {
            self.worst_margin = Some(self.worst_margin.map_or(m, |w| w.min(m)));
        }
    }

    pub fn metric(&mut self, key: &str, v: f64) {
        if v.is_finite() {
            self.metrics.insert(key.to_string(), v);
        }
    }

    /// Violated if any failure was recorded, inconclusive if nothing could be
    /// evaluated, pass otherwise.
    pub fn finalize(mut self) -> Self {
        self.verdict = if self.failures > 0 {
            Verdict::Violated
        } else if self.samples == 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Wall-clock stopwatch for the `wall_time_s` field.
pub struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn stamp(&self, report: &mut VerificationReport) {
        report.wall_time_s = self.0.elapsed().as_secs_f64();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_counts() {
        let mut r = VerificationReport::new("x", "quadratic");
        assert_eq!(r.clone().finalize().verdict, Verdict::Inconclusive);
        r.samples = 3;
        assert_eq!(r.clone().finalize().verdict, Verdict::Pass);
        r.failures = 1;
        assert_eq!(r.finalize().verdict, Verdict::Violated);
    }

    #[test]
    fn margins_ignore_nan() {
        let mut r = VerificationReport::new("x", "q");
        r.observe_margin(0.5);
        r.observe_margin(f64::NAN);
        r.observe_margin(-0.25);
        assert_eq!(r.worst_margin, Some(-0.25));
    }
}
