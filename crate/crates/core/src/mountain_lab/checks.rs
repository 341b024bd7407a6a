//! DASM and monotonicity verifiers over a `(theta, x)` sample grid.
//!
//! DASM is checked on every sub-segment `[y_a, y_b]` of the grid, i.e.
//! `f_theta(x) <= max(f_a(x), f_b(x))` for `a < theta < b`. This is the form
//! in which it is equivalent to monotonicity of `S+_theta` pointwise in `x`;
//! the plain endpoint inequality is reported as the `endpoint_worst_margin`
//! metric.

use rayon::prelude::*;

use super::field::{MountainField, MountainValues};
use super::segment::{build_c_segment_on, CSegment};
use crate::cost_catalog::CostSpec;
use crate::geometry::Point;
use crate::linalg::{norm, sub};
use crate::report::{SampleTable, Stopwatch, VerificationReport, Witness};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlidingCheckOptions {
    /// DASM slack, relative to `1 + |f|`.
    pub dasm_tol: f64,
    /// `d/dtheta f >= tol_pos` counts as having entered `S+`.
    pub tol_pos: f64,
    /// Once inside, `d/dtheta f >= -tol_neg` counts as remaining.
    pub tol_neg: f64,
    /// Also check the strict variants.
    pub strict: bool,
    /// Points this close to `x_m` are exempt from the strict variants.
    pub strict_exclusion: f64,
    /// Keep per-sample rows for CSV output.
    pub table: bool,
}

impl Default for SlidingCheckOptions {
    fn default() -> Self {
        Self { dasm_tol: 1e-9, tol_pos: 1e-7, tol_neg: 1e-6, strict: false, strict_exclusion: 0.05, table: false }
    }
}

pub(crate) fn table_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["theta".to_string()];
    cols.extend((0..n).map(|i| format!("x{i}")));
    cols.extend(["f", "dfdtheta", "d2fdtheta2", "margin", "reachable"].map(String::from));
    cols
}

/// Mountain values of every grid node at every sample; `None` where some
/// `(x, y_theta)` is not admissible.
pub(crate) fn evaluate_samples(field: &MountainField, xs: &[Point<f64>]) -> Vec<Option<Vec<MountainValues>>> {
    xs.par_iter()
        .map(|x| field.nodes().iter().map(|node| field.values_at(node, x).ok()).collect::<Option<Vec<_>>>())
        .collect()
}

/// `max(min_{a<k} F_a, min_{b>k} F_b) - F_k` for interior `k`.
fn subsegment_margins(f: &[f64]) -> Vec<Option<f64>> {
    let m = f.len();
    let mut prefix = vec![f64::INFINITY; m];
    for k in 1..m {
        prefix[k] = prefix[k - 1].min(f[k - 1]);
    }
    let mut suffix = vec![f64::INFINITY; m];
    for k in (0..m.saturating_sub(1)).rev() {
        suffix[k] = suffix[k + 1].min(f[k + 1]);
    }
    (0..m).map(|k| (k > 0 && k + 1 < m).then(|| prefix[k].max(suffix[k]) - f[k])).collect()
}

fn build(
    c: &CostSpec<f64>,
    x_m: &Point<f64>,
    y0: &Point<f64>,
    y1: &Point<f64>,
    theta_grid: &[f64],
    report: &mut VerificationReport,
) -> Option<MountainField> {
    let seg = build_c_segment_on(c, x_m, y0, y1, theta_grid, None).and_then(MountainField::new);
    match seg {
        Ok(f) => {
            if let Some(eps) = f.segment.offset {
                report.notes.push(format!("segment offset from the origin by {eps:e}"));
            }
            Some(f)
        }
        Err(e) => {
            report.notes.push(format!("segment not buildable: {e}"));
            None
        }
    }
}

fn push_rows(t: &mut SampleTable, seg: &CSegment, x: &Point<f64>, vals: &[MountainValues], margins: &[Option<f64>]) {
    for (k, v) in vals.iter().enumerate() {
        let mut row = vec![seg.theta_grid[k]];
        row.extend_from_slice(x.coords());
        row.extend([v.f, v.df, v.d2f, margins[k].unwrap_or(f64::NAN), 1.0]);
        t.rows.push(row);
    }
}

/// Re-evaluates the sub-segment DASM margin of one sample on a 10x finer grid.
fn refined_dasm_margin(field: &MountainField, x: &Point<f64>) -> Option<f64> {
    let n = (field.segment.theta_grid.len() - 1) * 10;
    let f: Vec<f64> = (0..=n).map(|k| field.f(k as f64 / n as f64, x).ok()).collect::<Option<_>>()?;
    subsegment_margins(&f).into_iter().flatten().min_by(f64::total_cmp)
}

/// Interior maxima of `theta -> f_theta(x)` that fall between grid nodes:
/// cells where `d/dtheta f` turns from positive to negative are bisected on
/// the derivative. Returns `(cell, theta, f)` per peak.
fn cell_peaks(field: &MountainField, x: &Point<f64>, vals: &[MountainValues]) -> Vec<(usize, f64, f64)> {
    let grid = &field.segment.theta_grid;
    let mut out = Vec::new();
    for k in 0..vals.len().saturating_sub(1) {
        if !(vals[k].df > 0.0 && vals[k + 1].df < 0.0) {
            continue;
        }
        let (mut a, mut b) = (grid[k], grid[k + 1]);
        for _ in 0..PEAK_BISECTIONS {
            let mid = 0.5 * (a + b);
            match field.values(mid, x) {
                Ok(v) if v.df > 0.0 => a = mid,
                Ok(_) => b = mid,
                Err(_) => break,
            }
        }
        let theta = 0.5 * (a + b);
        if let Ok(v) = field.values(theta, x) {
            out.push((k, theta, v.f));
        }
    }
    out
}

const PEAK_BISECTIONS: usize = 40;

/// Double mountain above sliding mountains on the sampled `(theta, x)`.
pub fn dasm_check(
    c: &CostSpec<f64>,
    x_m: &Point<f64>,
    y0: &Point<f64>,
    y1: &Point<f64>,
    x_samples: &[Point<f64>],
    theta_grid: &[f64],
    opts: &SlidingCheckOptions,
) -> VerificationReport {
    let clock = Stopwatch::start();
    let mut r = VerificationReport::new(if opts.strict { "dasm_strict" } else { "dasm" }, c.id());
    let Some(field) = build(c, x_m, y0, y1, theta_grid, &mut r) else {
        return r.finalize();
    };
    let evals = evaluate_samples(&field, x_samples);
    let mut table = opts.table.then(|| {
        let cols = table_columns(c.manifold().ambient_dim());
        SampleTable { columns: cols, rows: Vec::new() }
    });
    let mut endpoint_worst = f64::INFINITY;
    let mut strict_failures = 0u64;
    let mut worst: Option<(f64, usize, f64)> = None;
    for (i, (x, vals)) in x_samples.iter().zip(&evals).enumerate() {
        let Some(vals) = vals else {
            r.skipped += 1;
            continue;
        };
        let f: Vec<f64> = vals.iter().map(|v| v.f).collect();
        let margins = subsegment_margins(&f);
        let top = f[0].max(f[f.len() - 1]);
        let away = norm(&sub(x.coords(), x_m.coords())) > opts.strict_exclusion;
        let mut candidates: Vec<(f64, f64, f64)> = margins
            .iter()
            .enumerate()
            .filter_map(|(k, m)| m.map(|m| (m, f[k], field.segment.theta_grid[k])))
            .collect();
        r.samples += (margins.len() - candidates.len()) as u64;
        // a peak inside cell k lies strictly inside the sub-segment
        // [nodes <= k, nodes >= k + 1]
        for (k, theta, fp) in cell_peaks(&field, x, vals) {
            let before = f[..=k].iter().copied().fold(f64::INFINITY, f64::min);
            let after = f[k + 1..].iter().copied().fold(f64::INFINITY, f64::min);
            candidates.push((before.max(after) - fp, fp, theta));
        }
        for (m, fk, theta) in candidates {
            r.samples += 1;
            endpoint_worst = endpoint_worst.min(top - fk);
            r.observe_margin(m);
            if m < -opts.dasm_tol * (1.0 + fk.abs()) {
                r.failures += 1;
            } else if opts.strict && away && m <= 0.0 {
                strict_failures += 1;
            }
            if worst.is_none_or(|w| m < w.0) {
                worst = Some((m, i, theta));
            }
        }
        if let Some(t) = table.as_mut() {
            push_rows(t, &field.segment, x, vals, &margins);
        }
    }
    if endpoint_worst.is_finite() {
        r.metric("endpoint_worst_margin", endpoint_worst);
    }
    if opts.strict {
        r.metric("strict_failures", strict_failures as f64);
        r.failures += strict_failures;
    }
    if let Some((m, i, theta)) = worst {
        let x = &x_samples[i];
        let mut w = Witness::new(if r.failures > 0 { "sliding mountain above double mountain" } else { "smallest DASM margin" })
            .with("x_m", x_m.coords().to_vec())
            .with("y0", y0.coords().to_vec())
            .with("y1", y1.coords().to_vec())
            .with("x", x.coords().to_vec())
            .with_scalar("theta", theta)
            .with_scalar("margin", m);
        if let Some(mr) = refined_dasm_margin(&field, x) {
            w = w.with_scalar("margin_refined", mr);
        }
        r.witnesses.push(w);
    }
    r.table = table;
    clock.stamp(&mut r);
    r.finalize()
}

/// Monotonicity of the super-level sets `S+_theta` on the sampled `(theta, x)`.
pub fn monotonicity_check(
    c: &CostSpec<f64>,
    x_m: &Point<f64>,
    y0: &Point<f64>,
    y1: &Point<f64>,
    x_samples: &[Point<f64>],
    theta_grid: &[f64],
    opts: &SlidingCheckOptions,
) -> VerificationReport {
    let clock = Stopwatch::start();
    let mut r = VerificationReport::new(if opts.strict { "monotonicity_strict" } else { "monotonicity" }, c.id());
    let Some(field) = build(c, x_m, y0, y1, theta_grid, &mut r) else {
        return r.finalize();
    };
    let evals = evaluate_samples(&field, x_samples);
    let mut table = opts.table.then(|| SampleTable { columns: table_columns(c.manifold().ambient_dim()), rows: Vec::new() });
    let mut strict_failures = 0u64;
    let mut worst: Option<(f64, usize, usize, usize)> = None;
    for (i, (x, vals)) in x_samples.iter().zip(&evals).enumerate() {
        let Some(vals) = vals else {
            r.skipped += 1;
            continue;
        };
        let mut entered: Option<usize> = None;
        let mut near_zero = 0;
        let mut margins = vec![None; vals.len()];
        for (k, v) in vals.iter().enumerate() {
            r.samples += 1;
            if let Some(j) = entered {
                let m = v.df + opts.tol_neg;
                margins[k] = Some(m);
                r.observe_margin(m);
                if m < 0.0 {
                    r.failures += 1;
                }
                if worst.is_none_or(|w| m < w.0) {
                    worst = Some((m, i, j, k));
                }
            } else if v.df >= opts.tol_pos {
                entered = Some(k);
            }
            if v.df.abs() < opts.tol_pos {
                near_zero += 1;
            }
        }
        // two nodes on S_theta would put x in S_a ∩ S_b
        if opts.strict && near_zero >= 2 && norm(&sub(x.coords(), x_m.coords())) > opts.strict_exclusion {
            strict_failures += 1;
        }
        if let Some(t) = table.as_mut() {
            push_rows(t, &field.segment, x, vals, &margins);
        }
    }
    if opts.strict {
        r.metric("strict_failures", strict_failures as f64);
        r.failures += strict_failures;
    }
    if let Some((m, i, j, k)) = worst {
        let grid = &field.segment.theta_grid;
        r.witnesses.push(
            Witness::new(if r.failures > 0 { "super-level set shrinks" } else { "smallest monotonicity margin" })
                .with("x_m", x_m.coords().to_vec())
                .with("y0", y0.coords().to_vec())
                .with("y1", y1.coords().to_vec())
                .with("x", x_samples[i].coords().to_vec())
                .with_scalar("theta_entered", grid[j])
                .with_scalar("theta", grid[k])
                .with_scalar("margin", m),
        );
    }
    r.table = table;
    clock.stamp(&mut r);
    r.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsegment_margins_detect_interior_peak() {
        let m = subsegment_margins(&[0.0, 1.0, 2.0]);
        assert_eq!(m, vec![None, Some(1.0), None]);
        let m = subsegment_margins(&[0.0, 2.0, 1.0, 3.0]);
        assert_eq!(m[1], Some(-1.0));
        assert_eq!(m[2], Some(2.0));
    }
}
