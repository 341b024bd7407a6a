//! CSIS and contact-set connectivity verifiers.

use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use super::subdiff::subdifferential;
use super::{c_star_value, c_transform_eval, contact_set, DiscreteCPotential};
use crate::error::Result;
use crate::geometry::{Manifold, Point, TangentVector};
use crate::mountain_lab::build_c_segment;
use crate::report::{SampleTable, Stopwatch, VerificationReport, Witness};
use crate::sampling::{rng_for, streams};
use crate::transport_maps::{c_exp, DomainSpec, Shape};

/// Default contact slack of [`connectivity_check`].
pub const DEFAULT_CONNECTIVITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct CsisOptions {
    pub activity_tol: f64,
    /// Support slack, relative to `1 + |phi(z)|`.
    pub tol: f64,
    /// Random convex combinations per sample, on top of the generators.
    pub n_hull_probes: usize,
    pub seed: u64,
    /// Probes whose `c-Exp` leaves this domain are skipped.
    pub lambda: Option<DomainSpec>,
    /// Re-evaluate the worst probe on a grid this fine (per axis).
    pub refine_per_axis: Option<usize>,
    pub table: bool,
}

impl Default for CsisOptions {
    fn default() -> Self {
        Self {
            activity_tol: super::DEFAULT_ACTIVITY_TOL,
            tol: 1e-9,
            n_hull_probes: 32,
            seed: 0,
            lambda: None,
            refine_per_axis: None,
            table: false,
        }
    }
}

/// `phi(z) - [-c(z, y) + c(x, y) + phi(x)]`: how far the mountain through
/// `(x, phi(x))` with focus `y` stays below `phi` at `z`.
pub fn support_margin(phi: &DiscreteCPotential, phi_x: f64, c_xy: f64, y: &Point<f64>, z: &Point<f64>, phi_z: f64) -> f64 {
    let m = phi_z + phi.cost.value_extended(z, y) - c_xy - phi_x;
    if m.is_nan() {
        f64::INFINITY
    } else {
        m
    }
}

/// Grid with `per_axis` cells per axis, nodes at the cell centres for boxes
/// (so it shares no node with [`DomainSpec::grid`]); other shapes use the
/// regular grid.
pub fn refined_grid(domain: &DomainSpec, m: Manifold, per_axis: usize) -> Result<Vec<Point<f64>>> {
    match &domain.shape {
        Shape::Box { lo, hi } => {
            domain.validate(m)?;
            let n = lo.len();
            let total = per_axis.pow(n as u32);
            (0..total)
                .map(|flat| {
                    let mut r = flat;
                    let mut v = vec![0.0; n];
                    for k in (0..n).rev() {
                        let i = r % per_axis;
                        r /= per_axis;
                        v[k] = lo[k] + (hi[k] - lo[k]) * (i as f64 + 0.5) / per_axis as f64;
                    }
                    m.point(v)
                })
                .collect()
        }
        _ => domain.grid(m, per_axis),
    }
}

struct Probe {
    sample: usize,
    weights: Vec<f64>,
    p: Vec<f64>,
}

struct ProbeOutcome {
    y: Point<f64>,
    margin: f64,
    z: usize,
    fails: bool,
}

fn probe_weights(k: usize, n: usize, seed: u64, sample: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| f64::from(i == j)).collect()).collect();
    if k < 2 {
        return out;
    }
    let mut rng = rng_for(seed, streams::PROBES, sample);
    for _ in 0..n {
        let e: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
        let s: f64 = e.iter().sum();
        out.push(e.iter().map(|v| v / s).collect());
    }
    out
}

/// c-subdifferential is subdifferential, probed on `x_samples`: every
/// convex combination `p` of active gradients must give a focus
/// `y = c-Exp_x p` whose mountain through `(x, phi(x))` supports `phi` on
/// `z_grid`.
pub fn csis_check(phi: &DiscreteCPotential, x_samples: &[Point<f64>], z_grid: &[Point<f64>], opts: &CsisOptions) -> VerificationReport {
    let clock = Stopwatch::start();
    let c = &phi.cost;
    let mut r = VerificationReport::new("csis", c.id());
    r.seed = Some(opts.seed);
    let phi_z: Vec<f64> = z_grid.par_iter().map(|z| phi.value_relaxed(z)).collect();

    let mut phi_x = vec![f64::NAN; x_samples.len()];
    let mut probes = Vec::new();
    let mut creases = 0u64;
    for (i, x) in x_samples.iter().enumerate() {
        let (Ok(v), Ok(sd)) = (c_transform_eval(phi, x), subdifferential(phi, x, opts.activity_tol)) else {
            r.skipped += 1;
            continue;
        };
        phi_x[i] = v;
        if sd.len() >= 2 {
            creases += 1;
        }
        for w in probe_weights(sd.len(), opts.n_hull_probes, opts.seed, i as u64) {
            probes.push(Probe { sample: i, p: sd.combine(&w), weights: w });
        }
    }

    let eval = |pr: &Probe, grid: &[Point<f64>], grid_phi: &[f64]| -> Option<ProbeOutcome> {
        let x = &x_samples[pr.sample];
        let y = c_exp(c, x, &TangentVector::project(x, &pr.p)).ok()?.target;
        let c_xy = c.eval(x, &y).ok()?;
        let mut out = ProbeOutcome { y, margin: f64::INFINITY, z: 0, fails: false };
        for (k, (z, &pz)) in grid.iter().zip(grid_phi).enumerate() {
            let m = support_margin(phi, phi_x[pr.sample], c_xy, &out.y, z, pz);
            if m < -opts.tol * (1.0 + pz.abs()) {
                out.fails = true;
            }
            if m < out.margin {
                out.margin = m;
                out.z = k;
            }
        }
        Some(out)
    };
    let outcomes: Vec<Option<ProbeOutcome>> = probes
        .par_iter()
        .map(|pr| {
            let o = eval(pr, z_grid, &phi_z)?;
            match &opts.lambda {
                Some(l) if !l.contains(&o.y) => None,
                _ => Some(o),
            }
        })
        .collect();

    let mut table = opts.table.then(|| {
        let d = c.manifold().ambient_dim();
        let mut cols = vec!["sample".to_string()];
        cols.extend((0..d).map(|k| format!("y{k}")));
        cols.push("margin".into());
        cols.push("violated".into());
        SampleTable { columns: cols, rows: Vec::new() }
    });
    let mut worst: Option<(usize, &ProbeOutcome)> = None;
    for (j, o) in outcomes.iter().enumerate() {
        let Some(o) = o else {
            r.skipped += 1;
            continue;
        };
        r.samples += 1;
        r.observe_margin(o.margin);
        if o.fails {
            r.failures += 1;
        }
        if worst.is_none_or(|(_, w)| o.margin < w.margin) {
            worst = Some((j, o));
        }
        if let Some(t) = table.as_mut() {
            let mut row = vec![probes[j].sample as f64];
            row.extend_from_slice(o.y.coords());
            row.extend([o.margin, f64::from(o.fails)]);
            t.rows.push(row);
        }
    }
    r.metric("crease_samples", creases as f64);
    if let Some((j, o)) = worst {
        let pr = &probes[j];
        let mut w = Witness::new(if r.failures > 0 { "subgradient without supporting mountain" } else { "smallest support margin" })
            .with("x", x_samples[pr.sample].coords().to_vec())
            .with("p", pr.p.clone())
            .with("weights", pr.weights.clone())
            .with("y", o.y.coords().to_vec())
            .with("z", z_grid[o.z].coords().to_vec())
            .with_scalar("margin", o.margin)
            .with("support_y", phi.support.iter().flat_map(|(y, _)| y.coords().to_vec()).collect::<Vec<_>>())
            .with("support_v", phi.support.iter().map(|(_, v)| *v).collect::<Vec<_>>());
        if let Some(per_axis) = opts.refine_per_axis {
            let fine = refined_grid(&phi.domain, c.manifold(), per_axis).unwrap_or_default();
            let fine_phi: Vec<f64> = fine.par_iter().map(|z| phi.value_relaxed(z)).collect();
            if let Some(f) = eval(pr, &fine, &fine_phi) {
                w = w.with_scalar("margin_refined", f.margin).with("z_refined", fine[f.z].coords().to_vec());
                r.metric("refined_margin", f.margin);
                if o.fails && !f.fails {
                    r.notes.push("violation not reproduced on the refined grid".into());
                }
            }
        }
        r.witnesses.push(w);
    }
    r.table = table;
    clock.stamp(&mut r);
    r.finalize()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityOptions {
    pub n_theta: usize,
    pub activity_tol: f64,
    /// Contact slack, relative to `1 + |phi(x)|`.
    pub tol: f64,
    /// Per-axis resolution of the `x`-grid for `L^{c*}`.
    pub per_axis: usize,
}

impl Default for ConnectivityOptions {
    fn default() -> Self {
        Self {
            n_theta: 21,
            activity_tol: super::DEFAULT_ACTIVITY_TOL,
            tol: DEFAULT_CONNECTIVITY_TOL,
            per_axis: super::DEFAULT_TRANSFORM_GRID,
        }
    }
}

/// The contact set at `x` is c-convex: along every c-segment between two
/// contact points, `phi(x) + c(x, y_theta) + L^{c*} phi(y_theta) <= tol`.
///
/// `x` itself joins the transform grid, so contact points have gap zero up
/// to rounding and only non-contact can be under-resolved.
pub fn connectivity_check(phi: &DiscreteCPotential, x: &Point<f64>, opts: &ConnectivityOptions) -> Result<VerificationReport> {
    let clock = Stopwatch::start();
    let c = &phi.cost;
    let mut r = VerificationReport::new("connectivity", c.id());
    let cs = contact_set(phi, x, opts.activity_tol);
    if cs.active.len() < 2 {
        r.notes.push("fewer than two contact points".into());
        return Ok(r.finalize());
    }
    let phi_x = c_transform_eval(phi, x)?;
    let mut xs = phi.domain.grid(c.manifold(), opts.per_axis)?;
    xs.push(x.clone());
    let phis: Vec<f64> = xs.par_iter().map(|z| phi.value_relaxed(z)).collect();
    let thr = opts.tol * (1.0 + phi_x.abs());
    let mut worst: Option<(f64, usize, usize, f64, Point<f64>)> = None;
    for (a, &i) in cs.active.iter().enumerate() {
        for &j in &cs.active[a + 1..] {
            let seg = build_c_segment(c, x, &phi.support[i].0, &phi.support[j].0, opts.n_theta)?;
            let gaps: Vec<Option<f64>> = seg
                .ys
                .par_iter()
                .map(|y| Some(phi_x + c.eval(x, y).ok()? + c_star_value(c, y, &xs, &phis)))
                .collect();
            for (k, g) in gaps.into_iter().enumerate() {
                let Some(g) = g else {
                    r.skipped += 1;
                    continue;
                };
                r.samples += 1;
                r.observe_margin(thr - g);
                if g > thr {
                    r.failures += 1;
                }
                if worst.as_ref().is_none_or(|w| g > w.0) {
                    worst = Some((g, i, j, seg.theta_grid[k], seg.ys[k].clone()));
                }
            }
        }
    }
    if let Some((g, i, j, theta, y)) = worst {
        r.witnesses.push(
            Witness::new(if r.failures > 0 { "c-segment of contact points leaves the contact set" } else { "largest contact gap" })
                .with("x", x.coords().to_vec())
                .with("y_i", phi.support[i].0.coords().to_vec())
                .with("y_j", phi.support[j].0.coords().to_vec())
                .with_scalar("theta", theta)
                .with("y_theta", y.coords().to_vec())
                .with_scalar("gap", g),
        );
    }
    clock.stamp(&mut r);
    Ok(r.finalize())
}
