//! Campaign-level check of the second-variation identity on random fronts.

use rayon::prelude::*;

use super::field::MountainField;
use super::front::{front_point, lemma62_at, w_basis, Lemma62Options};
use super::segment::build_c_segment;
use super::{sample_segment_configs, DEFAULT_N_THETA};
use crate::cost_catalog::CostSpec;
use crate::error::Result;
use crate::linalg::axpy;
use crate::report::{SampleTable, Stopwatch, VerificationReport, Witness};
use crate::sampling::{random_unit, rng_for, streams, uniform};
use crate::transport_maps::DomainSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityOptions {
    pub n_configs: usize,
    pub seed: u64,
    /// `|w|` is drawn uniformly from `[0, w_max]`.
    pub w_max: f64,
    /// Extra distance from the singular set required of each configuration.
    pub clearance: f64,
    pub steps: Lemma62Options,
    /// Largest acceptable relative residual at the default steps.
    pub tol: f64,
    /// Accepted range of `sum res(h) / sum res(h/2)`.
    pub ratio_range: (f64, f64),
    /// Below this mean residual at `h/2` rounding dominates and the ratio is
    /// not meaningful.
    pub ratio_floor: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            n_configs: 100,
            seed: 0,
            w_max: 0.5,
            clearance: 0.1,
            steps: Lemma62Options::default(),
            tol: 1e-3,
            ratio_range: (3.0, 5.0),
            ratio_floor: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct IdentitySample {
    config: usize,
    theta: f64,
    x_w: Vec<f64>,
    lhs: f64,
    rhs: f64,
    residual: f64,
    residual_half: f64,
}

/// One front point per configuration with `x_w` and its stencil inside
/// `omega`; up to 16 draws of `(theta, w, eta)` are tried.
fn identity_sample(
    c: &CostSpec<f64>,
    omega: &DomainSpec,
    cfg: &super::SegmentConfig,
    k: usize,
    opts: &IdentityOptions,
) -> Option<IdentitySample> {
    let seg = build_c_segment(c, &cfg.x_m, &cfg.y0, &cfg.y1, DEFAULT_N_THETA).ok()?;
    let field = MountainField::new(seg).ok()?;
    let mut rng = rng_for(opts.seed, streams::PROBES, k as u64);
    let half = Lemma62Options { h_w: opts.steps.h_w / 2.0, h_t: opts.steps.h_t / 2.0 };
    for _ in 0..16 {
        let theta = uniform(&mut rng, 0.0, 1.0);
        let node = field.node(theta).ok()?;
        let basis = w_basis(&node);
        let dim = node.kin.y.coords().len();
        let combine = |a: &[f64], s: f64| basis.iter().zip(a).fold(vec![0.0; dim], |acc, (b, &v)| axpy(&acc, s * v, b));
        let r = uniform(&mut rng, 0.0, opts.w_max);
        let w = combine(&random_unit(&mut rng, basis.len()), r);
        let eta = combine(&random_unit(&mut rng, basis.len()), 1.0);
        let Ok(x_w) = front_point(&field, &node, &w) else { continue };
        let stencil_inside = [-2.0, 2.0].iter().all(|&s| {
            front_point(&field, &node, &axpy(&w, s * opts.steps.h_w, &eta)).is_ok_and(|x| omega.contains(&x))
        });
        if !omega.contains(&x_w) || !stencil_inside {
            continue;
        }
        let (Ok(a), Ok(b)) = (lemma62_at(&field, &node, &w, &eta, opts.steps), lemma62_at(&field, &node, &w, &eta, half))
        else {
            continue;
        };
        return Some(IdentitySample {
            config: k,
            theta,
            x_w: x_w.coords().to_vec(),
            lhs: a.lhs,
            rhs: a.rhs,
            residual: a.residual,
            residual_half: b.residual,
        });
    }
    None
}

/// Second-variation identity on random configurations: residual at the
/// default steps, and the convergence ratio under halving both steps.
pub fn identity_check(
    c: &CostSpec<f64>,
    omega: &DomainSpec,
    lambda: &DomainSpec,
    opts: &IdentityOptions,
) -> Result<VerificationReport> {
    let clock = Stopwatch::start();
    let mut r = VerificationReport::new("lemma62_identity", c.id());
    r.seed = Some(opts.seed);
    let cfgs = sample_segment_configs(c, omega, lambda, opts.n_configs, opts.seed, opts.clearance)?;
    let samples: Vec<Option<IdentitySample>> =
        cfgs.par_iter().enumerate().map(|(k, cfg)| identity_sample(c, omega, cfg, k, opts)).collect();
    let mut table = SampleTable::new(&["config", "theta", "lhs", "rhs", "residual", "residual_half"]);
    let (mut sum, mut sum_half) = (0.0, 0.0);
    let mut ratios = Vec::new();
    let mut worst: Option<&IdentitySample> = None;
    r.skipped = (opts.n_configs - cfgs.len()) as u64;
    for s in &samples {
        let Some(s) = s else {
            r.skipped += 1;
            continue;
        };
        r.samples += 1;
        r.observe_margin(opts.tol - s.residual);
        if s.residual >= opts.tol {
            r.failures += 1;
        }
        sum += s.residual;
        sum_half += s.residual_half;
        if s.residual_half > 0.0 {
            ratios.push(s.residual / s.residual_half);
        }
        if worst.is_none_or(|w| s.residual > w.residual) {
            worst = Some(s);
        }
        table.rows.push(vec![s.config as f64, s.theta, s.lhs, s.rhs, s.residual, s.residual_half]);
    }
    ratios.sort_by(f64::total_cmp);
    if let Some(w) = worst {
        r.metric("worst_residual", w.residual);
        r.witnesses.push(
            Witness::new("largest identity residual")
                .with("x_w", w.x_w.clone())
                .with_scalar("config", w.config as f64)
                .with_scalar("theta", w.theta)
                .with_scalar("lhs", w.lhs)
                .with_scalar("rhs", w.rhs)
                .with_scalar("residual", w.residual)
                .with_scalar("residual_half", w.residual_half),
        );
    }
    if !ratios.is_empty() {
        r.metric("median_ratio", ratios[ratios.len() / 2]);
    }
    if sum_half > opts.ratio_floor * r.samples.max(1) as f64 {
        let ratio = sum / sum_half;
        r.metric("aggregate_ratio", ratio);
        if !(opts.ratio_range.0..=opts.ratio_range.1).contains(&ratio) {
            r.failures += 1;
            r.notes.push(format!("convergence ratio {ratio:.3} outside {:?}", opts.ratio_range));
        }
    } else {
        r.notes.push("residuals at rounding level; convergence ratio not measured".into());
    }
    r.table = Some(table);
    clock.stamp(&mut r);
    Ok(r.finalize())
}
