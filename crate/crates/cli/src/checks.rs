//! Dispatch from config blocks to the core verifiers.
//!
//! Checks that run over several sampled configurations merge the per-config
//! reports into one; per-sample CSV rows gain a leading `config` column.

use mtwkit_core::c_convexity::{
    connectivity_check, csis_check, sample_potentials, ConnectivityOptions, CsisOptions, DiscreteCPotential,
    PotentialConfig, DEFAULT_ACTIVITY_TOL,
};
use mtwkit_core::cost_catalog::CostSpec;
use mtwkit_core::geometry::Point;
use mtwkit_core::linalg::axpy;
use mtwkit_core::mountain_lab::{
    build_c_segment, dasm_check, front_ode_track, front_point, identity_check, monotonicity_check, positivity_check,
    sample_segment_configs, uniform_grid, w_basis, w_grid, IdentityOptions, Lemma62Options, MountainField,
    PositivityOptions, SegmentConfig, SlidingCheckOptions, DEFAULT_N_THETA, DEFAULT_X_SAMPLES,
};
use mtwkit_core::mtw_curvature::{scan_a3, CurvatureOptions, ScanOptions};
use mtwkit_core::report::{SampleTable, Stopwatch, VerificationReport, Witness};
use mtwkit_core::sampling::{random_unit, rng_for, streams};
use mtwkit_core::transport_maps::DomainSpec;

use crate::config::{point, CheckBlock, FrontParams, PotentialBlock, SegmentBlock};
use crate::CliError;

/// Everything a check needs besides its own parameters.
pub struct Context<'a> {
    pub cost: &'a CostSpec<f64>,
    pub omega: &'a DomainSpec,
    pub lambda: &'a DomainSpec,
    pub seed: u64,
}

const DEFAULT_CLEARANCE: f64 = 0.05;
const MAX_WITNESSES: usize = 8;

pub fn run(block: &CheckBlock, ctx: &Context) -> Result<VerificationReport, CliError> {
    match block {
        CheckBlock::CurvatureScan(p) => {
            let d = ScanOptions::default();
            let opts = ScanOptions {
                n_points: p.n_points.unwrap_or(d.n_points),
                n_frames: p.n_frames.unwrap_or(d.n_frames),
                tol: p.tol.unwrap_or(d.tol),
                margin: p.margin.unwrap_or(d.margin),
                seed: p.seed.unwrap_or(ctx.seed),
                curvature: CurvatureOptions {
                    h_t: p.h_t.unwrap_or(d.curvature.h_t),
                    richardson: p.richardson.unwrap_or(false),
                },
            };
            let scan = scan_a3(ctx.cost, ctx.omega, ctx.lambda, &opts).map_err(runtime)?;
            let mut r = scan.to_report(ctx.cost, &opts);
            let mut t = SampleTable::new(&["pair", "frame", "value"]);
            t.rows = scan.values.iter().map(|&(k, f, v)| vec![k as f64, f as f64, v]).collect();
            r.table = Some(t);
            Ok(r)
        }
        CheckBlock::Dasm(p) | CheckBlock::Monotonicity(p) => {
            let is_dasm = matches!(block, CheckBlock::Dasm(_));
            let seed = p.seed.unwrap_or(ctx.seed);
            let d = SlidingCheckOptions::default();
            let opts = SlidingCheckOptions {
                dasm_tol: if is_dasm { p.tol.unwrap_or(d.dasm_tol) } else { d.dasm_tol },
                tol_neg: if is_dasm { d.tol_neg } else { p.tol.unwrap_or(d.tol_neg) },
                tol_pos: p.tol_pos.unwrap_or(d.tol_pos),
                strict: p.strict.unwrap_or(false),
                table: true,
                ..d
            };
            let cfgs = segments(ctx, p.segment.as_ref(), p.n_configs.unwrap_or(10), seed, p.clearance)?;
            let xs: Vec<Point<f64>> = ctx
                .omega
                .sample(ctx.cost.manifold(), p.n_x.unwrap_or(DEFAULT_X_SAMPLES), seed, streams::OMEGA)
                .map_err(runtime)?;
            let grid = uniform_grid(p.n_theta.unwrap_or(DEFAULT_N_THETA));
            let check = if is_dasm { dasm_check } else { monotonicity_check };
            let reports =
                cfgs.iter().map(|s| check(ctx.cost, &s.x_m, &s.y0, &s.y1, &xs, &grid, &opts)).collect::<Vec<_>>();
            Ok(merge(reports, seed))
        }
        CheckBlock::Identity(p) => {
            let d = IdentityOptions::default();
            let opts = IdentityOptions {
                n_configs: p.n_configs.unwrap_or(d.n_configs),
                seed: p.seed.unwrap_or(ctx.seed),
                w_max: p.w_max.unwrap_or(d.w_max),
                clearance: p.clearance.unwrap_or(d.clearance),
                steps: Lemma62Options { h_w: p.h_w.unwrap_or(d.steps.h_w), h_t: p.h_t.unwrap_or(d.steps.h_t) },
                tol: p.tol.unwrap_or(d.tol),
                ratio_range: (p.ratio_min.unwrap_or(d.ratio_range.0), p.ratio_max.unwrap_or(d.ratio_range.1)),
                ..d
            };
            identity_check(ctx.cost, ctx.omega, ctx.lambda, &opts).map_err(runtime)
        }
        CheckBlock::Positivity(p) => {
            let seed = p.seed.unwrap_or(ctx.seed);
            let d = PositivityOptions::default();
            let opts =
                PositivityOptions { tol: p.tol.unwrap_or(d.tol), strict: p.strict.unwrap_or(false), table: true, ..d };
            let cfgs = segments(ctx, p.segment.as_ref(), p.n_configs.unwrap_or(10), seed, p.clearance)?;
            let grid = uniform_grid(p.n_theta.unwrap_or(11));
            let ws = w_grid(ctx.cost.dim() - 1, p.w_per_axis.unwrap_or(9), p.w_radius.unwrap_or(0.5));
            let mut reports = Vec::new();
            for s in &cfgs {
                reports.push(match field(ctx.cost, s, grid.len()) {
                    Ok(f) => positivity_check(&f, &grid, &ws, &opts),
                    Err(e) => not_buildable("positivity", ctx.cost, e),
                });
            }
            Ok(merge(reports, seed))
        }
        CheckBlock::FrontTrack(p) => front_track(p, ctx),
        CheckBlock::Csis(p) => {
            let seed = p.seed.unwrap_or(ctx.seed);
            let z_axis = p.z_per_axis.unwrap_or(41).max(2);
            let d = CsisOptions::default();
            let opts = CsisOptions {
                activity_tol: p.activity_tol.unwrap_or(d.activity_tol),
                tol: p.tol.unwrap_or(d.tol),
                n_hull_probes: p.n_hull_probes.unwrap_or(d.n_hull_probes),
                refine_per_axis: p.refine.unwrap_or(true).then_some(10 * (z_axis - 1)),
                table: true,
                ..d
            };
            let zs = ctx.omega.grid(ctx.cost.manifold(), z_axis).map_err(runtime)?;
            let extra: Vec<Point<f64>> =
                ctx.omega.sample(ctx.cost.manifold(), p.n_x.unwrap_or(8), seed, streams::OMEGA).map_err(runtime)?;
            let pots = potentials(ctx, p.potential.as_ref(), p.n_potentials, p.n_mountains, seed, p.clearance)?;
            let reports = pots
                .iter()
                .enumerate()
                .map(|(k, (phi, xs))| {
                    let mut xs = xs.clone();
                    if p.potential.is_none() {
                        xs.extend(extra.iter().cloned());
                    }
                    csis_check(phi, &xs, &zs, &CsisOptions { seed: seed.wrapping_add(k as u64), ..opts.clone() })
                })
                .collect();
            Ok(merge(reports, seed))
        }
        CheckBlock::Connectivity(p) => {
            let seed = p.seed.unwrap_or(ctx.seed);
            let d = ConnectivityOptions::default();
            let opts = ConnectivityOptions {
                n_theta: p.n_theta.unwrap_or(d.n_theta),
                activity_tol: p.activity_tol.unwrap_or(DEFAULT_ACTIVITY_TOL),
                tol: p.tol.unwrap_or(d.tol),
                per_axis: p.per_axis.unwrap_or(d.per_axis),
            };
            let pots = potentials(ctx, p.potential.as_ref(), p.n_potentials, p.n_mountains, seed, p.clearance)?;
            let mut reports = Vec::new();
            for (phi, xs) in &pots {
                reports.push(
                    connectivity_check(phi, &xs[0], &opts).unwrap_or_else(|e| not_buildable("connectivity", ctx.cost, e)),
                );
            }
            let mut r = merge(reports, seed);
            r.check = "connectivity".into();
            Ok(r)
        }
    }
}

fn runtime(e: mtwkit_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn not_buildable(check: &str, c: &CostSpec<f64>, e: mtwkit_core::Error) -> VerificationReport {
    let mut r = VerificationReport::new(check, c.id());
    r.notes.push(format!("configuration not evaluable: {e}"));
    r.finalize()
}

fn field(c: &CostSpec<f64>, s: &SegmentConfig, n_theta: usize) -> mtwkit_core::Result<MountainField> {
    MountainField::new(build_c_segment(c, &s.x_m, &s.y0, &s.y1, n_theta)?)
}

fn segments(
    ctx: &Context,
    explicit: Option<&SegmentBlock>,
    count: usize,
    seed: u64,
    clearance: Option<f64>,
) -> Result<Vec<SegmentConfig>, CliError> {
    if let Some(s) = explicit {
        return Ok(vec![SegmentConfig {
            x_m: point(ctx.cost, &s.x_m, "segment.x_m")?,
            y0: point(ctx.cost, &s.y0, "segment.y0")?,
            y1: point(ctx.cost, &s.y1, "segment.y1")?,
        }]);
    }
    let cfgs = sample_segment_configs(
        ctx.cost,
        ctx.omega,
        ctx.lambda,
        count,
        seed,
        clearance.unwrap_or(DEFAULT_CLEARANCE),
    )
    .map_err(runtime)?;
    if cfgs.is_empty() {
        return Err(CliError::Runtime("no admissible segment configuration in the domains".into()));
    }
    Ok(cfgs)
}

/// `(potential, probe points)`; sampled potentials are probed at their
/// crease point `x_m`.
fn potentials(
    ctx: &Context,
    explicit: Option<&PotentialBlock>,
    count: Option<usize>,
    n_mountains: Option<usize>,
    seed: u64,
    clearance: Option<f64>,
) -> Result<Vec<(DiscreteCPotential, Vec<Point<f64>>)>, CliError> {
    if let Some(p) = explicit {
        let support = p
            .support
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((point(ctx.cost, &s.y, &format!("potential.support[{i}].y"))?, s.v)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let xs = p
            .x
            .iter()
            .enumerate()
            .map(|(i, x)| point(ctx.cost, x, &format!("potential.x[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        if xs.is_empty() {
            return Err(CliError::Config("potential.x: at least one point is required".into()));
        }
        let phi = DiscreteCPotential::new(ctx.cost.clone(), support, ctx.omega.clone())
            .map_err(|e| CliError::Config(format!("potential: {e}")))?;
        return Ok(vec![(phi, xs)]);
    }
    let n = n_mountains.unwrap_or(2);
    if !(2..=4).contains(&n) {
        return Err(CliError::Config("n_mountains: expected 2, 3 or 4".into()));
    }
    let cfgs: Vec<PotentialConfig> = sample_potentials(
        ctx.cost,
        ctx.omega,
        ctx.lambda,
        count.unwrap_or(20),
        n,
        seed,
        clearance.unwrap_or(DEFAULT_CLEARANCE),
    )
    .map_err(runtime)?;
    if cfgs.is_empty() {
        return Err(CliError::Runtime("no admissible potential configuration in the domains".into()));
    }
    cfgs.into_iter()
        .map(|k| {
            let phi = k.potential(ctx.cost, ctx.omega).map_err(runtime)?;
            Ok((phi, vec![k.x_m]))
        })
        .collect()
}

/// Tracks fronts from random starting points on `S_theta0` and records
/// `|d/dtheta f_t(X(t))|` along each trajectory.
fn front_track(p: &FrontParams, ctx: &Context) -> Result<VerificationReport, CliError> {
    let clock = Stopwatch::start();
    let seed = p.seed.unwrap_or(ctx.seed);
    let tol = p.tol.unwrap_or(1e-6);
    let (t0, t1, dt) = (p.theta0.unwrap_or(0.2), p.theta1.unwrap_or(0.8), p.dt.unwrap_or(0.01));
    let radius = p.w_radius.unwrap_or(0.3);
    let cfgs = segments(ctx, p.segment.as_ref(), p.n_configs.unwrap_or(10), seed, p.clearance)?;
    let mut r = VerificationReport::new("front_track", ctx.cost.id());
    r.seed = Some(seed);
    let d = ctx.cost.manifold().ambient_dim();
    let mut cols = vec!["config".to_string(), "start".into(), "theta".into()];
    cols.extend((0..d).map(|k| format!("x{k}")));
    cols.push("dfdtheta".into());
    let mut table = SampleTable { columns: cols, rows: Vec::new() };
    let mut worst: Option<(f64, usize, f64, Vec<f64>)> = None;
    let mut left = 0u64;
    for (k, s) in cfgs.iter().enumerate() {
        let Ok(f) = field(ctx.cost, s, 11) else {
            r.skipped += 1;
            continue;
        };
        let Ok(node) = f.node(t0) else {
            r.skipped += 1;
            continue;
        };
        let basis = w_basis(&node);
        let mut rng = rng_for(seed, streams::PROBES, k as u64);
        for start in 0..p.n_starts.unwrap_or(4) {
            let u = random_unit(&mut rng, basis.len());
            let w = basis.iter().zip(&u).fold(vec![0.0; d], |acc, (b, &c)| axpy(&acc, radius * c, b));
            let Ok(x0) = front_point(&f, &node, &w) else {
                r.skipped += 1;
                continue;
            };
            let track = match front_ode_track(&f, &x0, t0, t1, dt, None) {
                Ok(t) => t,
                Err(_) => {
                    left += 1;
                    r.skipped += 1;
                    continue;
                }
            };
            for (t, x) in &track {
                let Ok(v) = f.values(*t, x) else {
                    r.skipped += 1;
                    continue;
                };
                let g = v.df.abs();
                r.samples += 1;
                r.observe_margin(tol - g);
                if g >= tol {
                    r.failures += 1;
                }
                if worst.as_ref().is_none_or(|w| g > w.0) {
                    worst = Some((g, k, *t, x.coords().to_vec()));
                }
                let mut row = vec![k as f64, start as f64, *t];
                row.extend_from_slice(x.coords());
                row.push(v.df);
                table.rows.push(row);
            }
        }
    }
    if left > 0 {
        r.metric("trajectories_stopped", left as f64);
    }
    if let Some((g, k, t, x)) = worst {
        let s = &cfgs[k];
        r.witnesses.push(
            Witness::new(if r.failures > 0 { "trajectory drifts off the front" } else { "largest front drift" })
                .with("x_m", s.x_m.coords().to_vec())
                .with("y0", s.y0.coords().to_vec())
                .with("y1", s.y1.coords().to_vec())
                .with("x", x)
                .with_scalar("theta", t)
                .with_scalar("abs_dfdtheta", g),
        );
    }
    r.table = Some(table);
    clock.stamp(&mut r);
    Ok(r.finalize())
}

/// Sums counts, keeps the smallest margin, the worst report's witnesses (or
/// those of up to eight violating reports) and concatenates the tables.
pub fn merge(reports: Vec<VerificationReport>, seed: u64) -> VerificationReport {
    let first = reports.first().expect("at least one report");
    let mut r = VerificationReport::new(&first.check, &first.cost);
    r.seed = Some(seed);
    let mut table: Option<SampleTable> = None;
    let mut worst: Option<usize> = None;
    let mut violated = 0u64;
    for (k, rep) in reports.iter().enumerate() {
        r.samples += rep.samples;
        r.failures += rep.failures;
        r.skipped += rep.skipped;
        r.wall_time_s += rep.wall_time_s;
        if let Some(m) = rep.worst_margin {
            r.observe_margin(m);
            if worst.is_none_or(|w| reports[w].worst_margin.is_none_or(|wm| m < wm)) {
                worst = Some(k);
            }
        }
        if rep.failures > 0 {
            violated += 1;
            if r.witnesses.len() < MAX_WITNESSES {
                r.witnesses.extend(rep.witnesses.iter().take(1).cloned().map(|w| tag(w, k)));
            }
        }
        for (key, v) in &rep.metrics {
            match r.metrics.get_mut(key) {
                None => {
                    r.metrics.insert(key.clone(), *v);
                }
                // margins keep the smallest value, residuals and ratios the
                // largest, counts add up
                Some(e) if key.contains("margin") => *e = e.min(*v),
                Some(e) if key.contains("residual") || key.contains("ratio") || key.starts_with("grad") => {
                    *e = e.max(*v)
                }
                Some(e) => *e += v,
            }
        }
        for n in &rep.notes {
            r.notes.push(if reports.len() > 1 { format!("config {k}: {n}") } else { n.clone() });
        }
        if let Some(t) = &rep.table {
            let tt = table.get_or_insert_with(|| {
                let mut cols = vec!["config".to_string()];
                cols.extend(t.columns.iter().cloned());
                SampleTable { columns: cols, rows: Vec::new() }
            });
            tt.rows.extend(t.rows.iter().map(|row| {
                let mut out = vec![k as f64];
                out.extend_from_slice(row);
                out
            }));
        }
    }
    if r.witnesses.is_empty() {
        if let Some(w) = worst {
            r.witnesses.extend(reports[w].witnesses.iter().take(1).cloned().map(|x| tag(x, w)));
        }
    }
    r.metric("configs", reports.len() as f64);
    r.metric("violated_configs", violated as f64);
    r.table = table;
    r.finalize()
}

fn tag(w: Witness, config: usize) -> Witness {
    w.with_scalar("config", config as f64)
}
