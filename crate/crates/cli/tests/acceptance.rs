//! Acceptance suite: one line per criterion, run sequentially so the
//! runtime bounds are measured without interference.
//!
//! `cargo test -p mtwkit --test acceptance`

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mtwkit_core::c_convexity::{
    connectivity_check, csis_check, sample_potentials, ConnectivityOptions, CsisOptions, DiscreteCPotential,
};
use mtwkit_core::cost_catalog::polynomial::{Monomial, Polynomial};
use mtwkit_core::cost_catalog::{derivatives, fd_oracle, relative_residual, A3Tag, CostSpec, DerivOrder, Sign};
use mtwkit_core::geometry::{Manifold, Point};
use mtwkit_core::mountain_lab::{
    build_c_segment, dasm_check, fit_circle, fit_sphere, front_sample, identity_check, monotonicity_check,
    positivity_check, sample_segment_configs, uniform_grid, w_grid, IdentityOptions, MountainField, PositivityOptions,
    SegmentConfig, SlidingCheckOptions, DEFAULT_N_THETA,
};
use mtwkit_core::mtw_curvature::{scan_a3, ScanOptions};
use mtwkit_core::sampling::{random_unit, rng_for};
use mtwkit_core::transport_maps::{c_exp, c_exp_inverse, symmetry_residual, DomainSpec, Shape, Side};
use mtwkit_core::Verdict;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: f64) -> Result<f64, String> {
    let t = start.elapsed().as_secs_f64();
    ensure(t < limit, || format!("runtime {t:.1}s exceeds {limit}s"))?;
    Ok(t)
}

fn domains(c: &CostSpec<f64>) -> (DomainSpec, DomainSpec) {
    match c.manifold() {
        Manifold::Euclidean(n) => (DomainSpec::unit_box(Side::Omega, n, 1.0), DomainSpec::unit_box(Side::Lambda, n, 1.0)),
        Manifold::Sphere(_) => {
            (DomainSpec::new(Side::Omega, Shape::FullSphere), DomainSpec::new(Side::Lambda, Shape::FullSphere))
        }
    }
}

fn perturbed() -> CostSpec<f64> {
    let t = |coef, powers: Vec<u32>| Monomial { coef, powers };
    let f = Polynomial::new(2, vec![t(0.1, vec![2, 0]), t(0.1, vec![0, 2]), t(0.02, vec![4, 0])]).unwrap();
    let g = Polynomial::new(2, vec![t(0.15, vec![2, 0]), t(0.15, vec![0, 2]), t(0.05, vec![1, 0])]).unwrap();
    CostSpec::perturbed_quadratic(2, f, g).unwrap()
}

fn p4() -> CostSpec<f64> {
    CostSpec::power(2, 4.0, Sign::Plus, A3Tag::Exploratory).unwrap()
}

/// Every catalog entry, sphere costs on S^2.
fn catalog() -> Vec<(&'static str, CostSpec<f64>)> {
    let pw = |p, tag| CostSpec::power(2, p, Sign::Minus, tag).unwrap();
    vec![
        ("quadratic", CostSpec::quadratic(2).unwrap()),
        ("perturbed_quadratic", perturbed()),
        ("sqrt", CostSpec::sqrt(2).unwrap()),
        ("log", CostSpec::log(2).unwrap()),
        ("power(-2)", pw(-2.0, A3Tag::ExpectedA3W)),
        ("power(-1/2)", pw(-0.5, A3Tag::ExpectedA3W)),
        ("power(1/2)", pw(0.5, A3Tag::ExpectedA3W)),
        ("power(4)", p4()),
        ("sphere_dist_sq", CostSpec::sphere_dist_sq(2).unwrap()),
        ("reflector_antenna", CostSpec::reflector_antenna(2).unwrap()),
    ]
}

/// `count` admissible pairs at least `clearance` beyond the excluded zone
/// around the singular set.
fn pairs(c: &CostSpec<f64>, count: usize, seed: u64, clearance: f64) -> Vec<(Point<f64>, Point<f64>)> {
    let (o, l) = domains(c);
    let m = c.manifold();
    let xs: Vec<Point<f64>> = o.sample(m, 4 * count, seed, 1).unwrap();
    let ys: Vec<Point<f64>> = l.sample(m, 4 * count, seed, 2).unwrap();
    let out: Vec<_> = xs
        .into_iter()
        .zip(ys)
        .filter(|(x, y)| c.check_admissible(x, y).is_ok() && c.singular_distance(x, y) > c.admissibility_margin() + clearance)
        .take(count)
        .collect();
    assert_eq!(out.len(), count, "{}: not enough admissible pairs", c.id());
    out
}

fn dist(a: &Point<f64>, b: &Point<f64>) -> f64 {
    a.coords().iter().zip(b.coords()).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

fn configs(c: &CostSpec<f64>, count: usize, seed: u64) -> Vec<SegmentConfig> {
    let (o, l) = domains(c);
    let cfgs = sample_segment_configs(c, &o, &l, count, seed, 0.05).unwrap();
    assert_eq!(cfgs.len(), count, "{}", c.id());
    cfgs
}

fn field(c: &CostSpec<f64>, cfg: &SegmentConfig, n_theta: usize) -> MountainField {
    MountainField::new(build_c_segment(c, &cfg.x_m, &cfg.y0, &cfg.y1, n_theta).unwrap()).unwrap()
}

fn derivative_fidelity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (name, c) in catalog() {
        let tol = if name == "quadratic" { 1e-8 } else { 1e-5 };
        for (k, (x, y)) in pairs(&c, 500, 11, 1e-3).iter().enumerate() {
            let b = derivatives(&c, x, y, &DerivOrder::ALL).map_err(|e| format!("{name}: {e}"))?;
            for o in DerivOrder::ALL {
                let fd = fd_oracle(&c, x, y, o, 1e-4).map_err(|e| format!("{name}: {e}"))?;
                let r = relative_residual(b.get(o).unwrap(), &fd);
                ensure(r < tol, || format!("{name} {o:?} pair {k}: residual {r:e}"))?;
                worst = worst.max(r);
            }
        }
    }
    let t = within(start, 10.0)?;
    Ok(format!("10 costs x 500 pairs x {} orders, worst residual {worst:.1e}, {t:.1}s", DerivOrder::ALL.len()))
}

fn round_trips() -> Outcome {
    let start = Instant::now();
    let (mut worst_trip, mut worst_sym): (f64, f64) = (0.0, 0.0);
    for (name, c) in catalog() {
        for (x, y) in pairs(&c, 200, 12, 0.05) {
            let p = c_exp_inverse(&c, &x, &y).map_err(|e| format!("{name}: {e}"))?;
            let back = c_exp(&c, &x, &p).map_err(|e| format!("{name}: {e}"))?.target;
            worst_trip = worst_trip.max(dist(&back, &y));
        }
        let m = c.manifold();
        for (k, (x, y)) in pairs(&c, 100, 13, 0.05).iter().enumerate() {
            let mut rng = rng_for(13, 9, k as u64);
            let eta = m.orthonormal_frame(x).tangent(&random_unit(&mut rng, m.dim()));
            let xi = m.orthonormal_frame(y).tangent(&random_unit(&mut rng, m.dim()));
            worst_sym = worst_sym.max(symmetry_residual(&c, x, y, &eta, &xi).map_err(|e| format!("{name}: {e}"))?);
        }
    }
    ensure(worst_trip < 1e-8, || format!("round trip error {worst_trip:e}"))?;
    ensure(worst_sym < 1e-8, || format!("symmetry residual {worst_sym:e}"))?;
    let t = within(start, 10.0)?;
    Ok(format!("round trip {worst_trip:.1e}, symmetry {worst_sym:.1e}, {t:.1}s"))
}

fn curvature_baseline() -> Outcome {
    let start = Instant::now();
    let opts = ScanOptions { seed: 3, n_points: 1000, n_frames: 8, ..Default::default() };
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let zero = CostSpec::perturbed_quadratic(dim, Polynomial::zero(dim), Polynomial::zero(dim)).unwrap();
        for c in [CostSpec::quadratic(dim).unwrap(), zero] {
            let (o, l) = domains(&c);
            let r = scan_a3(&c, &o, &l, &opts).map_err(|e| e.to_string())?;
            ensure(r.samples == 8000, || format!("{} dim {dim}: {} samples", c.id(), r.samples))?;
            let m = r.values.iter().map(|v| v.2.abs()).fold(0.0, f64::max);
            ensure(m < 1e-7, || format!("{} dim {dim}: |S_c| up to {m:e}", c.id()))?;
            worst = worst.max(m);
        }
    }
    let c = CostSpec::log(2).unwrap();
    let (o, l) = domains(&c);
    let r = scan_a3(&c, &o, &l, &opts).map_err(|e| e.to_string())?;
    ensure(r.min_value > 1e-4, || format!("log min {:e}", r.min_value))?;
    let t = within(start, 60.0)?;
    Ok(format!("flat baseline max |S_c| {worst:.1e}, log min {:.3}, {t:.1}s", r.min_value))
}

fn front_identity() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for c in [CostSpec::log(2).unwrap(), CostSpec::sqrt(2).unwrap()] {
        let (o, l) = domains(&c);
        let r = identity_check(&c, &o, &l, &IdentityOptions { n_configs: 100, seed: 4, ..Default::default() })
            .map_err(|e| e.to_string())?;
        ensure(r.samples >= 100, || format!("{}: {} configurations", c.id(), r.samples))?;
        let res = r.metrics["worst_residual"];
        ensure(res < 1e-3, || format!("{}: residual {res:e}", c.id()))?;
        let ratio = r.metrics.get("aggregate_ratio").copied().unwrap_or(f64::NAN);
        ensure((3.0..=5.0).contains(&ratio), || format!("{}: halving ratio {ratio}", c.id()))?;
        ensure(r.passed(), || format!("{}: {:?}", c.id(), r.notes))?;
        parts.push(format!("{} residual {res:.1e} ratio {ratio:.2}", c.id()));
    }
    let c = CostSpec::quadratic(2).unwrap();
    let (o, l) = domains(&c);
    let r = identity_check(&c, &o, &l, &IdentityOptions { n_configs: 100, seed: 4, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let res = r.metrics["worst_residual"];
    ensure(res < 1e-7, || format!("quadratic residual {res:e}"))?;
    let t = within(start, 60.0)?;
    Ok(format!("{}, quadratic {res:.1e}, {t:.1}s", parts.join(", ")))
}

fn dasm_monotonicity_equivalence() -> Outcome {
    let start = Instant::now();
    let grid = uniform_grid(DEFAULT_N_THETA);
    let opts = SlidingCheckOptions::default();
    let (mut total, mut violated) = (0, 0);
    for c in [
        CostSpec::quadratic(2).unwrap(),
        CostSpec::log(2).unwrap(),
        CostSpec::sqrt(2).unwrap(),
        CostSpec::sphere_dist_sq(2).unwrap(),
        p4(),
    ] {
        let xs: Vec<Point<f64>> = domains(&c).0.sample(c.manifold(), 200, 5, 1).unwrap();
        for (k, cfg) in configs(&c, 40, 5).iter().enumerate() {
            let d = dasm_check(&c, &cfg.x_m, &cfg.y0, &cfg.y1, &xs, &grid, &opts);
            let m = monotonicity_check(&c, &cfg.x_m, &cfg.y0, &cfg.y1, &xs, &grid, &opts);
            ensure(d.samples > 0 && m.samples > 0, || format!("{} config {k}: nothing evaluated", c.id()))?;
            ensure(d.verdict == m.verdict, || format!("{} config {k}: dasm {:?} vs monotonicity {:?}", c.id(), d.verdict, m.verdict))?;
            ensure(c.id() == p4().id() || d.passed(), || format!("{} config {k} violated", c.id()))?;
            total += 1;
            violated += usize::from(!d.passed());
        }
    }
    ensure(violated > 0, || "no violating configuration for |x-y|^4".into())?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!("{total} configurations, 0 disagreements, {violated} violated (all |x-y|^4), {t:.1}s"))
}

fn log_geometry() -> Outcome {
    let start = Instant::now();
    let c = CostSpec::log(2).unwrap();
    let (mut circle, mut sphere, mut angle): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for cfg in configs(&c, 50, 6) {
        let f = field(&c, &cfg, 101);
        let pts: Vec<Vec<f64>> = f.segment.ys.iter().map(|y| y.coords().to_vec()).collect();
        let fit = fit_circle(&pts).ok_or("circle fit failed")?;
        let through = fit.distance(cfg.x_m.coords());
        ensure(through < 1e-6, || format!("circle misses x_m by {through:e}"))?;
        circle = circle.max(fit.residual);
        angle = angle.max(fit.tangency_angle(cfg.x_m.coords(), &f.segment.direction()));
        for theta in [0.25, 0.5, 0.75] {
            let mut front: Vec<Vec<f64>> = front_sample(&f, theta, &w_grid(1, 9, 1.5))
                .map_err(|e| e.to_string())?
                .into_iter()
                .filter_map(|s| s.x_w.map(|x| x.coords().to_vec()))
                .collect();
            ensure(front.len() > 3, || "front too short".into())?;
            front.push(cfg.x_m.coords().to_vec());
            sphere = sphere.max(fit_sphere(&front).ok_or("sphere fit failed")?.residual);
        }
    }
    ensure(circle < 1e-6, || format!("circle residual {circle:e}"))?;
    ensure(sphere < 1e-5, || format!("front residual {sphere:e}"))?;
    ensure(angle < 1e-4, || format!("tangency angle {angle:e}"))?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!("50 segments, circle {circle:.1e}, fronts {sphere:.1e}, tangency {angle:.1e} rad, {t:.1}s"))
}

fn positivity() -> Outcome {
    let start = Instant::now();
    let grid = uniform_grid(11);
    let mut segments = 0;
    let mut worst_grad: f64 = 0.0;
    for (name, c) in catalog() {
        if name == "power(4)" {
            continue;
        }
        let opts = PositivityOptions { strict: name == "log", ..Default::default() };
        for (k, cfg) in configs(&c, 10, 7).iter().enumerate() {
            let r = positivity_check(&field(&c, cfg, 11), &grid, &w_grid(c.manifold().dim() - 1, 11, 0.5), &opts);
            ensure(r.samples > 0, || format!("{name} segment {k}: no reachable samples"))?;
            ensure(r.passed(), || format!("{name} segment {k}: {:?} {:?}", r.witnesses, r.notes))?;
            worst_grad = worst_grad.max(r.metrics["grad_d2f_at_x_m"]);
            segments += 1;
        }
    }
    ensure(worst_grad < 1e-7, || format!("gradient at x_m {worst_grad:e}"))?;
    let t = start.elapsed().as_secs_f64();
    Ok(format!("{segments} segments over 9 costs, log strict, max |grad d2f(x_m)| {worst_grad:.1e}, {t:.1}s"))
}

fn potentials(c: &CostSpec<f64>, count: usize, n: usize, seed: u64) -> Vec<(DiscreteCPotential, Point<f64>)> {
    let (o, l) = domains(c);
    sample_potentials(c, &o, &l, count, n, seed, 0.05)
        .unwrap()
        .into_iter()
        .map(|k| (k.potential(c, &o).unwrap(), k.x_m))
        .collect()
}

fn csis() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for c in [
        CostSpec::quadratic(2).unwrap(),
        CostSpec::log(2).unwrap(),
        CostSpec::sqrt(2).unwrap(),
        CostSpec::sphere_dist_sq(2).unwrap(),
    ] {
        let (o, _) = domains(&c);
        let zs = o.grid(c.manifold(), 33).unwrap();
        let extra: Vec<Point<f64>> = o.sample(c.manifold(), 8, 8, 1).unwrap();
        let mut count = 0;
        for n in [2, 3] {
            let batch = potentials(&c, 50, n, 8);
            ensure(batch.len() == 50, || format!("{}: {} potentials with {n} mountains", c.id(), batch.len()))?;
            for (k, (phi, x_m)) in batch.iter().enumerate() {
                let xs: Vec<Point<f64>> = std::iter::once(x_m.clone()).chain(extra.iter().cloned()).collect();
                let r = csis_check(phi, &xs, &zs, &CsisOptions { seed: k as u64, ..Default::default() });
                ensure(r.verdict == Verdict::Pass, || format!("{} potential {k} ({n} mountains): {:?}", c.id(), r.witnesses))?;
                count += 1;
            }
        }
        parts.push(format!("{} {count}", c.id()));
    }
    let c = p4();
    let zs = domains(&c).0.grid(c.manifold(), 41).unwrap();
    let (mut witnesses, mut disconnected) = (0, 0);
    for (k, (phi, x_m)) in potentials(&c, 10, 2, 9).iter().enumerate() {
        let opts = CsisOptions { seed: k as u64, refine_per_axis: Some(400), ..Default::default() };
        let r = csis_check(phi, std::slice::from_ref(x_m), &zs, &opts);
        if r.verdict != Verdict::Violated {
            continue;
        }
        let refined = r.witnesses[0].values["margin_refined"][0];
        if refined >= -opts.tol {
            continue;
        }
        witnesses += 1;
        let conn = connectivity_check(phi, x_m, &ConnectivityOptions::default()).map_err(|e| e.to_string())?;
        ensure(conn.verdict == Verdict::Violated, || format!("potential {k}: contact set looks connected"))?;
        disconnected += 1;
    }
    ensure(witnesses >= 1, || "no reproducible |x-y|^4 witness".into())?;
    let t = within(start, 120.0)?;
    Ok(format!(
        "pass on {}; |x-y|^4: {witnesses} witnesses persist at 10x grid, {disconnected} disconnected contact sets, {t:.1}s",
        parts.join(", ")
    ))
}

const CAMPAIGNS: [&str; 2] = [
    r#"{"seed": 11, "cost": {"kind": "log", "dim": 2},
        "checks": [{"check": "scan_a3", "n_points": 200}, {"check": "dasm", "n_configs": 4, "n_x": 100},
                   {"check": "monotonicity", "n_configs": 4, "n_x": 100}, {"check": "identity", "n_configs": 20},
                   {"check": "positivity", "n_configs": 3}, {"check": "front_track", "n_configs": 3},
                   {"check": "csis", "n_potentials": 4, "n_mountains": 3}, {"check": "connectivity", "n_potentials": 3}]}"#,
    r#"{"seed": 12, "cost": {"kind": "power", "dim": 2, "exponent": 4, "sign": "plus", "tag": "exploratory"},
        "checks": [{"check": "scan_a3", "n_points": 200}, {"check": "dasm", "n_configs": 4, "n_x": 100},
                   {"check": "csis", "n_potentials": 4}, {"check": "connectivity", "n_potentials": 3}]}"#,
];

fn run_cli(cfg: &Path, out: &Path, threads: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_mtwkit"))
        .args(["verify", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
        .env("MTWKIT_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(matches!(o.status.code(), Some(0 | 1)), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let mut bytes = std::fs::read(&p).unwrap();
            if name.ends_with(".json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                for r in v["reports"].as_array_mut().unwrap() {
                    r["wall_time_s"] = 0.0.into();
                }
                bytes = serde_json::to_vec_pretty(&v).unwrap();
            }
            (name, bytes)
        })
        .collect();
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut n_files = 0;
    for (k, body) in CAMPAIGNS.iter().enumerate() {
        let cfg = tmp.path().join(format!("c{k}.json"));
        std::fs::write(&cfg, body).map_err(|e| e.to_string())?;
        let runs: Vec<_> = [("1", "a"), ("1", "b"), ("4", "c"), ("0", "d")]
            .iter()
            .filter(|(t, _)| *t != "0")
            .map(|(t, d)| run_cli(&cfg, &tmp.path().join(format!("{k}{d}")), t))
            .collect::<Result<_, _>>()?;
        for r in &runs[1..] {
            ensure(r == &runs[0], || format!("campaign {k}: outputs differ between runs"))?;
        }
        n_files += runs[0].len();
    }
    Ok(format!("{} campaigns, {n_files} files byte-identical across reruns and 1 vs 4 threads", CAMPAIGNS.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("derivative fidelity", derivative_fidelity),
        ("exponential-map round trips", round_trips),
        ("curvature baseline", curvature_baseline),
        ("front identity", front_identity),
        ("DASM / monotonicity equivalence", dasm_monotonicity_equivalence),
        ("log-cost geometry", log_geometry),
        ("positivity", positivity),
        ("CSIS and connectivity", csis),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", k + 1),
            Err(why) => {
                println!("criterion {} FAIL {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
