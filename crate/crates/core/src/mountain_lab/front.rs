//! Level sets `S_theta` of `d/dtheta f_theta`, their motion, and the
//! identity linking `d²/dtheta² f_theta` on them to the c-sectional curvature.
//!
//! Fronts are parametrized as `x_w = c*-Exp_{y_theta}(q_theta + w)` with
//! `q_theta = -grad_y c(x_m, y_theta)` and `w` orthogonal to `dy/dtheta`, so
//! that `w = 0` gives `x_m`.

use rayon::prelude::*;

use super::field::{MountainField, MountainValues, ThetaNode};
use crate::cost_catalog::{derivatives, DerivOrder};
use crate::error::{Error, Result};
use crate::geometry::{Point, TangentVector};
use crate::linalg::{add, axpy, dot, norm, scale, sub};
use crate::mtw_curvature::{c_sectional_curvature, CurvatureOptions};
use crate::report::{SampleTable, Stopwatch, VerificationReport, Witness};
use crate::transport_maps::{cstar_exp, DomainSpec};

/// Intermediate solves along `q_theta + s w` used to decide reachability.
pub const REACHABILITY_PROBES: usize = 16;
/// Default step of the `w` differences.
pub const DEFAULT_H_W: f64 = 1e-3;
/// Step used for `D_w x_w` in the orthogonality diagnostic.
const ORTHO_H: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct FrontSample {
    pub theta: f64,
    /// Tangent at `y_theta`, orthogonal to `dy/dtheta`.
    pub w: TangentVector<f64>,
    pub x_w: Option<Point<f64>>,
    /// `d/dtheta p_theta(x_w) = -D²_xy c(x_w, y_theta) dy/dtheta`, tangent at `x_w`.
    pub pdot: Option<TangentVector<f64>>,
    pub reachable: bool,
    pub values: Option<MountainValues>,
    /// `max |cos angle(pdot, D_w x_w)|` over a basis of `W_theta`. Normalized
    /// so that far-out front points, where `D_w x_w` is large, are judged on
    /// the same scale as those near `x_m`.
    pub orthogonality: Option<f64>,
}

/// `q_theta` as an ambient vector at `y_theta`.
pub fn q_theta(node: &ThetaNode) -> Vec<f64> {
    scale(&node.kin.frame_y.ambient(&node.dy_m), -1.0)
}

/// Orthonormal basis (ambient, at `y_theta`) of `W_theta = {w : w · dy/dtheta = 0}`.
pub fn w_basis(node: &ThetaNode) -> Vec<Vec<f64>> {
    let ydot = node.kin.frame_y.ambient(&node.kin.ydot);
    let u = scale(&ydot, 1.0 / norm(&ydot));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for e in node.kin.frame_y.vectors() {
        let mut v = axpy(e, -dot(e, &u), &u);
        for b in &basis {
            v = axpy(&v, -dot(&v, b), b);
        }
        let len = norm(&v);
        if len > 1e-8 {
            basis.push(scale(&v, 1.0 / len));
        }
        if basis.len() + 1 == node.kin.frame_y.dim() {
            break;
        }
    }
    basis
}

/// Tensor grid of coefficient vectors in `[-radius, radius]^k`, `per_axis`
/// points per axis (odd counts include `w = 0`).
pub fn w_grid(k: usize, per_axis: usize, radius: f64) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(1);
    let coord = |i: usize| if per_axis == 1 { 0.0 } else { -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64 };
    let total = per_axis.pow(k as u32);
    (0..total)
        .map(|mut idx| {
            (0..k)
                .map(|_| {
                    let c = coord(idx % per_axis);
                    idx /= per_axis;
                    c
                })
                .collect()
        })
        .collect()
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64], dim: usize) -> Vec<f64> {
    basis.iter().zip(coeffs).fold(vec![0.0; dim], |acc, (b, &a)| axpy(&acc, a, b))
}

/// `x_w`, failing with `Unreachable` if any probe along `q + s w` fails.
pub fn front_point(field: &MountainField, node: &ThetaNode, w: &[f64]) -> Result<Point<f64>> {
    let q = q_theta(node);
    let y = &node.kin.y;
    let mut last = None;
    for s in 1..=REACHABILITY_PROBES {
        let t = s as f64 / REACHABILITY_PROBES as f64;
        let v = TangentVector::project(y, &axpy(&q, t, w));
        match cstar_exp(&field.cost, y, &v) {
            Ok(r) => last = Some(r.target),
            Err(_) => return Err(Error::Unreachable),
        }
    }
    last.ok_or(Error::Unreachable)
}

/// `x_w` from a single solve, for stencils around an already reachable `w`.
fn front_point_direct(field: &MountainField, node: &ThetaNode, w: &[f64]) -> Result<Point<f64>> {
    let v = TangentVector::project(&node.kin.y, &add(&q_theta(node), w));
    cstar_exp(&field.cost, &node.kin.y, &v).map(|r| r.target).map_err(|_| Error::Unreachable)
}

/// `d/dtheta p_theta(x)` as a tangent vector at `x`.
pub fn pdot_at(field: &MountainField, node: &ThetaNode, x: &Point<f64>) -> Result<TangentVector<f64>> {
    let b = derivatives(&field.cost, x, &node.kin.y, &[DerivOrder::HessXY])?;
    let v = scale(&b.hess_xy().mul_vec(&node.kin.ydot), -1.0);
    Ok(b.frame_x.tangent(&v))
}

/// Central difference of `w -> x_w` along `eta`, projected to `T_{x_w}`.
fn dw_x(field: &MountainField, node: &ThetaNode, x_w: &Point<f64>, w: &[f64], eta: &[f64], h: f64) -> Result<TangentVector<f64>> {
    let xp = front_point_direct(field, node, &axpy(w, h, eta))?;
    let xm = front_point_direct(field, node, &axpy(w, -h, eta))?;
    Ok(TangentVector::project(x_w, &scale(&sub(xp.coords(), xm.coords()), 0.5 / h)))
}

fn sample_one(field: &MountainField, node: &ThetaNode, basis: &[Vec<f64>], w: Vec<f64>) -> FrontSample {
    let y = &node.kin.y;
    let mut s = FrontSample {
        theta: node.kin.theta,
        w: TangentVector::project(y, &w),
        x_w: None,
        pdot: None,
        reachable: false,
        values: None,
        orthogonality: None,
    };
    let Ok(x) = front_point(field, node, &w) else { return s };
    s.reachable = true;
    s.values = field.values_at(node, &x).ok();
    s.pdot = pdot_at(field, node, &x).ok();
    if let Some(p) = &s.pdot {
        let worst = basis
            .iter()
            .map(|b| {
                dw_x(field, node, &x, &w, b, ORTHO_H).map(|d| dot(d.components(), p.components()).abs() / (d.norm() * p.norm()))
            })
            .collect::<Result<Vec<_>>>();
        s.orthogonality = worst.ok().map(|v| v.into_iter().fold(0.0, f64::max));
    }
    s.x_w = Some(x);
    s
}

/// Samples `S_theta` at `w = sum_k w_grid[i][k] e_k` for an orthonormal basis
/// `e_k` of `W_theta`.
pub fn front_sample(field: &MountainField, theta: f64, w_grid: &[Vec<f64>]) -> Result<Vec<FrontSample>> {
    let node = field.node(theta)?;
    Ok(front_sample_at(field, &node, w_grid))
}

pub(crate) fn front_sample_at(field: &MountainField, node: &ThetaNode, w_grid: &[Vec<f64>]) -> Vec<FrontSample> {
    let basis = w_basis(node);
    let dim = node.kin.y.coords().len();
    w_grid
        .par_iter()
        .map(|coeffs| sample_one(field, node, &basis, combine(&basis, coeffs, dim)))
        .collect()
}

/// Normal speed `(d²/dtheta² f)(x) / |grad_x d/dtheta f(x)|` of `S_theta` at `x`.
pub fn expansion_rate(field: &MountainField, theta: f64, x: &Point<f64>) -> Result<f64> {
    let node = field.node(theta)?;
    expansion_rate_at(field, &node, x)
}

fn expansion_rate_at(field: &MountainField, node: &ThetaNode, x: &Point<f64>) -> Result<f64> {
    let v = field.values_at(node, x)?;
    let g = pdot_at(field, node, x)?.norm();
    if !(g > 1e-14) {
        return Err(Error::VanishingGradient);
    }
    Ok(v.d2f / g)
}

/// `dX/dt = -(d²f/|grad g|²) grad g` with `g = d/dtheta f_theta` at `theta = t`.
fn velocity(field: &MountainField, t: f64, x: &Point<f64>) -> Result<Vec<f64>> {
    let node = field.node(t)?;
    let v = field.values_at(&node, x)?;
    let p = pdot_at(field, &node, x)?;
    let g2 = dot(p.components(), p.components());
    if !(g2 > 1e-28) {
        return Err(Error::VanishingGradient);
    }
    Ok(scale(p.components(), -v.d2f / g2))
}

/// Fourth-order Runge-Kutta tracking of a point on the moving front from
/// `theta0` to `theta1`. Returns `(t, X(t))` at every step.
pub fn front_ode_track(
    field: &MountainField,
    x0: &Point<f64>,
    theta0: f64,
    theta1: f64,
    dt: f64,
    omega: Option<&DomainSpec>,
) -> Result<Vec<(f64, Point<f64>)>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let g0 = field.values(theta0, x0)?.df;
    if g0.abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("x0 is not on the front (|g| = {g0:e})")));
    }
    let m = field.cost.manifold();
    let steps = ((theta1 - theta0).abs() / dt).ceil().max(1.0) as usize;
    let h = (theta1 - theta0) / steps as f64;
    let mut out = vec![(theta0, x0.clone())];
    let mut x = x0.clone();
    for k in 0..steps {
        let t = theta0 + k as f64 * h;
        let left = |_| Error::TrajectoryLeftDomain { t };
        let stage = |x: &Point<f64>, v: &[f64], s: f64| m.project_point(axpy(x.coords(), s, v)).map_err(left);
        let eval = |t: f64, x: &Point<f64>| match velocity(field, t, x) {
            Err(e @ Error::SingularPair { .. }) => Err(e),
            r => r.map_err(left),
        };
        let k1 = eval(t, &x)?;
        let k2 = eval(t + h / 2.0, &stage(&x, &k1, h / 2.0)?)?;
        let k3 = eval(t + h / 2.0, &stage(&x, &k2, h / 2.0)?)?;
        let k4 = eval(t + h, &stage(&x, &k3, h)?)?;
        let incr: Vec<f64> = (0..k1.len()).map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect();
        x = stage(&x, &incr, h)?;
        let t1 = theta0 + (k + 1) as f64 * h;
        if omega.is_some_and(|o| !o.contains(&x)) {
            return Err(Error::TrajectoryLeftDomain { t: t1 });
        }
        out.push((t1, x.clone()));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma62Options {
    pub h_w: f64,
    pub h_t: f64,
}

impl Default for Lemma62Options {
    fn default() -> Self {
        Self { h_w: DEFAULT_H_W, h_t: crate::mtw_curvature::DEFAULT_H_T }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma62Result {
    /// Second difference of `w -> d²/dtheta² f_theta(x_w)` along `eta`.
    pub lhs: f64,
    /// `S_c(x_w, y_theta)(D_w x_w, pdot_theta(x_w))`.
    pub rhs: f64,
    /// `|lhs - rhs| / (1 + |rhs|)`.
    pub residual: f64,
}

/// Both sides of `D²_ww d²/dtheta² f_theta(x_w) = S_c(x_w, y_theta)(D_w x_w, pdot_theta(x_w))`.
/// `w` and `eta` are ambient vectors at `y_theta` orthogonal to `dy/dtheta`.
pub fn lemma62_check(field: &MountainField, theta: f64, w: &[f64], eta: &[f64], opts: Lemma62Options) -> Result<Lemma62Result> {
    let node = field.node(theta)?;
    lemma62_at(field, &node, w, eta, opts)
}

pub(crate) fn lemma62_at(
    field: &MountainField,
    node: &ThetaNode,
    w: &[f64],
    eta: &[f64],
    opts: Lemma62Options,
) -> Result<Lemma62Result> {
    let h = opts.h_w;
    let x_w = front_point(field, node, w)?;
    let d2f = |x: &Point<f64>| field.values_at(node, x).map(|v| v.d2f);
    let xp = front_point_direct(field, node, &axpy(w, h, eta))?;
    let xm = front_point_direct(field, node, &axpy(w, -h, eta))?;
    let lhs = (d2f(&xp)? - 2.0 * d2f(&x_w)? + d2f(&xm)?) / (h * h);
    let dx = TangentVector::project(&x_w, &scale(&sub(xp.coords(), xm.coords()), 0.5 / h));
    let pdot = pdot_at(field, node, &x_w)?;
    let rhs = c_sectional_curvature(
        &field.cost,
        &x_w,
        &node.kin.y,
        &dx,
        &pdot,
        CurvatureOptions { h_t: opts.h_t, richardson: false },
    )?;
    Ok(Lemma62Result { lhs, rhs, residual: (lhs - rhs).abs() / (1.0 + rhs.abs()) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityOptions {
    /// `d²f >= -tol` on every reachable sample.
    pub tol: f64,
    /// Strict variant: `d²f > margin` when `|x_w - x_m| > exclusion`.
    pub strict: bool,
    pub margin: f64,
    pub exclusion: f64,
    /// Largest acceptable `|grad_x d²f(x_m)|`.
    pub grad_tol: f64,
    pub table: bool,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        Self { tol: 1e-8, strict: false, margin: 1e-8, exclusion: 1e-2, grad_tol: 1e-7, table: false }
    }
}

/// `|grad_x d²/dtheta² f_theta(x_m)|` by five-point central differences in
/// normal coordinates at `x_m`.
pub fn d2f_gradient_at_xm(field: &MountainField, node: &ThetaNode, h: f64) -> Result<f64> {
    let m = field.cost.manifold();
    let frame = m.orthonormal_frame(&field.segment.x_m);
    let n = frame.dim();
    let mut g = vec![0.0; n];
    for (i, gi) in g.iter_mut().enumerate() {
        let at = |s: f64| {
            let mut a = vec![0.0; n];
            a[i] = s;
            field.values_at(node, &frame.chart(&a)).map(|v| v.d2f)
        };
        *gi = (8.0 * (at(h)? - at(-h)?) - (at(2.0 * h)? - at(-2.0 * h)?)) / (12.0 * h);
    }
    Ok(norm(&g))
}

/// `d²/dtheta² f_theta >= 0` on reachable front samples at every grid `theta`.
pub fn positivity_check(
    field: &MountainField,
    theta_grid: &[f64],
    w_grid: &[Vec<f64>],
    opts: &PositivityOptions,
) -> VerificationReport {
    let clock = Stopwatch::start();
    let mut r = VerificationReport::new(if opts.strict { "positivity_strict" } else { "positivity" }, field.cost.id());
    let x_m = &field.segment.x_m;
    let mut table = opts.table.then(|| SampleTable {
        columns: super::checks::table_columns(field.cost.manifold().ambient_dim()),
        rows: Vec::new(),
    });
    let mut grad_max: f64 = 0.0;
    let mut unreachable = 0u64;
    let mut worst: Option<(f64, FrontSample)> = None;
    for &theta in theta_grid {
        let node = match field.node(theta) {
            Ok(n) => n,
            Err(e) => {
                r.notes.push(format!("theta = {theta}: {e}"));
                r.skipped += w_grid.len() as u64;
                continue;
            }
        };
        match d2f_gradient_at_xm(field, &node, 1e-4) {
            Ok(g) => grad_max = grad_max.max(g),
            Err(e) => r.notes.push(format!("gradient at x_m unavailable at theta = {theta}: {e}")),
        }
        for s in front_sample_at(field, &node, w_grid) {
            let (Some(x), Some(v)) = (&s.x_w, s.values) else {
                if !s.reachable {
                    unreachable += 1;
                }
                r.skipped += 1;
                continue;
            };
            r.samples += 1;
            let away = norm(&sub(x.coords(), x_m.coords())) > opts.exclusion;
            let m = if opts.strict && away { v.d2f - opts.margin } else { v.d2f + opts.tol };
            r.observe_margin(m);
            if m < 0.0 || (opts.strict && away && m == 0.0) {
                r.failures += 1;
            }
            if let Some(t) = table.as_mut() {
                let mut row = vec![theta];
                row.extend_from_slice(x.coords());
                row.extend([v.f, v.df, v.d2f, m, 1.0]);
                t.rows.push(row);
            }
            if worst.as_ref().is_none_or(|w| m < w.0) {
                worst = Some((m, s));
            }
        }
    }
    r.metric("grad_d2f_at_x_m", grad_max);
    r.metric("unreachable", unreachable as f64);
    if grad_max > opts.grad_tol {
        r.failures += 1;
        r.notes.push(format!("|grad d2f(x_m)| = {grad_max:e} exceeds {:e}", opts.grad_tol));
    }
    if let Some((m, s)) = worst {
        let x = s.x_w.as_ref().expect("evaluated samples carry x_w");
        let v = s.values.expect("evaluated samples carry values");
        r.witnesses.push(
            Witness::new(if m < 0.0 { "negative second variation on a front" } else { "smallest second variation on a front" })
                .with("x_m", x_m.coords().to_vec())
                .with("y0", field.segment.y0.coords().to_vec())
                .with("y1", field.segment.y1.coords().to_vec())
                .with("x_w", x.coords().to_vec())
                .with_scalar("theta", s.theta)
                .with_scalar("d2f", v.d2f)
                .with_scalar("margin", m),
        );
    }
    r.table = table;
    clock.stamp(&mut r);
    r.finalize()
}
