//! c-sectional curvature and empirical A3W/A3S scans.
//!
//! `S_c(x,y)(eta, xi) = d²/dt² [-D²_xx c](x, c-Exp_x(p + t xi))(eta, eta)`
//! at `t = 0`, with `p = -grad_x c(x, y)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost_catalog::{derivatives, CostSpec, DerivOrder};
use crate::error::{Error, Result};
use crate::geometry::{Point, TangentVector};
use crate::linalg::{axpy, dot, norm, scale, Lu};
use crate::report::{SampleTable, VerificationReport, Witness};
use crate::sampling::{random_unit, rng_for, streams};
use crate::scalar::{lit, Real};
use crate::transport_maps::{c_exp, c_exp_inverse, DomainSpec};

pub const DEFAULT_H_T: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MARGIN: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureOptions {
    pub h_t: f64,
    pub richardson: bool,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self { h_t: DEFAULT_H_T, richardson: false }
    }
}

/// `t -> [-D²_xx c](x, c-Exp_x(p + t xi))(eta, eta)`.
fn hessian_along<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    p: &[T],
    eta: &[T],
    xi: &[T],
    t: T,
) -> Result<T> {
    let pt = TangentVector::project(x, &axpy(p, t, xi));
    let y = c_exp(c, x, &pt)?.target;
    let b = derivatives(c, x, &y, &[DerivOrder::HessXX])?;
    let e = b.frame_x.coords_of(eta);
    Ok(-b.hess_xx().bilinear(&e, &e))
}

fn second_difference<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    p: &[T],
    eta: &[T],
    xi: &[T],
    h: T,
    g0: T,
) -> Result<T> {
    let gp = hessian_along(c, x, p, eta, xi, h)?;
    let gm = hessian_along(c, x, p, eta, xi, -h)?;
    Ok((gp - lit::<T>(2.0) * g0 + gm) / (h * h))
}

/// Finite-difference c-sectional curvature. `eta`, `xi` are tangent at `x`
/// and enter bilinearly (no normalization).
pub fn c_sectional_curvature<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    y: &Point<T>,
    eta: &TangentVector<T>,
    xi: &TangentVector<T>,
    opts: CurvatureOptions,
) -> Result<T> {
    if eta.base() != x || xi.base() != x {
        return Err(Error::BaseMismatch);
    }
    let p = c_exp_inverse(c, x, y)?;
    let pc = p.components();
    let b = derivatives(c, x, y, &[DerivOrder::HessXX])?;
    let e = b.frame_x.coords_of(eta.components());
    let g0 = -b.hess_xx().bilinear(&e, &e);
    let h = lit::<T>(opts.h_t);
    let d = second_difference(c, x, pc, eta.components(), xi.components(), h, g0)?;
    if !opts.richardson {
        return Ok(d);
    }
    let d2 = second_difference(c, x, pc, eta.components(), xi.components(), h / lit(2.0), g0)?;
    Ok((lit::<T>(4.0) * d2 - d) / lit(3.0))
}

/// The same quantity from the fourth-order derivative blocks:
/// with `C = D²_xy c`, `y' = -C^{-1} xi`, `y'' = -C^{-1} D_x D²_yy c[y', y']`,
/// `S = -D²_xx D²_yy c[eta, eta, y', y'] - D²_xx D_y c[eta, eta, y'']`.
pub fn c_sectional_curvature_analytic<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    y: &Point<T>,
    eta: &TangentVector<T>,
    xi: &TangentVector<T>,
) -> Result<T> {
    let b = derivatives(c, x, y, &[DerivOrder::HessXY, DerivOrder::DxDyy, DerivOrder::DxxDy, DerivOrder::DxxDyy])?;
    let n = c.dim();
    let e = b.frame_x.coords_of(eta.components());
    let s = b.frame_x.coords_of(xi.components());
    let lu = Lu::factor(&b.hess_xy()).ok_or(Error::SingularJacobian)?;
    let y1 = scale(&lu.solve(&s), -T::one());
    let t3 = b.dx_dyy();
    let rhs: Vec<T> = (0..n)
        .map(|k| {
            let mut acc = T::zero();
            for a in 0..n {
                for bb in 0..n {
                    acc = acc + t3.get(&[k, a, bb]) * y1[a] * y1[bb];
                }
            }
            acc
        })
        .collect();
    let y2 = scale(&lu.solve(&rhs), -T::one());
    let (t4, t3x) = (b.dxx_dyy(), b.dxx_dy());
    let mut out = T::zero();
    for i in 0..n {
        for j in 0..n {
            let ee = e[i] * e[j];
            for a in 0..n {
                out = out - t3x.get(&[i, j, a]) * ee * y2[a];
                for bb in 0..n {
                    out = out - t4.get(&[i, j, a, bb]) * ee * y1[a] * y1[bb];
                }
            }
        }
    }
    Ok(out)
}

/// One evaluated configuration with unit orthogonal `eta`, `xi`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSample {
    pub x: Point<f64>,
    pub y: Point<f64>,
    pub eta: TangentVector<f64>,
    pub xi: TangentVector<f64>,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A3Verdict {
    /// `min > margin`
    A3sConsistent,
    /// `min >= -tol`
    A3wConsistent,
    Violated,
    /// nothing could be evaluated
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct A3Report {
    pub samples: usize,
    pub skipped: usize,
    pub min_value: f64,
    pub argmin: Option<CurvatureSample>,
    pub verdict: A3Verdict,
    /// Largest `C_0` with `S_c >= C_0` on every sample (the minimum itself).
    pub c0_estimate: f64,
    pub tol: f64,
    pub margin: f64,
    /// `(pair index, frame index, value)` for every evaluated sample.
    pub values: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub n_points: usize,
    pub n_frames: usize,
    pub tol: f64,
    pub margin: f64,
    pub seed: u64,
    pub curvature: CurvatureOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            n_points: 1000,
            n_frames: 8,
            tol: DEFAULT_TOL,
            margin: DEFAULT_MARGIN,
            seed: 0,
            curvature: CurvatureOptions::default(),
        }
    }
}

/// Unit `eta` and a unit `xi` orthogonal to it, uniformly distributed.
pub fn orthogonal_pair<R: rand::Rng>(
    rng: &mut R,
    frame: &crate::geometry::Frame<f64>,
) -> (TangentVector<f64>, TangentVector<f64>) {
    let n = frame.dim();
    let eta = random_unit(rng, n);
    let xi = loop {
        let v = random_unit(rng, n);
        let w = axpy(&v, -dot(&v, &eta), &eta);
        let len = norm(&w);
        if len > 1e-6 {
            break scale(&w, 1.0 / len);
        }
    };
    (frame.tangent(&eta), frame.tangent(&xi))
}

/// Evaluates the curvature over quasi-random pairs and random orthogonal
/// frames; deterministic for a fixed seed regardless of thread count.
pub fn scan_a3(c: &CostSpec<f64>, omega: &DomainSpec, lambda: &DomainSpec, opts: &ScanOptions) -> Result<A3Report> {
    if opts.n_points == 0 || opts.n_frames == 0 {
        return Err(Error::InvalidArgument("sampling budgets must be >= 1".into()));
    }
    if c.dim() < 2 {
        return Err(Error::InvalidArgument("orthogonal pairs need dimension >= 2".into()));
    }
    let m = c.manifold();
    let xs: Vec<Point<f64>> = omega.sample(m, opts.n_points, opts.seed, streams::OMEGA)?;
    let ys: Vec<Point<f64>> = lambda.sample(m, opts.n_points, opts.seed, streams::LAMBDA)?;

    let per_pair: Vec<Vec<Option<CurvatureSample>>> = (0..opts.n_points)
        .into_par_iter()
        .map(|k| {
            let (x, y) = (&xs[k], &ys[k]);
            let frame = m.orthonormal_frame(x);
            let mut rng = rng_for(opts.seed, streams::FRAMES, k as u64);
            (0..opts.n_frames)
                .map(|_| {
                    let (eta, xi) = orthogonal_pair(&mut rng, &frame);
                    c.check_admissible(x, y).ok()?;
                    let value = c_sectional_curvature(c, x, y, &eta, &xi, opts.curvature).ok()?;
                    value.is_finite().then(|| CurvatureSample { x: x.clone(), y: y.clone(), eta, xi, value })
                })
                .collect()
        })
        .collect();

    let mut samples = 0;
    let mut skipped = 0;
    let mut best: Option<CurvatureSample> = None;
    let mut values = Vec::new();
    for (k, row) in per_pair.into_iter().enumerate() {
        for (f, s) in row.into_iter().enumerate() {
            match s {
                None => skipped += 1,
                Some(s) => {
                    samples += 1;
                    values.push((k, f, s.value));
                    if best.as_ref().is_none_or(|b| s.value < b.value) {
                        best = Some(s);
                    }
                }
            }
        }
    }
    let min_value = best.as_ref().map_or(f64::NAN, |b| b.value);
    let verdict = if samples == 0 {
        A3Verdict::Inconclusive
    } else if min_value < -opts.tol {
        A3Verdict::Violated
    } else if min_value > opts.margin {
        A3Verdict::A3sConsistent
    } else {
        A3Verdict::A3wConsistent
    };
    Ok(A3Report {
        samples,
        skipped,
        min_value,
        argmin: best,
        verdict,
        c0_estimate: min_value,
        tol: opts.tol,
        margin: opts.margin,
        values,
    })
}

impl A3Report {
    /// Re-evaluates the argmin with the step halved and with the analytic
    /// pipeline, returning `(halved, analytic)`.
    pub fn reverify(&self, c: &CostSpec<f64>, opts: CurvatureOptions) -> Option<(f64, f64)> {
        let s = self.argmin.as_ref()?;
        let halved = CurvatureOptions { h_t: opts.h_t / 2.0, ..opts };
        let a = c_sectional_curvature(c, &s.x, &s.y, &s.eta, &s.xi, halved).ok()?;
        let b = c_sectional_curvature_analytic(c, &s.x, &s.y, &s.eta, &s.xi).ok()?;
        Some((a, b))
    }

    /// Summary in the common report format. A3S/A3W-consistent scans pass.
    pub fn to_report(&self, c: &CostSpec<f64>, opts: &ScanOptions) -> VerificationReport {
        let mut r = VerificationReport::new("curvature_scan", c.id());
        r.samples = self.samples as u64;
        r.skipped = self.skipped as u64;
        r.seed = Some(opts.seed);
        if self.samples > 0 {
            r.observe_margin(self.min_value + self.tol);
            r.metric("min_value", self.min_value);
            r.metric("c0_estimate", self.c0_estimate);
        }
        r.metric("tol", self.tol);
        r.metric("margin", self.margin);
        let label = match self.verdict {
            A3Verdict::A3sConsistent => "a3s_consistent",
            A3Verdict::A3wConsistent => "a3w_consistent",
            A3Verdict::Violated => "violated",
            A3Verdict::Inconclusive => "inconclusive",
        };
        r.notes.push(format!("a3_verdict: {label}"));
        if self.verdict == A3Verdict::Violated {
            r.failures = self.values.iter().filter(|v| v.2 < -self.tol).count() as u64;
        }
        if let Some(s) = &self.argmin {
            let mut w = Witness::new(if self.verdict == A3Verdict::Violated {
                "negative c-sectional curvature"
            } else {
                "minimum c-sectional curvature"
            })
            .with("x", s.x.coords().to_vec())
            .with("y", s.y.coords().to_vec())
            .with("eta", s.eta.components().to_vec())
            .with("xi", s.xi.components().to_vec())
            .with_scalar("value", s.value);
            if let Some((halved, analytic)) = self.reverify(c, opts.curvature) {
                w = w.with_scalar("value_half_step", halved).with_scalar("value_analytic", analytic);
            }
            r.witnesses.push(w);
        }
        let mut t = SampleTable::new(&["pair", "frame", "value"]);
        t.rows = self.values.iter().map(|&(k, f, v)| vec![k as f64, f as f64, v]).collect();
        r.table = Some(t);
        let mut r = r.finalize();
        if self.samples == 0 {
            r.verdict = crate::report::Verdict::Inconclusive;
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Manifold;

    fn e2(a: f64, b: f64) -> Point<f64> {
        Manifold::Euclidean(2).point(vec![a, b]).unwrap()
    }

    #[test]
    fn quadratic_is_flat() {
        let c = CostSpec::<f64>::quadratic(2).unwrap();
        let x = e2(0.1, 0.3);
        let y = e2(-0.7, 0.2);
        let eta = TangentVector::new(&x, vec![1.0, 0.0]).unwrap();
        let xi = TangentVector::new(&x, vec![0.0, 1.0]).unwrap();
        let v = c_sectional_curvature(&c, &x, &y, &eta, &xi, CurvatureOptions::default()).unwrap();
        assert!(v.abs() < 1e-7);
    }

    #[test]
    fn log_cost_value_is_two_for_unit_orthogonal_pair() {
        // -D²_xx c = |p|^2 I - 2 p p^T as a function of p, so S = 2|eta|^2|xi|^2 - 4 (eta.xi)^2
        let c = CostSpec::<f64>::log(2).unwrap();
        let x = e2(0.0, 0.0);
        let y = e2(1.0, 0.0);
        let eta = TangentVector::new(&x, vec![0.0, 1.0]).unwrap();
        let xi = TangentVector::new(&x, vec![1.0, 0.0]).unwrap();
        let v = c_sectional_curvature(&c, &x, &y, &eta, &xi, CurvatureOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
        let a = c_sectional_curvature_analytic(&c, &x, &y, &eta, &xi).unwrap();
        assert!((a - 2.0).abs() < 1e-10, "{a}");
    }
}
