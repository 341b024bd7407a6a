use crate::cost_catalog::{derivatives, CostKind, CostSpec, DerivOrder};
use crate::error::{Error, Result};
use crate::geometry::{Frame, Point, TangentVector};
use crate::linalg::{axpy, dot, norm, scale, sub, Lu, Matrix};
use crate::transport_maps::{c_exp, c_exp_inverse, DomainSpec};

/// Offset applied to a logarithmic-cost segment whose `[p0, p1]` passes
/// through the origin (where `c-Exp` is undefined).
pub const LOG_COLLINEAR_OFFSET: f64 = 1e-6;
/// Accuracy demanded of every `y_theta`.
pub const NODE_RESIDUAL_TOL: f64 = 1e-8;
/// `|dy/dtheta|` below this is treated as an A2 failure.
pub const MIN_YDOT: f64 = 1e-8;

/// `y_theta = c-Exp_{x_m}((1-theta) p0 + theta p1)` sampled on a grid.
#[derive(Clone, Debug)]
pub struct CSegment {
    pub cost: CostSpec<f64>,
    pub x_m: Point<f64>,
    pub y0: Point<f64>,
    pub y1: Point<f64>,
    pub p0: TangentVector<f64>,
    pub p1: TangentVector<f64>,
    pub theta_grid: Vec<f64>,
    pub ys: Vec<Point<f64>>,
    /// Offset used to move `[p0, p1]` off the origin, if any.
    pub offset: Option<f64>,
}

/// First and second `theta`-derivatives of `y_theta`.
#[derive(Clone, Debug)]
pub struct SegmentKinematics {
    pub theta: f64,
    pub y: Point<f64>,
    pub frame_y: Frame<f64>,
    /// `dy/dtheta` and `d²y/dtheta²` in coordinates of `frame_y`.
    pub ydot: Vec<f64>,
    pub yddot: Vec<f64>,
    /// Residual of the two defining linear systems.
    pub residual: f64,
}

impl SegmentKinematics {
    pub fn ydot_vector(&self) -> TangentVector<f64> {
        self.frame_y.tangent(&self.ydot)
    }

    pub fn yddot_vector(&self) -> TangentVector<f64> {
        self.frame_y.tangent(&self.yddot)
    }
}

/// `n + 1` uniform nodes on `[0, 1]`.
pub fn uniform_grid(n_theta: usize) -> Vec<f64> {
    let n = n_theta.max(2) - 1;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

impl CSegment {
    pub fn p_theta(&self, theta: f64) -> TangentVector<f64> {
        let d = sub(self.p1.components(), self.p0.components());
        TangentVector::project(&self.x_m, &axpy(self.p0.components(), theta, &d))
    }

    /// `p1 - p0` at `x_m`.
    pub fn direction(&self) -> Vec<f64> {
        sub(self.p1.components(), self.p0.components())
    }

    pub fn y_at(&self, theta: f64) -> Result<Point<f64>> {
        let res = c_exp(&self.cost, &self.x_m, &self.p_theta(theta))?;
        if res.residual > NODE_RESIDUAL_TOL {
            return Err(Error::SegmentLeavesDomain { theta });
        }
        Ok(res.target)
    }

    pub fn kinematics(&self, theta: f64) -> Result<SegmentKinematics> {
        let y = self.y_at(theta)?;
        kinematics_at(&self.cost, &self.x_m, &y, &self.direction(), theta)
    }
}

fn segment_passes_origin(p0: &[f64], p1: &[f64], eps: f64) -> bool {
    let d = sub(p1, p0);
    let dd = dot(&d, &d);
    if dd == 0.0 {
        return norm(p0) < eps;
    }
    let t = (-dot(p0, &d) / dd).clamp(0.0, 1.0);
    norm(&axpy(p0, t, &d)) < eps
}

/// Kinematics at `y = y_theta`, given `p1 - p0` (ambient at `x_m`).
pub(crate) fn kinematics_at(
    c: &CostSpec<f64>,
    x_m: &Point<f64>,
    y: &Point<f64>,
    dp: &[f64],
    theta: f64,
) -> Result<SegmentKinematics> {
    let b = derivatives(c, x_m, y, &[DerivOrder::HessXY, DerivOrder::DxDyy])?;
    let n = c.dim();
    let cxy = b.hess_xy();
    let lu = Lu::factor(&cxy).ok_or(Error::SingularJacobian)?;
    let rhs1 = scale(&b.frame_x.coords_of(dp), -1.0);
    let ydot = lu.solve(&rhs1);
    let t = b.dx_dyy();
    let rhs2: Vec<f64> = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for a in 0..n {
                for bb in 0..n {
                    acc += t.get(&[k, a, bb]) * ydot[a] * ydot[bb];
                }
            }
            -acc
        })
        .collect();
    let yddot = lu.solve(&rhs2);
    let residual = linear_residual(&cxy, &ydot, &rhs1).max(linear_residual(&cxy, &yddot, &rhs2));
    Ok(SegmentKinematics { theta, y: y.clone(), frame_y: b.frame_y, ydot, yddot, residual })
}

fn linear_residual(a: &Matrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    norm(&sub(&a.mul_vec(x), b)) / (1.0 + norm(b))
}

/// Builds the c-segment from `y0` to `y1` with respect to `x_m`.
///
/// For the logarithmic cost a segment `[p0, p1]` through the origin is
/// shifted by [`LOG_COLLINEAR_OFFSET`] orthogonally to `p1 - p0`.
pub fn build_c_segment(
    c: &CostSpec<f64>,
    x_m: &Point<f64>,
    y0: &Point<f64>,
    y1: &Point<f64>,
    n_theta: usize,
) -> Result<CSegment> {
    build_c_segment_on(c, x_m, y0, y1, &uniform_grid(n_theta), None)
}

/// As [`build_c_segment`] on an explicit sorted grid in `[0, 1]`, optionally
/// requiring every node to lie in `lambda`.
pub fn build_c_segment_on(
    c: &CostSpec<f64>,
    x_m: &Point<f64>,
    y0: &Point<f64>,
    y1: &Point<f64>,
    theta_grid: &[f64],
    lambda: Option<&DomainSpec>,
) -> Result<CSegment> {
    if y0 == y1 {
        return Err(Error::InvalidArgument("c-segment needs distinct endpoints".into()));
    }
    if theta_grid.len() < 2
        || theta_grid.windows(2).any(|w| !(w[0] < w[1]))
        || !(0.0..=1.0).contains(&theta_grid[0])
        || !(0.0..=1.0).contains(&theta_grid[theta_grid.len() - 1])
    {
        return Err(Error::InvalidArgument("theta grid must be increasing within [0, 1]".into()));
    }
    let mut p0 = c_exp_inverse(c, x_m, y0)?;
    let mut p1 = c_exp_inverse(c, x_m, y1)?;
    let mut offset = None;
    if matches!(c.kind(), CostKind::Log) && segment_passes_origin(p0.components(), p1.components(), LOG_COLLINEAR_OFFSET)
    {
        let d = sub(p1.components(), p0.components());
        let frame = c.manifold().orthonormal_frame(x_m);
        let normal = frame
            .vectors()
            .iter()
            .map(|e| axpy(e, -dot(e, &d) / dot(&d, &d).max(f64::MIN_POSITIVE), &d))
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .ok_or(Error::SegmentLeavesDomain { theta: 0.0 })?;
        let len = norm(&normal);
        if len == 0.0 {
            return Err(Error::SegmentLeavesDomain { theta: 0.0 });
        }
        let shift = scale(&normal, LOG_COLLINEAR_OFFSET / len);
        p0 = TangentVector::project(x_m, &axpy(p0.components(), 1.0, &shift));
        p1 = TangentVector::project(x_m, &axpy(p1.components(), 1.0, &shift));
        offset = Some(LOG_COLLINEAR_OFFSET);
    }
    let theta_grid = theta_grid.to_vec();
    let mut seg = CSegment {
        cost: c.clone(),
        x_m: x_m.clone(),
        y0: y0.clone(),
        y1: y1.clone(),
        p0,
        p1,
        theta_grid: theta_grid.clone(),
        ys: Vec::with_capacity(theta_grid.len()),
        offset,
    };
    let dp = seg.direction();
    for &theta in &theta_grid {
        let leaves = |_| Error::SegmentLeavesDomain { theta };
        let y = seg.y_at(theta).map_err(leaves)?;
        if lambda.is_some_and(|l| !l.contains(&y)) {
            return Err(Error::SegmentLeavesDomain { theta });
        }
        let k = kinematics_at(c, x_m, &y, &dp, theta).map_err(leaves)?;
        if norm(&k.ydot) <= MIN_YDOT {
            return Err(Error::SegmentLeavesDomain { theta });
        }
        seg.ys.push(y);
    }
    if offset.is_some() {
        seg.y0 = seg.y_at(0.0)?;
        seg.y1 = seg.y_at(1.0)?;
    }
    Ok(seg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Manifold;

    fn e2(a: f64, b: f64) -> Point<f64> {
        Manifold::Euclidean(2).point(vec![a, b]).unwrap()
    }

    #[test]
    fn quadratic_segment_is_straight() {
        let c = CostSpec::quadratic(2).unwrap();
        let seg = build_c_segment(&c, &e2(0.0, 0.0), &e2(1.0, 0.0), &e2(0.0, 2.0), 11).unwrap();
        let y = &seg.ys[5];
        assert!((y.coords()[0] - 0.5).abs() < 1e-14 && (y.coords()[1] - 1.0).abs() < 1e-14);
        let k = seg.kinematics(0.3).unwrap();
        assert!((k.ydot[0] + 1.0).abs() < 1e-14 && (k.ydot[1] - 2.0).abs() < 1e-14);
        assert!(norm(&k.yddot) < 1e-14);
    }

    #[test]
    fn log_collinear_segment_is_offset() {
        let c = CostSpec::log(2).unwrap();
        // p0 = -(1,0), p1 = (1,0)/2: the segment passes through p = 0
        let seg = build_c_segment(&c, &e2(0.0, 0.0), &e2(1.0, 0.0), &e2(-2.0, 0.0), 5);
        // y_theta escapes to infinity near the origin even after the offset
        match seg {
            Ok(s) => assert_eq!(s.offset, Some(LOG_COLLINEAR_OFFSET)),
            Err(e) => assert!(matches!(e, Error::SegmentLeavesDomain { .. })),
        }
    }

    #[test]
    fn equal_endpoints_rejected() {
        let c = CostSpec::quadratic(2).unwrap();
        assert!(build_c_segment(&c, &e2(0.0, 0.0), &e2(1.0, 0.0), &e2(1.0, 0.0), 5).is_err());
    }
}
