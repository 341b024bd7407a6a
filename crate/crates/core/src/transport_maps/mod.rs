//! c- and c*-exponential maps.
//!
//! `c-Exp_x p` is the `y` with `p = -grad_x c(x, y)`. Quadratic, logarithmic,
//! sphere-distance and reflector costs are inverted in closed form; the
//! others by damped Newton iteration with the mixed Hessian as Jacobian.

mod domain;

pub use domain::{DomainSpec, Shape, Side};

use crate::cost_catalog::{derivatives_relaxed, CostKind, CostSpec, DerivOrder};
use crate::error::{Error, Result};
use crate::geometry::{Point, TangentVector};
use crate::linalg::{axpy, norm, scale, Lu};
use crate::scalar::{lit, to_f64, Real};

pub const NEWTON_MAX_ITER: usize = 100;
/// Residual `|p + grad_x c(x, y)|` accepted as converged.
pub const NEWTON_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct CExpResult<T> {
    pub target: Point<T>,
    pub iterations: usize,
    pub residual: T,
}

/// `-grad_x c(x, y)` as an ambient tangent vector at `x`.
pub fn c_exp_inverse<T: Real>(c: &CostSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
    c.check_admissible(x, y)?;
    minus_grad_x(c, x, y)
}

fn minus_grad_x<T: Real>(c: &CostSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
    let b = derivatives_relaxed(c, x, y, &[DerivOrder::GradX])?;
    let g = b.frame_x.ambient(b.grad_x());
    Ok(TangentVector::project(x, &scale(&g, -T::one())))
}

fn residual<T: Real>(c: &CostSpec<T>, x: &Point<T>, p: &[T], y: &Point<T>) -> Result<T> {
    let q = minus_grad_x(c, x, y)?;
    Ok(norm(&axpy(p, -T::one(), q.components())))
}

fn tolerance<T: Real>(p: &[T]) -> T {
    lit::<T>(NEWTON_TOL) * norm(p).max(T::one())
}

/// Solves `p = -grad_x c(x, y)` for `y`.
pub fn c_exp<T: Real>(c: &CostSpec<T>, x: &Point<T>, p: &TangentVector<T>) -> Result<CExpResult<T>> {
    if p.base() != x {
        return Err(Error::BaseMismatch);
    }
    let m = c.manifold();
    if x.manifold() != m {
        return Err(Error::InvalidArgument("point does not lie on the cost manifold".into()));
    }
    let pc = p.components();
    let closed = match c.kind() {
        CostKind::Quadratic => Some(m.point(axpy(x.coords(), T::one(), pc))?),
        CostKind::Log => {
            let n2 = pc.iter().map(|&v| v * v).sum::<T>();
            if n2 == T::zero() {
                return Err(Error::OutsideDomain);
            }
            Some(m.point(axpy(x.coords(), -T::one() / n2, pc))?)
        }
        CostKind::SphereDistSq => Some(m.exp_map(x, p)?),
        CostKind::ReflectorAntenna => Some(reflector_exp(x, pc)?),
        _ => None,
    };
    if let Some(target) = closed {
        let r = residual(c, x, pc, &target)?;
        if !(r <= tolerance(pc)) {
            return Err(Error::NewtonDiverged { iterations: 0, residual: to_f64(r) });
        }
        return Ok(CExpResult { target, iterations: 0, residual: r });
    }
    newton(c, x, pc, initial_guess(c, x, pc))
}

/// For `c = -1/2 log |x-y|^2` on the unit sphere, `p = -grad_x c` points
/// away from `y` with `|p| = cot(theta / 2) / 2`, `theta = d(x, y)`.
fn reflector_exp<T: Real>(x: &Point<T>, p: &[T]) -> Result<Point<T>> {
    let m = x.manifold();
    let len = norm(p);
    if len == T::zero() {
        return m.point(scale(x.coords(), -T::one()));
    }
    let theta = lit::<T>(2.0) * (T::one() / (lit::<T>(2.0) * len)).atan();
    let dir = scale(p, -T::one() / len);
    Ok(m.exp_unchecked(x, &scale(&dir, theta)))
}

/// `exp_x(p)` for metric-like costs, `x + p` otherwise. Radial costs whose
/// profile decreases in the distance send `p` to the opposite side of `x`,
/// so the seed is reflected for them.
fn initial_guess<T: Real>(c: &CostSpec<T>, x: &Point<T>, p: &[T]) -> Point<T> {
    let m = c.manifold();
    if m.is_sphere() {
        let len = norm(p);
        let cap = T::PI() - lit(0.1);
        let v = if len > cap { scale(p, cap / len) } else { p.to_vec() };
        m.exp_unchecked(x, &v)
    } else {
        let decreasing = c.radial_profile(T::one()).is_some_and(|j| j[1] < T::zero());
        let v = if decreasing { scale(p, -T::one()) } else { p.to_vec() };
        m.exp_unchecked(x, &v)
    }
}

/// Damped Newton iteration from `y0`.
pub fn newton<T: Real>(c: &CostSpec<T>, x: &Point<T>, p: &[T], y0: Point<T>) -> Result<CExpResult<T>> {
    let tol = tolerance(p);
    let mut y = y0;
    let eval = |y: &Point<T>| -> Result<(Vec<T>, T)> {
        let b = derivatives_relaxed(c, x, y, &[DerivOrder::GradX])?;
        // F = p + grad_x c in x-frame coordinates
        let pf = b.frame_x.coords_of(p);
        let f: Vec<T> = pf.iter().zip(b.grad_x()).map(|(&a, &g)| a + g).collect();
        let r = norm(&f);
        Ok((f, r))
    };
    let (mut f, mut r) = eval(&y).map_err(|_| Error::NewtonDiverged { iterations: 0, residual: f64::INFINITY })?;
    for it in 0..NEWTON_MAX_ITER {
        if r <= tol {
            // one polishing step keeps later finite differences clean
            if let Ok((y2, _, r2)) = newton_step(c, x, &y, &f, r, &eval) {
                return Ok(CExpResult { target: y2, iterations: it + 1, residual: r2 });
            }
            return Ok(CExpResult { target: y, iterations: it, residual: r });
        }
        (y, f, r) = newton_step(c, x, &y, &f, r, &eval)?;
    }
    if r <= tol {
        return Ok(CExpResult { target: y, iterations: NEWTON_MAX_ITER, residual: r });
    }
    Err(Error::NewtonDiverged { iterations: NEWTON_MAX_ITER, residual: to_f64(r) })
}

type Eval<'a, T> = dyn Fn(&Point<T>) -> Result<(Vec<T>, T)> + 'a;

fn newton_step<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    y: &Point<T>,
    f: &[T],
    r: T,
    eval: &Eval<'_, T>,
) -> Result<(Point<T>, Vec<T>, T)> {
    let m = c.manifold();
    let b = derivatives_relaxed(c, x, y, &[DerivOrder::HessXY])?;
    let lu = Lu::factor(&b.hess_xy()).ok_or(Error::SingularJacobian)?;
    let delta = scale(&lu.solve(f), -T::one());
    let mut step = b.frame_y.ambient(&delta);
    if m.is_sphere() {
        let len = norm(&step);
        let cap = lit::<T>(1.0);
        if len > cap {
            step = scale(&step, cap / len);
        }
    }
    for _ in 0..MAX_HALVINGS {
        let cand = m.exp_unchecked(y, &step);
        if let Ok((f2, r2)) = eval(&cand) {
            if r2 < r {
                return Ok((cand, f2, r2));
            }
        }
        step = scale(&step, lit(0.5));
    }
    Err(Error::NewtonDiverged { iterations: 0, residual: to_f64(r) })
}

/// Solves `q = -grad_y c(x, y)` for `x`, i.e. `c-Exp` of the dual cost.
pub fn cstar_exp<T: Real>(c: &CostSpec<T>, y: &Point<T>, q: &TangentVector<T>) -> Result<CExpResult<T>> {
    if c.is_symmetric() {
        return c_exp(c, y, q);
    }
    c_exp(&c.dual(), y, q)
}

/// `-grad_y c(x, y)` as an ambient tangent vector at `y`.
pub fn cstar_exp_inverse<T: Real>(c: &CostSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
    c.check_admissible(x, y)?;
    let b = derivatives_relaxed(c, x, y, &[DerivOrder::GradY])?;
    let g = b.frame_y.ambient(b.grad_y());
    Ok(TangentVector::project(y, &scale(&g, -T::one())))
}

/// `c-Exp_x` followed by a membership test for the target domain.
pub fn c_exp_within<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    p: &TangentVector<T>,
    lambda: &DomainSpec,
) -> Result<CExpResult<T>> {
    let res = c_exp(c, x, p)?;
    if !lambda.contains(&res.target) {
        return Err(Error::OutsideDomain);
    }
    Ok(res)
}

/// `|(D²_xy c)^{-1} eta . xi - eta . (D²_yx c)^{-1} xi|` in orthonormal frames.
pub fn symmetry_residual<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    y: &Point<T>,
    eta: &TangentVector<T>,
    xi: &TangentVector<T>,
) -> Result<T> {
    if eta.base() != x || xi.base() != y {
        return Err(Error::BaseMismatch);
    }
    let b = crate::cost_catalog::derivatives(c, x, y, &[DerivOrder::HessXY])?;
    let a = b.hess_xy();
    let at = a.transpose();
    let e = b.frame_x.coords_of(eta.components());
    let s = b.frame_y.coords_of(xi.components());
    let lu = Lu::factor(&a).ok_or(Error::SingularJacobian)?;
    let lut = Lu::factor(&at).ok_or(Error::SingularJacobian)?;
    let lhs = crate::linalg::dot(&lu.solve(&e), &s);
    let rhs = crate::linalg::dot(&e, &lut.solve(&s));
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_catalog::{A3Tag, Sign};
    use crate::geometry::Manifold;
    use approx::assert_abs_diff_eq;

    fn e2(a: f64, b: f64) -> Point<f64> {
        Manifold::Euclidean(2).point(vec![a, b]).unwrap()
    }

    #[test]
    fn closed_forms() {
        let q = CostSpec::<f64>::quadratic(2).unwrap();
        let x = e2(0.0, 0.0);
        let p = TangentVector::new(&x, vec![1.0, 2.0]).unwrap();
        assert_eq!(c_exp(&q, &x, &p).unwrap().target.coords(), &[1.0, 2.0]);

        let l = CostSpec::<f64>::log(2).unwrap();
        let p = TangentVector::new(&x, vec![-1.0, 0.0]).unwrap();
        let y = c_exp(&l, &x, &p).unwrap().target;
        assert_abs_diff_eq!(y.coords()[0], 1.0, epsilon = 1e-15);

        let inv = c_exp_inverse(&l, &x, &e2(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(inv.components()[0], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn sqrt_newton_matches_closed_form() {
        let c = CostSpec::<f64>::sqrt(2).unwrap();
        let x = e2(0.2, -0.3);
        let p = TangentVector::new(&x, vec![0.5, 0.4]).unwrap();
        let res = c_exp(&c, &x, &p).unwrap();
        let k = 1.0 / (1.0 - 0.41f64).sqrt();
        assert_abs_diff_eq!(res.target.coords()[0], 0.2 + 0.5 * k, epsilon = 1e-10);
        assert_abs_diff_eq!(res.target.coords()[1], -0.3 + 0.4 * k, epsilon = 1e-10);
        assert!(res.residual < 1e-10);
        assert!(res.iterations <= 30);

        let outside = TangentVector::new(&x, vec![1.0, 0.5]).unwrap();
        assert!(c_exp(&c, &x, &outside).is_err());
    }

    #[test]
    fn power_four_newton() {
        let c = CostSpec::<f64>::power(2, 4.0, Sign::Plus, A3Tag::Exploratory).unwrap();
        let x = e2(0.0, 0.0);
        let p = TangentVector::new(&x, vec![0.008, 0.0]).unwrap();
        let res = c_exp(&c, &x, &p).unwrap();
        // p = |y-x|^2 (y-x) so y = p / |p|^{2/3}
        assert_abs_diff_eq!(res.target.coords()[0], 0.2, epsilon = 1e-10);
    }

    #[test]
    fn reflector_closed_form_round_trip() {
        let c = CostSpec::<f64>::reflector_antenna(2).unwrap();
        let m = c.manifold();
        let x = m.point(vec![0.0, 0.0, 1.0]).unwrap();
        let y = m.project_point(vec![0.3, -0.4, 0.5]).unwrap();
        let p = c_exp_inverse(&c, &x, &y).unwrap();
        let back = c_exp(&c, &x, &p).unwrap().target;
        assert!(m.distance(&back, &y) < 1e-12);
    }

    #[test]
    fn sphere_exp_example() {
        let c = CostSpec::<f64>::sphere_dist_sq(2).unwrap();
        let m = c.manifold();
        let x = m.point(vec![0.0, 0.0, 1.0]).unwrap();
        let p = TangentVector::new(&x, vec![std::f64::consts::FRAC_PI_2, 0.0, 0.0]).unwrap();
        let y = c_exp(&c, &x, &p).unwrap().target;
        assert_abs_diff_eq!(y.coords()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cstar_swaps_roles() {
        let q = CostSpec::<f64>::quadratic(2).unwrap();
        let y = e2(0.0, 0.0);
        let qv = TangentVector::new(&y, vec![1.0, 1.0]).unwrap();
        assert_eq!(cstar_exp(&q, &y, &qv).unwrap().target.coords(), &[1.0, 1.0]);
    }

    #[test]
    fn symmetry_residual_quadratic_is_zero() {
        let q = CostSpec::<f64>::quadratic(2).unwrap();
        let x = e2(0.1, 0.2);
        let y = e2(-0.4, 0.9);
        let eta = TangentVector::new(&x, vec![0.3, -0.7]).unwrap();
        let xi = TangentVector::new(&y, vec![1.1, 0.2]).unwrap();
        assert!(symmetry_residual(&q, &x, &y, &eta, &xi).unwrap() < 1e-15);
    }
}
