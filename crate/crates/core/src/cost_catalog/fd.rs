//! Finite-difference oracle for the derivative blocks.
//!
//! On Euclidean space the frames are constant, so every block is a single
//! central difference of the analytic block one order below it.
//!
//! On the sphere frames move with the base point, and only differences taken
//! along a fixed chart are meaningful: `y`-derivatives of order `ky` are taken
//! from the analytic block at `x` order zero, then differenced `kx` times along
//! `a -> exp_x(E a)` with `y` held fixed. Pure `y` blocks are differenced from
//! cost values along `b -> exp_y(F b)`.
//!
//! Either way each route checks the analytic formulas one differentiation at
//! a time.

use super::derivs::{DerivOrder, LocalExpansion, Tensor};
use super::CostSpec;
use crate::error::{Error, Result};
use crate::geometry::{Frame, Point};
use crate::scalar::{lit, to_f64, Real};

fn stencil_ok<T: Real>(c: &CostSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<()> {
    c.check_admissible(x, y)
}

/// Pure-`y` block of order `ky` at `(x, y)`, in the fixed frame at `y`.
fn y_block<T: Real>(c: &CostSpec<T>, x: &Point<T>, y: &Point<T>, fy: &Frame<T>, ky: usize) -> Result<Tensor<T>> {
    stencil_ok(c, x, y)?;
    let m = c.manifold();
    let le = LocalExpansion::with_frames(c, x, y, m.orthonormal_frame(x), fy.clone());
    Ok(le.tensor(DerivOrder::from_counts(0, ky).expect("ky <= 2")))
}

fn unit<T: Real>(n: usize, i: usize, h: T) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    v[i] = h;
    v
}

fn add_unit<T: Real>(n: usize, i: usize, hi: T, j: usize, hj: T) -> Vec<T> {
    let mut v = unit(n, i, hi);
    v[j] = v[j] + hj;
    v
}

/// Central-difference approximation of one derivative block with step `h`.
pub fn fd_oracle<T: Real>(c: &CostSpec<T>, x: &Point<T>, y: &Point<T>, order: DerivOrder, h: T) -> Result<Tensor<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    c.check_admissible(x, y)?;
    let m = c.manifold();
    let n = c.dim();
    let fx = m.orthonormal_frame(x);
    let fy = m.orthonormal_frame(y);
    let (kx, ky) = order.counts();
    let two = lit::<T>(2.0);

    if !m.is_sphere() {
        if kx + ky == 0 {
            return Ok(Tensor::from_fn(n, 0, |_| c.value_extended(x, y)));
        }
        let (lower, along_x) = if kx > 0 { ((kx - 1, ky), true) } else { ((0, ky - 1), false) };
        let lower = DerivOrder::from_counts(lower.0, lower.1).expect("lower block exists");
        let block = |shift: &[T]| -> Result<Tensor<T>> {
            let (xs, ys) = if along_x {
                (m.point(crate::linalg::add(x.coords(), shift))?, y.clone())
            } else {
                (x.clone(), m.point(crate::linalg::add(y.coords(), shift))?)
            };
            stencil_ok(c, &xs, &ys)?;
            Ok(LocalExpansion::new(c, &xs, &ys).tensor(lower))
        };
        let mut slices = Vec::with_capacity(n);
        for i in 0..n {
            let p = block(&unit(n, i, h))?;
            let q = block(&unit(n, i, -h))?;
            slices.push(p.data().iter().zip(q.data()).map(|(&a, &b)| (a - b) / (two * h)).collect::<Vec<T>>());
        }
        // the differenced axis goes first among the x axes (or the y axes)
        return Ok(Tensor::from_fn(n, kx + ky, |idx| {
            let k = if along_x { 0 } else { kx };
            let rest: Vec<usize> = idx.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
            let inner = rest.iter().fold(0, |acc, &i| acc * n + i);
            slices[idx[k]][inner]
        }));
    }

    if kx == 0 {
        let val = |b: &[T]| -> Result<T> {
            let yb = fy.chart(b);
            stencil_ok(c, x, &yb)?;
            Ok(c.value_extended(x, &yb))
        };
        return match ky {
            0 => Ok(Tensor::from_fn(n, 0, |_| c.value_extended(x, y))),
            1 => {
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    out.push((val(&unit(n, i, h))? - val(&unit(n, i, -h))?) / (two * h));
                }
                Ok(Tensor::from_fn(n, 1, |idx| out[idx[0]]))
            }
            _ => {
                let v0 = val(&vec![T::zero(); n])?;
                let mut out = vec![T::zero(); n * n];
                for i in 0..n {
                    for j in i..n {
                        let d = if i == j {
                            (val(&unit(n, i, h))? - two * v0 + val(&unit(n, i, -h))?) / (h * h)
                        } else {
                            (val(&add_unit(n, i, h, j, h))? - val(&add_unit(n, i, h, j, -h))?
                                - val(&add_unit(n, i, -h, j, h))?
                                + val(&add_unit(n, i, -h, j, -h))?)
                                / (lit::<T>(4.0) * h * h)
                        };
                        out[i * n + j] = d;
                        out[j * n + i] = d;
                    }
                }
                Ok(Tensor::from_fn(n, 2, |idx| out[idx[0] * n + idx[1]]))
            }
        };
    }

    let g = |a: &[T]| y_block(c, &fx.chart(a), y, &fy, ky);
    let inner_len = n.pow(ky as u32);
    // slices[k] holds the differenced y-block for the x-multi-index k
    let mut slices: Vec<Vec<T>> = Vec::new();
    match kx {
        1 => {
            for i in 0..n {
                let p = g(&unit(n, i, h))?;
                let q = g(&unit(n, i, -h))?;
                slices.push(p.data().iter().zip(q.data()).map(|(&a, &b)| (a - b) / (two * h)).collect());
            }
        }
        _ => {
            let g0 = g(&vec![T::zero(); n])?;
            slices = vec![Vec::new(); n * n];
            for i in 0..n {
                for j in i..n {
                    let d: Vec<T> = if i == j {
                        let p = g(&unit(n, i, h))?;
                        let q = g(&unit(n, i, -h))?;
                        (0..inner_len).map(|k| (p.data()[k] - two * g0.data()[k] + q.data()[k]) / (h * h)).collect()
                    } else {
                        let pp = g(&add_unit(n, i, h, j, h))?;
                        let pm = g(&add_unit(n, i, h, j, -h))?;
                        let mp = g(&add_unit(n, i, -h, j, h))?;
                        let mm = g(&add_unit(n, i, -h, j, -h))?;
                        (0..inner_len)
                            .map(|k| {
                                (pp.data()[k] - pm.data()[k] - mp.data()[k] + mm.data()[k]) / (lit::<T>(4.0) * h * h)
                            })
                            .collect()
                    };
                    slices[j * n + i] = d.clone();
                    slices[i * n + j] = d;
                }
            }
        }
    }
    Ok(Tensor::from_fn(n, kx + ky, |idx| {
        let outer = idx[..kx].iter().fold(0, |acc, &i| acc * n + i);
        let inner = idx[kx..].iter().fold(0, |acc, &i| acc * n + i);
        slices[outer][inner]
    }))
}

/// Richardson extrapolation `(4 D(h/2) - D(h)) / 3`.
pub fn fd_oracle_richardson<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    y: &Point<T>,
    order: DerivOrder,
    h: T,
) -> Result<Tensor<T>> {
    let coarse = fd_oracle(c, x, y, order, h)?;
    let fine = fd_oracle(c, x, y, order, h / lit(2.0))?;
    let n = coarse.n();
    let three = lit::<T>(3.0);
    let four = lit::<T>(4.0);
    let data_c = coarse.data();
    let data_f = fine.data();
    let mut k = 0;
    Ok(Tensor::from_fn(n, coarse.rank(), |_| {
        let v = (four * data_f[k] - data_c[k]) / three;
        k += 1;
        v
    }))
}

/// Relative residual `max|analytic - fd| / max(max|analytic|, 1)`.
pub fn relative_residual<T: Real>(analytic: &Tensor<T>, fd: &Tensor<T>) -> f64 {
    to_f64(analytic.max_abs_diff(fd)) / to_f64(analytic.max_abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_catalog::derivatives;

    #[test]
    fn sqrt_cost_all_orders() {
        let c = CostSpec::<f64>::sqrt(2).unwrap();
        let m = c.manifold();
        let x = m.point(vec![0.3, -0.2]).unwrap();
        let y = m.point(vec![-0.5, 0.6]).unwrap();
        let b = derivatives(&c, &x, &y, &DerivOrder::ALL).unwrap();
        for o in DerivOrder::ALL {
            let fd = fd_oracle(&c, &x, &y, o, 1e-4).unwrap();
            let r = relative_residual(b.get(o).unwrap(), &fd);
            assert!(r < 1e-6, "{o:?}: {r}");
        }
    }

    #[test]
    fn stencil_into_singular_set_rejected() {
        let c = CostSpec::<f64>::log(2).unwrap();
        let m = c.manifold();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![0.0500001, 0.0]).unwrap();
        assert!(fd_oracle(&c, &x, &y, DerivOrder::GradX, 1e-3).is_err());
    }
}
