//! Analytic mixed partial derivatives in normal coordinates.
//!
//! All derivatives are taken of `F(a, b) = c(exp_x(E a), exp_y(F b))` at
//! `a = b = 0`, where `E`, `F` are the orthonormal frames at `x` and `y`.
//! Costs of the form `h(s)` are differentiated with Faà di Bruno's formula
//! over set partitions of the requested variables.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{CostKind, CostSpec};
use crate::error::{Error, Result};
use crate::geometry::{Frame, Point};
use crate::linalg::{dot, sub, Matrix};
use crate::scalar::{lit, Real};

/// Which block of derivatives is requested. `(kx, ky)` is the number of
/// `x` and `y` differentiations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivOrder {
    Value,
    GradX,
    GradY,
    HessXX,
    HessYY,
    HessXY,
    DxDyy,
    DxxDy,
    DxxDyy,
}

impl DerivOrder {
    pub const ALL: [DerivOrder; 9] = [
        DerivOrder::Value,
        DerivOrder::GradX,
        DerivOrder::GradY,
        DerivOrder::HessXX,
        DerivOrder::HessYY,
        DerivOrder::HessXY,
        DerivOrder::DxDyy,
        DerivOrder::DxxDy,
        DerivOrder::DxxDyy,
    ];

    pub fn counts(self) -> (usize, usize) {
        match self {
            DerivOrder::Value => (0, 0),
            DerivOrder::GradX => (1, 0),
            DerivOrder::GradY => (0, 1),
            DerivOrder::HessXX => (2, 0),
            DerivOrder::HessYY => (0, 2),
            DerivOrder::HessXY => (1, 1),
            DerivOrder::DxDyy => (1, 2),
            DerivOrder::DxxDy => (2, 1),
            DerivOrder::DxxDyy => (2, 2),
        }
    }

    pub fn from_counts(kx: usize, ky: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.counts() == (kx, ky))
    }
}

/// Dense tensor with every axis of length `n`; `x` axes come first.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    n: usize,
    rank: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = n.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            let mut r = flat;
            for slot in idx.iter_mut().rev() {
                *slot = r % n;
                r /= n;
            }
            data.push(f(&idx));
        }
        Self { n, rank, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> T {
        debug_assert_eq!(idx.len(), self.rank);
        let flat = idx.iter().fold(0, |acc, &i| acc * self.n + i);
        self.data[flat]
    }

    pub fn scalar(&self) -> T {
        self.data[0]
    }

    /// Rank-2 tensor as a matrix (first axis = rows).
    pub fn matrix(&self) -> Matrix<T> {
        assert_eq!(self.rank, 2, "not a matrix");
        Matrix::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |a - b|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Requested derivative blocks together with the frames they are expressed in.
#[derive(Clone, Debug)]
pub struct DerivativeBlock<T> {
    pub frame_x: Frame<T>,
    pub frame_y: Frame<T>,
    entries: BTreeMap<DerivOrder, Tensor<T>>,
}

impl<T: Real> DerivativeBlock<T> {
    pub fn get(&self, order: DerivOrder) -> Option<&Tensor<T>> {
        self.entries.get(&order)
    }

    fn need(&self, order: DerivOrder) -> &Tensor<T> {
        self.entries.get(&order).unwrap_or_else(|| panic!("{order:?} was not requested"))
    }

    pub fn orders(&self) -> impl Iterator<Item = DerivOrder> + '_ {
        self.entries.keys().copied()
    }

    pub fn value(&self) -> T {
        self.need(DerivOrder::Value).scalar()
    }

    pub fn grad_x(&self) -> &[T] {
        self.need(DerivOrder::GradX).data()
    }

    pub fn grad_y(&self) -> &[T] {
        self.need(DerivOrder::GradY).data()
    }

    pub fn hess_xx(&self) -> Matrix<T> {
        self.need(DerivOrder::HessXX).matrix()
    }

    pub fn hess_yy(&self) -> Matrix<T> {
        self.need(DerivOrder::HessYY).matrix()
    }

    /// `D²_xy c` with rows indexed by `x`.
    pub fn hess_xy(&self) -> Matrix<T> {
        self.need(DerivOrder::HessXY).matrix()
    }

    pub fn dx_dyy(&self) -> &Tensor<T> {
        self.need(DerivOrder::DxDyy)
    }

    pub fn dxx_dy(&self) -> &Tensor<T> {
        self.need(DerivOrder::DxxDy)
    }

    pub fn dxx_dyy(&self) -> &Tensor<T> {
        self.need(DerivOrder::DxxDyy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    X(usize),
    Y(usize),
}

type Partition = Vec<Vec<usize>>;

fn partitions_of(size: usize) -> &'static [Partition] {
    static CACHE: OnceLock<Vec<Vec<Partition>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        let mut out: Vec<Vec<Partition>> = vec![vec![vec![]]];
        for k in 1..=4 {
            let mut next = Vec::new();
            for p in &out[k - 1] {
                // new element k-1 either joins an existing block or starts one
                for b in 0..p.len() {
                    let mut q = p.clone();
                    q[b].push(k - 1);
                    next.push(q);
                }
                let mut q = p.clone();
                q.push(vec![k - 1]);
                next.push(q);
            }
            out.push(next);
        }
        out
    });
    &all[size]
}

enum Inner<T> {
    /// `s = |x - y|^2`, `u = x - y`.
    Radial { u: Vec<T>, jet: [T; 5] },
    /// `s = X(a) . Y(b)` on the unit sphere.
    Sphere { x: Vec<T>, y: Vec<T>, e: Vec<Vec<T>>, f: Vec<Vec<T>>, jet: [T; 5] },
    /// `|x-y|^2 + d^2`, `d = f(x) - g(y)`.
    Perturbed { u: Vec<T>, d: T },
}

/// Everything needed to evaluate any mixed partial at a fixed pair.
pub(crate) struct LocalExpansion<'a, T> {
    cost: &'a CostSpec<T>,
    x: Point<T>,
    y: Point<T>,
    frame_x: Frame<T>,
    frame_y: Frame<T>,
    inner: Inner<T>,
}

impl<'a, T: Real> LocalExpansion<'a, T> {
    pub(crate) fn new(cost: &'a CostSpec<T>, x: &Point<T>, y: &Point<T>) -> Self {
        let m = cost.manifold();
        Self::with_frames(cost, x, y, m.orthonormal_frame(x), m.orthonormal_frame(y))
    }

    pub(crate) fn with_frames(
        cost: &'a CostSpec<T>,
        x: &Point<T>,
        y: &Point<T>,
        frame_x: Frame<T>,
        frame_y: Frame<T>,
    ) -> Self {
        let (xc, yc) = (x.coords(), y.coords());
        let inner = match cost.kind() {
            CostKind::PerturbedQuadratic { f, g } => Inner::Perturbed { u: sub(xc, yc), d: f.eval(xc) - g.eval(yc) },
            CostKind::SphereDistSq | CostKind::ReflectorAntenna => {
                let s = dot(xc, yc).max(-T::one()).min(T::one());
                Inner::Sphere {
                    x: xc.to_vec(),
                    y: yc.to_vec(),
                    e: frame_x.vectors().to_vec(),
                    f: frame_y.vectors().to_vec(),
                    jet: cost.sphere_profile(s).expect("sphere cost"),
                }
            }
            _ => {
                let u = sub(xc, yc);
                let s = dot(&u, &u);
                Inner::Radial { jet: cost.radial_profile(s).expect("radial cost"), u }
            }
        };
        Self { cost, x: x.clone(), y: y.clone(), frame_x, frame_y, inner }
    }

    /// Derivative of the inner variable `s` along the variables of `block`.
    fn inner_partial(&self, vars: &[Var], block: &[usize]) -> T {
        let two = lit::<T>(2.0);
        match &self.inner {
            Inner::Radial { u, .. } | Inner::Perturbed { u, .. } => match block {
                [a] => match vars[*a] {
                    Var::X(i) => two * u[i],
                    Var::Y(j) => -two * u[j],
                },
                [a, b] => {
                    let (va, vb) = (vars[*a], vars[*b]);
                    let (i, j, same_side) = match (va, vb) {
                        (Var::X(i), Var::X(j)) | (Var::Y(i), Var::Y(j)) => (i, j, true),
                        (Var::X(i), Var::Y(j)) | (Var::Y(j), Var::X(i)) => (i, j, false),
                    };
                    if i != j {
                        T::zero()
                    } else if same_side {
                        two
                    } else {
                        -two
                    }
                }
                _ => T::zero(),
            },
            Inner::Sphere { x, y, e, f, .. } => {
                let xs: Vec<usize> =
                    block.iter().filter_map(|&k| if let Var::X(i) = vars[k] { Some(i) } else { None }).collect();
                let ys: Vec<usize> =
                    block.iter().filter_map(|&k| if let Var::Y(j) = vars[k] { Some(j) } else { None }).collect();
                let dx = exp_jet(x, e, &xs);
                let dy = exp_jet(y, f, &ys);
                dot(&dx, &dy)
            }
        }
    }

    /// `d^|S| d / dS` with `d = f(x) - g(y)`; mixed sets vanish.
    fn perturbation_partial(&self, vars: &[Var], subset: &[usize]) -> T {
        let (CostKind::PerturbedQuadratic { f, g }, Inner::Perturbed { d, .. }) = (self.cost.kind(), &self.inner) else {
            unreachable!()
        };
        if subset.is_empty() {
            return *d;
        }
        let xs: Vec<usize> = subset.iter().filter_map(|&k| if let Var::X(i) = vars[k] { Some(i) } else { None }).collect();
        if xs.len() == subset.len() {
            return f.partial(self.x.coords(), &xs);
        }
        if xs.is_empty() {
            let ys: Vec<usize> =
                subset.iter().map(|&k| if let Var::Y(j) = vars[k] { j } else { unreachable!() }).collect();
            return -g.partial(self.y.coords(), &ys);
        }
        T::zero()
    }

    fn partial(&self, vars: &[Var]) -> T {
        let n = vars.len();
        match &self.inner {
            Inner::Radial { jet, .. } | Inner::Sphere { jet, .. } => {
                if n == 0 {
                    return jet[0];
                }
                let mut acc = T::zero();
                for p in partitions_of(n) {
                    let mut term = jet[p.len()];
                    for b in p {
                        if term == T::zero() {
                            break;
                        }
                        term = term * self.inner_partial(vars, b);
                    }
                    acc = acc + term;
                }
                acc
            }
            Inner::Perturbed { u, d } => {
                if n == 0 {
                    return dot(u, u) + *d * *d;
                }
                let all: Vec<usize> = (0..n).collect();
                let mut acc = self.inner_partial(vars, &all);
                for mask in 0u32..(1 << n) {
                    let a: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
                    let b: Vec<usize> = (0..n).filter(|k| mask & (1 << k) == 0).collect();
                    acc = acc + self.perturbation_partial(vars, &a) * self.perturbation_partial(vars, &b);
                }
                acc
            }
        }
    }

    pub(crate) fn mixed(&self, xs: &[usize], ys: &[usize]) -> T {
        let vars: Vec<Var> = xs.iter().map(|&i| Var::X(i)).chain(ys.iter().map(|&j| Var::Y(j))).collect();
        self.partial(&vars)
    }

    pub(crate) fn tensor(&self, order: DerivOrder) -> Tensor<T> {
        let (kx, ky) = order.counts();
        Tensor::from_fn(self.cost.dim(), kx + ky, |idx| self.mixed(&idx[..kx], &idx[kx..]))
    }

    pub(crate) fn block(self, request: &[DerivOrder]) -> DerivativeBlock<T> {
        let entries = request.iter().map(|&o| (o, self.tensor(o))).collect();
        DerivativeBlock { frame_x: self.frame_x, frame_y: self.frame_y, entries }
    }
}

/// Ambient derivative of `a -> exp_x(E a)` at `a = 0` along the frame
/// indices `idx` (order <= 4), from the Taylor expansion
/// `cos|a| x + sin|a| E a / |a|`.
fn exp_jet<T: Real>(x: &[T], e: &[Vec<T>], idx: &[usize]) -> Vec<T> {
    let d = |a: usize, b: usize| if idx[a] == idx[b] { T::one() } else { T::zero() };
    let comb = |coefs: &[(T, usize)]| -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        for &(w, k) in coefs {
            for (o, &v) in out.iter_mut().zip(&e[k]) {
                *o = *o + w * v;
            }
        }
        out
    };
    match idx.len() {
        0 => x.to_vec(),
        1 => e[idx[0]].clone(),
        2 => x.iter().map(|&v| -d(0, 1) * v).collect(),
        3 => {
            let third = lit::<T>(-1.0 / 3.0);
            comb(&[(third * d(0, 1), idx[2]), (third * d(0, 2), idx[1]), (third * d(1, 2), idx[0])])
        }
        4 => {
            let w = (d(0, 1) * d(2, 3) + d(0, 2) * d(1, 3) + d(0, 3) * d(1, 2)) / lit(3.0);
            x.iter().map(|&v| w * v).collect()
        }
        _ => unreachable!("derivative order above four"),
    }
}

/// Analytic derivative blocks at an admissible pair.
pub fn derivatives<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    y: &Point<T>,
    request: &[DerivOrder],
) -> Result<DerivativeBlock<T>> {
    c.check_admissible(x, y)?;
    Ok(LocalExpansion::new(c, x, y).block(request))
}

/// As [`derivatives`] but only rejects pairs where the cost is not finite.
/// Used inside iterative solvers whose intermediate iterates may wander
/// into the exclusion zone.
pub(crate) fn derivatives_relaxed<T: Real>(
    c: &CostSpec<T>,
    x: &Point<T>,
    y: &Point<T>,
    request: &[DerivOrder],
) -> Result<DerivativeBlock<T>> {
    let v = c.value_extended(x, y);
    if !v.is_finite() || c.singular_distance(x, y) <= T::zero() {
        return Err(Error::SingularPair { distance: 0.0, radius: crate::scalar::to_f64(c.r_min()) });
    }
    Ok(LocalExpansion::new(c, x, y).block(request))
}

/// A single mixed partial `d^{|xs|+|ys|} F / da_xs db_ys` (total order <= 4).
pub fn mixed_partial<T: Real>(c: &CostSpec<T>, x: &Point<T>, y: &Point<T>, xs: &[usize], ys: &[usize]) -> Result<T> {
    if xs.len() + ys.len() > 4 {
        return Err(Error::UnsupportedOrder(format!("{} x- and {} y-derivatives", xs.len(), ys.len())));
    }
    let n = c.dim();
    if xs.iter().chain(ys).any(|&i| i >= n) {
        return Err(Error::InvalidArgument(format!("frame index out of range for dimension {n}")));
    }
    c.check_admissible(x, y)?;
    Ok(LocalExpansion::new(c, x, y).mixed(xs, ys))
}
