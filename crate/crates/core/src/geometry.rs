//! Manifold primitives: Euclidean space and the unit round sphere.
//!
//! The sphere `S^n` is handled through its embedding in `R^{n+1}`: points are
//! unit vectors, tangent vectors at `x` are ambient vectors orthogonal to `x`.
//! Higher derivatives elsewhere in the toolkit are taken in Riemannian normal
//! coordinates, `a -> exp_x(sum_i a_i e_i)` for the frame returned by
//! [`Manifold::orthonormal_frame`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, scale, sub};
use crate::scalar::{lit, to_f64, Real};

/// Points farther than this from unit length are rejected as sphere points.
pub const SPHERE_MEMBERSHIP_TOL: f64 = 1e-12;
/// Maximum `|v . x|` accepted for a sphere tangent vector.
pub const TANGENCY_TOL: f64 = 1e-10;
/// Angular distance to the antipode below which `log_map` refuses to answer.
pub const ANTIPODAL_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    /// `R^n`
    Euclidean(usize),
    /// Unit sphere `S^n` embedded in `R^{n+1}`.
    Sphere(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    manifold: Manifold,
    coords: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<T> {
    base: Point<T>,
    components: Vec<T>,
}

/// Orthonormal basis of a tangent space, stored as ambient vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    base: Point<T>,
    vectors: Vec<Vec<T>>,
}

impl Manifold {
    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match *self {
            Manifold::Euclidean(n) | Manifold::Sphere(n) => n,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            Manifold::Euclidean(n) => n,
            Manifold::Sphere(n) => n + 1,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Manifold::Sphere(_))
    }

    /// Validates coordinates and wraps them as a point.
    pub fn point<T: Real>(&self, coords: Vec<T>) -> Result<Point<T>> {
        if self.dim() == 0 {
            return Err(Error::InvalidArgument("manifold dimension must be >= 1".into()));
        }
        if coords.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NotOnManifold("non-finite coordinate".into()));
        }
        if self.is_sphere() {
            let r = norm(&coords);
            if (r - T::one()).abs() > lit::<T>(SPHERE_MEMBERSHIP_TOL).max(T::epsilon() * lit(8.0)) {
                return Err(Error::NotOnManifold(format!("|x| = {}", to_f64(r))));
            }
        }
        Ok(Point { manifold: *self, coords })
    }

    /// Normalizes onto the sphere (identity on Euclidean space).
    pub fn project_point<T: Real>(&self, coords: Vec<T>) -> Result<Point<T>> {
        if coords.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: coords.len() });
        }
        let coords = if self.is_sphere() {
            let r = norm(&coords);
            if r == T::zero() {
                return Err(Error::NotOnManifold("zero vector".into()));
            }
            scale(&coords, T::one() / r)
        } else {
            coords
        };
        Ok(Point { manifold: *self, coords })
    }

    fn check_on<T: Real>(&self, x: &Point<T>) -> Result<()> {
        if x.manifold != *self {
            return Err(Error::InvalidArgument(format!("point lives on {:?}, not {:?}", x.manifold, self)));
        }
        Ok(())
    }

    /// Riemannian exponential map.
    pub fn exp_map<T: Real>(&self, x: &Point<T>, v: &TangentVector<T>) -> Result<Point<T>> {
        self.check_on(x)?;
        if v.base != *x {
            return Err(Error::BaseMismatch);
        }
        if self.is_sphere() {
            let len = norm(&v.components);
            if len >= T::PI() {
                return Err(Error::CutLocus { norm: to_f64(len) });
            }
        }
        Ok(self.exp_unchecked(x, &v.components))
    }

    /// Exponential map without cut-locus or base checks.
    pub(crate) fn exp_unchecked<T: Real>(&self, x: &Point<T>, v: &[T]) -> Point<T> {
        match self {
            Manifold::Euclidean(_) => Point { manifold: *self, coords: axpy(&x.coords, T::one(), v) },
            Manifold::Sphere(_) => {
                let len = norm(v);
                if len == T::zero() {
                    return x.clone();
                }
                let mut y: Vec<T> = x
                    .coords
                    .iter()
                    .zip(v)
                    .map(|(&xi, &vi)| len.cos() * xi + len.sin() * vi / len)
                    .collect();
                let r = norm(&y);
                y.iter_mut().for_each(|c| *c = *c / r);
                Point { manifold: *self, coords: y }
            }
        }
    }

    /// Riemannian logarithm: the tangent vector at `x` pointing to `y` with
    /// length equal to the geodesic distance.
    pub fn log_map<T: Real>(&self, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
        self.check_on(x)?;
        self.check_on(y)?;
        let components = match self {
            Manifold::Euclidean(_) => sub(&y.coords, &x.coords),
            Manifold::Sphere(_) => {
                let c = dot(&x.coords, &y.coords);
                let w = axpy(&y.coords, -c, &x.coords);
                let s = norm(&w);
                let angle = s.atan2(c);
                if T::PI() - angle < lit(ANTIPODAL_MARGIN) {
                    return Err(Error::Antipodal { margin: ANTIPODAL_MARGIN });
                }
                if s == T::zero() {
                    vec![T::zero(); x.coords.len()]
                } else {
                    scale(&w, angle / s)
                }
            }
        };
        Ok(TangentVector { base: x.clone(), components })
    }

    /// Geodesic distance.
    pub fn distance<T: Real>(&self, x: &Point<T>, y: &Point<T>) -> T {
        match self {
            Manifold::Euclidean(_) => norm(&sub(&x.coords, &y.coords)),
            Manifold::Sphere(_) => {
                let c = dot(&x.coords, &y.coords);
                let s = norm(&axpy(&y.coords, -c, &x.coords));
                s.atan2(c)
            }
        }
    }

    /// Deterministic orthonormal frame of `T_x M`.
    ///
    /// Euclidean: the standard basis. Sphere: Gram–Schmidt applied to the
    /// standard basis of `R^{n+1}` after projecting out `x`, visiting the
    /// axes in order of increasing `|x_k|` so the most transverse axes go
    /// first.
    pub fn orthonormal_frame<T: Real>(&self, x: &Point<T>) -> Frame<T> {
        let n = self.dim();
        let amb = self.ambient_dim();
        let vectors = match self {
            Manifold::Euclidean(_) => (0..n)
                .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
                .collect(),
            Manifold::Sphere(_) => {
                let mut order: Vec<usize> = (0..amb).collect();
                order.sort_by(|&a, &b| {
                    x.coords[a].abs().partial_cmp(&x.coords[b].abs()).unwrap().then(a.cmp(&b))
                });
                let mut basis: Vec<Vec<T>> = Vec::with_capacity(n);
                for &k in &order {
                    if basis.len() == n {
                        break;
                    }
                    let mut v = vec![T::zero(); amb];
                    v[k] = T::one();
                    // two passes of modified Gram–Schmidt
                    for _ in 0..2 {
                        let c = dot(&v, &x.coords);
                        v = axpy(&v, -c, &x.coords);
                        for b in &basis {
                            let c = dot(&v, b);
                            v = axpy(&v, -c, b);
                        }
                    }
                    let len = norm(&v);
                    if len > lit(0.1) {
                        basis.push(scale(&v, T::one() / len));
                    }
                }
                basis
            }
        };
        Frame { base: x.clone(), vectors }
    }
}

impl<T: Real> Point<T> {
    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }
}

impl<T: Real> TangentVector<T> {
    /// Validates tangency (sphere) and wraps the components.
    pub fn new(base: &Point<T>, components: Vec<T>) -> Result<Self> {
        let m = base.manifold;
        if components.len() != m.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: m.ambient_dim(), found: components.len() });
        }
        if m.is_sphere() {
            let d = dot(&components, &base.coords).abs();
            if d > lit(TANGENCY_TOL) {
                return Err(Error::NotOnManifold(format!("|v . x| = {}", to_f64(d))));
            }
        }
        Ok(Self { base: base.clone(), components })
    }

    /// Orthogonal projection of an ambient vector onto `T_x M`.
    pub fn project(base: &Point<T>, ambient: &[T]) -> Self {
        let components = if base.manifold.is_sphere() {
            let c = dot(ambient, &base.coords);
            axpy(ambient, -c, &base.coords)
        } else {
            ambient.to_vec()
        };
        Self { base: base.clone(), components }
    }

    pub fn zero(base: &Point<T>) -> Self {
        Self { base: base.clone(), components: vec![T::zero(); base.coords.len()] }
    }

    pub fn base(&self) -> &Point<T> {
        &self.base
    }

    pub fn components(&self) -> &[T] {
        &self.components
    }

    pub fn norm(&self) -> T {
        norm(&self.components)
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.components, &other.components)
    }
}

impl<T: Real> Frame<T> {
    pub fn base(&self) -> &Point<T> {
        &self.base
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Frame vectors as tangent vectors.
    pub fn tangent_vectors(&self) -> Vec<TangentVector<T>> {
        self.vectors
            .iter()
            .map(|v| TangentVector { base: self.base.clone(), components: v.clone() })
            .collect()
    }

    /// Coordinates of an ambient tangent vector in this frame.
    pub fn coords_of(&self, ambient: &[T]) -> Vec<T> {
        self.vectors.iter().map(|e| dot(e, ambient)).collect()
    }

    /// Ambient vector with the given frame coordinates.
    pub fn ambient(&self, coords: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.base.coords.len()];
        for (c, e) in coords.iter().zip(&self.vectors) {
            for (o, &ei) in out.iter_mut().zip(e) {
                *o = *o + *c * ei;
            }
        }
        out
    }

    /// `exp_x(sum_i a_i e_i)`: the normal-coordinate chart centred at the base.
    pub fn chart(&self, a: &[T]) -> Point<T> {
        self.base.manifold.exp_unchecked(&self.base, &self.ambient(a))
    }

    /// Inverse chart: frame coordinates of `log_x(y)`.
    pub fn chart_inverse(&self, y: &Point<T>) -> Result<Vec<T>> {
        let v = self.base.manifold.log_map(&self.base, y)?;
        Ok(self.coords_of(&v.components))
    }

    pub fn tangent(&self, coords: &[T]) -> TangentVector<T> {
        TangentVector { base: self.base.clone(), components: self.ambient(coords) }
    }
}
