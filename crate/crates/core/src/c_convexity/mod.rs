//! Discrete c-convex potentials: finite maxima of mountains
//! `-c(x, y_i) - v_i`, their c-transforms, contact sets and subdifferentials,
//! and the CSIS and contact-connectivity verifiers.

mod checks;
mod sampling;
mod subdiff;

pub use checks::{
    connectivity_check, csis_check, refined_grid, support_margin, ConnectivityOptions, CsisOptions,
    DEFAULT_CONNECTIVITY_TOL,
};
pub use sampling::{sample_potentials, PotentialConfig};
pub use subdiff::{c_subdifferential, subdifferential, SubdiffSet, HULL_TOL};

use rayon::prelude::*;

use crate::cost_catalog::CostSpec;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::transport_maps::DomainSpec;

/// Default relative activity tolerance of [`contact_set`].
pub const DEFAULT_ACTIVITY_TOL: f64 = 1e-9;
/// Default per-axis resolution of the `x`-grid in [`c_star_transform`].
pub const DEFAULT_TRANSFORM_GRID: usize = 64;

/// `phi(x) = max_i [-c(x, y_i) - v_i]` on `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCPotential {
    pub cost: CostSpec<f64>,
    pub support: Vec<(Point<f64>, f64)>,
    pub domain: DomainSpec,
}

impl DiscreteCPotential {
    pub fn new(cost: CostSpec<f64>, support: Vec<(Point<f64>, f64)>, domain: DomainSpec) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidArgument("potential needs at least one mountain".into()));
        }
        let m = cost.manifold();
        if support.iter().any(|(y, v)| y.manifold() != m || !v.is_finite()) {
            return Err(Error::InvalidArgument("support points must lie on the cost manifold with finite heights".into()));
        }
        domain.validate(m)?;
        Ok(Self { cost, support, domain })
    }

    /// Mountains through `x_m` at height zero: `v_i = -c(x_m, y_i)`, so that
    /// every mountain is active at `x_m`.
    pub fn creased_at(cost: CostSpec<f64>, x_m: &Point<f64>, ys: &[Point<f64>], domain: DomainSpec) -> Result<Self> {
        let support = ys.iter().map(|y| Ok((y.clone(), -cost.eval(x_m, y)?))).collect::<Result<Vec<_>>>()?;
        Self::new(cost, support, domain)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `-c(x, y_i) - v_i` for every `i`; errors on a singular pair.
    pub fn mountains(&self, x: &Point<f64>) -> Result<Vec<f64>> {
        self.support.iter().map(|(y, v)| Ok(-self.cost.eval(x, y)? - v)).collect()
    }

    /// `phi` with the cost's extended values, so a mountain whose cost is
    /// `+inf` at `x` contributes `-inf`. Used on grids that may touch the
    /// singular set.
    pub fn value_relaxed(&self, x: &Point<f64>) -> f64 {
        self.support
            .iter()
            .map(|(y, v)| -self.cost.value_extended(x, y) - v)
            .filter(|m| !m.is_nan())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `L^c` of the support heights at `x`: the max over the finite support.
pub fn c_transform_eval(phi: &DiscreteCPotential, x: &Point<f64>) -> Result<f64> {
    Ok(phi.mountains(x)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `L^{c*} phi(y) = max_x [-c(x, y) - phi(x)]` over `x_grid`.
pub fn c_star_transform_on(phi: &DiscreteCPotential, y_grid: &[Point<f64>], x_grid: &[Point<f64>]) -> Vec<(Point<f64>, f64)> {
    let phis: Vec<f64> = x_grid.par_iter().map(|x| phi.value_relaxed(x)).collect();
    y_grid.par_iter().map(|y| (y.clone(), c_star_value(&phi.cost, y, x_grid, &phis))).collect()
}

/// [`c_star_transform_on`] over the regular grid of `phi.domain` with
/// `per_axis` nodes per axis.
pub fn c_star_transform(phi: &DiscreteCPotential, y_grid: &[Point<f64>], per_axis: usize) -> Result<Vec<(Point<f64>, f64)>> {
    let xs = phi.domain.grid(phi.cost.manifold(), per_axis)?;
    Ok(c_star_transform_on(phi, y_grid, &xs))
}

pub(crate) fn c_star_value(c: &CostSpec<f64>, y: &Point<f64>, xs: &[Point<f64>], phis: &[f64]) -> f64 {
    xs.iter()
        .zip(phis)
        .map(|(x, p)| -c.value_extended(x, y) - p)
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Active mountains at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactSet {
    pub x: Point<f64>,
    pub active: Vec<usize>,
    /// `phi(x) + v_i + c(x, y_i)` for every `i`.
    pub gaps: Vec<f64>,
}

/// Indices with `gap <= tol (1 + |phi(x)|)`; the maximizer is always among
/// them. Singular pairs count as inactive.
pub fn contact_set(phi: &DiscreteCPotential, x: &Point<f64>, tol: f64) -> ContactSet {
    let vals: Vec<f64> = phi.support.iter().map(|(y, v)| -phi.cost.value_extended(x, y) - v).collect();
    let top = vals.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let gaps: Vec<f64> = vals.iter().map(|&m| if m.is_nan() { f64::INFINITY } else { top - m }).collect();
    let thr = tol * (1.0 + top.abs());
    let mut active: Vec<usize> = (0..gaps.len()).filter(|&i| gaps[i] <= thr).collect();
    if active.is_empty() {
        // all mountains -inf: keep the first so callers always see one
        active.push(0);
    }
    ContactSet { x: x.clone(), active, gaps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Manifold;
    use crate::transport_maps::Side;

    fn e(v: &[f64]) -> Point<f64> {
        Manifold::Euclidean(v.len()).point(v.to_vec()).unwrap()
    }

    fn crease() -> DiscreteCPotential {
        let c = CostSpec::quadratic(2).unwrap();
        DiscreteCPotential::new(c, vec![(e(&[-1.0, 0.0]), 0.0), (e(&[1.0, 0.0]), 0.0)], DomainSpec::unit_box(Side::Omega, 2, 1.0))
            .unwrap()
    }

    #[test]
    fn single_mountain_value() {
        let c = CostSpec::quadratic(2).unwrap();
        let phi = DiscreteCPotential::new(c, vec![(e(&[1.0, 0.0]), 0.0)], DomainSpec::unit_box(Side::Omega, 2, 1.0)).unwrap();
        assert_eq!(c_transform_eval(&phi, &e(&[0.0, 0.0])).unwrap(), -0.5);
        assert_eq!(contact_set(&phi, &e(&[0.3, 0.2]), DEFAULT_ACTIVITY_TOL).active, vec![0]);
    }

    #[test]
    fn crease_contacts() {
        let phi = crease();
        assert_eq!(contact_set(&phi, &e(&[0.0, 0.0]), DEFAULT_ACTIVITY_TOL).active, vec![0, 1]);
        assert_eq!(contact_set(&phi, &e(&[0.5, 0.0]), DEFAULT_ACTIVITY_TOL).active, vec![1]);
    }

    #[test]
    fn empty_support_rejected() {
        let c = CostSpec::quadratic(2).unwrap();
        assert!(DiscreteCPotential::new(c, vec![], DomainSpec::unit_box(Side::Omega, 2, 1.0)).is_err());
    }
}
