use super::{contact_set, DiscreteCPotential};
use crate::error::{Error, Result};
use crate::geometry::{Point, TangentVector};
use crate::linalg::{axpy, max_abs, norm, nnls, sub, Matrix};
use crate::transport_maps::c_exp_inverse;

/// Hull membership slack, relative to `1 + |p|`.
pub const HULL_TOL: f64 = 1e-9;

/// Generators `-grad_x c(x, y_i)` of the active mountains at `x`.
///
/// For the c-subdifferential the set is exactly the generators; for the
/// ordinary subdifferential it is their convex hull.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdiffSet {
    pub x: Point<f64>,
    pub generators: Vec<TangentVector<f64>>,
    /// Support indices the generators come from.
    pub indices: Vec<usize>,
    pub hull: bool,
}

impl SubdiffSet {
    /// Distance from `p` to the set: to the nearest generator, or to the hull
    /// (weighted least squares with the simplex constraint as an extra row).
    pub fn distance(&self, p: &[f64]) -> f64 {
        if !self.hull {
            return self.generators.iter().map(|g| norm(&sub(g.components(), p))).fold(f64::INFINITY, f64::min);
        }
        let d = p.len();
        let k = self.generators.len();
        let w = 1.0 + self.generators.iter().map(|g| max_abs(g.components())).fold(0.0, f64::max);
        let a = Matrix::from_fn(d + 1, k, |i, j| if i < d { self.generators[j].components()[i] } else { w });
        let mut b = p.to_vec();
        b.push(w);
        let lam = nnls(&a, &b);
        let combo = self.combine(&lam);
        let s: f64 = lam.iter().sum();
        norm(&sub(&combo, p)) + (s - 1.0).abs() * w
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.distance(p) <= tol * (1.0 + norm(p))
    }

    /// `sum_i w_i g_i` (ambient components).
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let d = self.x.coords().len();
        self.generators.iter().zip(weights).fold(vec![0.0; d], |acc, (g, &w)| axpy(&acc, w, g.components()))
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

fn generators(phi: &DiscreteCPotential, x: &Point<f64>, tol: f64, hull: bool) -> Result<SubdiffSet> {
    for (y, _) in &phi.support {
        phi.cost.check_admissible(x, y)?;
    }
    let cs = contact_set(phi, x, tol);
    let gens = cs.active.iter().map(|&i| c_exp_inverse(&phi.cost, x, &phi.support[i].0)).collect::<Result<Vec<_>>>()?;
    if gens.is_empty() {
        return Err(Error::InvalidArgument("no active mountain".into()));
    }
    Ok(SubdiffSet { x: x.clone(), generators: gens, indices: cs.active, hull })
}

/// `{-grad_x c(x, y_i) : i active}`, a finite set.
pub fn c_subdifferential(phi: &DiscreteCPotential, x: &Point<f64>, tol: f64) -> Result<SubdiffSet> {
    generators(phi, x, tol, false)
}

/// Convex hull of the active gradients.
pub fn subdifferential(phi: &DiscreteCPotential, x: &Point<f64>, tol: f64) -> Result<SubdiffSet> {
    generators(phi, x, tol, true)
}
