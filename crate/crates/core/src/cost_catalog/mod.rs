//! Catalog of transport costs with analytic derivatives up to fourth mixed
//! order and an independent finite-difference oracle.
//!
//! | id | cost | manifold |
//! |----|------|----------|
//! | `Quadratic` | `1/2 |x-y|^2` | `R^n` |
//! | `PerturbedQuadratic` | `|x-y|^2 + (f(x) - g(y))^2` | `R^n` |
//! | `Sqrt` | `sqrt(1 + |x-y|^2)` | `R^n` |
//! | `Log` | `-1/2 log |x-y|^2` | `R^n` minus the diagonal |
//! | `Power` | `+-1/p |x-y|^p` | `R^n` |
//! | `SphereDistSq` | `1/2 d(x,y)^2` | `S^n` |
//! | `ReflectorAntenna` | `-1/2 log |x-y|^2` | `S^n` minus the diagonal |

mod checks;
mod derivs;
mod fd;
pub mod polynomial;
pub mod profile;

pub use checks::{check_a1_a2, A1A2Options};
pub use derivs::{derivatives, mixed_partial, DerivOrder, DerivativeBlock, Tensor};
pub use fd::{fd_oracle, fd_oracle_richardson, relative_residual};

pub(crate) use derivs::derivatives_relaxed;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point};
use crate::linalg::{dot, norm, sub};
use crate::scalar::{lit, to_f64, Real};
use polynomial::Polynomial;

/// Default exclusion radius around the diagonal for singular costs.
pub const DEFAULT_R_MIN: f64 = 0.05;
/// Angular margin from the antipode required for sphere-distance derivatives.
pub const ANTIPODAL_DERIV_MARGIN: f64 = 1e-2;
/// Angular margin from the antipode required for sphere-distance values.
pub const ANTIPODAL_VALUE_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

/// Whether a power cost is claimed to satisfy A3W or is only explored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A3Tag {
    ExpectedA3W,
    Exploratory,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CostKind<T> {
    Quadratic,
    PerturbedQuadratic { f: Polynomial<T>, g: Polynomial<T> },
    Sqrt,
    Log,
    Power { exponent: T, sign: Sign },
    SphereDistSq,
    ReflectorAntenna,
}

/// Where a cost stops being smooth (or stops satisfying A2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularSet {
    None,
    Diagonal,
    Antipodal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostSpec<T> {
    kind: CostKind<T>,
    dim: usize,
    r_min: T,
    tag: A3Tag,
}

impl<T: Real> CostSpec<T> {
    fn build(kind: CostKind<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCost("dimension must be >= 1".into()));
        }
        Ok(Self { kind, dim, r_min: lit(DEFAULT_R_MIN), tag: A3Tag::ExpectedA3W })
    }

    pub fn quadratic(dim: usize) -> Result<Self> {
        Self::build(CostKind::Quadratic, dim)
    }

    pub fn sqrt(dim: usize) -> Result<Self> {
        Self::build(CostKind::Sqrt, dim)
    }

    pub fn log(dim: usize) -> Result<Self> {
        Self::build(CostKind::Log, dim)
    }

    pub fn sphere_dist_sq(dim: usize) -> Result<Self> {
        Self::build(CostKind::SphereDistSq, dim)
    }

    /// Logarithmic cost on the unit sphere `S^dim`.
    pub fn reflector_antenna(dim: usize) -> Result<Self> {
        Self::build(CostKind::ReflectorAntenna, dim)
    }

    /// `|x-y|^2 + (f(x) - g(y))^2` with polynomial `f`, `g` of degree <= 4.
    pub fn perturbed_quadratic(dim: usize, f: Polynomial<T>, g: Polynomial<T>) -> Result<Self> {
        if f.dim() != dim || g.dim() != dim {
            return Err(Error::InvalidCost("perturbation polynomials must match the dimension".into()));
        }
        Self::build(CostKind::PerturbedQuadratic { f, g }, dim)
    }

    /// `sign / p * |x-y|^p`.
    ///
    /// With [`A3Tag::ExpectedA3W`] the exponent must lie in the range where
    /// A3W is claimed, see [`expected_a3w_power`].
    pub fn power(dim: usize, exponent: T, sign: Sign, tag: A3Tag) -> Result<Self> {
        if exponent == T::zero() || !exponent.is_finite() {
            return Err(Error::InvalidCost("power exponent must be finite and nonzero".into()));
        }
        if tag == A3Tag::ExpectedA3W && !expected_a3w_power(to_f64(exponent), sign) {
            return Err(Error::InvalidCost(format!(
                "exponent {} with sign {:?} is outside the expected-A3W range; tag it exploratory",
                to_f64(exponent),
                sign
            )));
        }
        let mut c = Self::build(CostKind::Power { exponent, sign }, dim)?;
        c.tag = tag;
        Ok(c)
    }

    pub fn with_r_min(mut self, r_min: T) -> Result<Self> {
        if !(r_min > T::zero()) {
            return Err(Error::InvalidCost("r_min must be positive".into()));
        }
        self.r_min = r_min;
        Ok(self)
    }

    pub fn kind(&self) -> &CostKind<T> {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_min(&self) -> T {
        self.r_min
    }

    pub fn tag(&self) -> A3Tag {
        self.tag
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> &'static str {
        match self.kind {
            CostKind::Quadratic => "quadratic",
            CostKind::PerturbedQuadratic { .. } => "perturbed_quadratic",
            CostKind::Sqrt => "sqrt",
            CostKind::Log => "log",
            CostKind::Power { .. } => "power",
            CostKind::SphereDistSq => "sphere_dist_sq",
            CostKind::ReflectorAntenna => "reflector_antenna",
        }
    }

    /// The manifold carrying both `x` and `y`.
    pub fn manifold(&self) -> Manifold {
        match self.kind {
            CostKind::SphereDistSq | CostKind::ReflectorAntenna => Manifold::Sphere(self.dim),
            _ => Manifold::Euclidean(self.dim),
        }
    }

    pub fn singular_set(&self) -> SingularSet {
        match &self.kind {
            CostKind::Log | CostKind::ReflectorAntenna => SingularSet::Diagonal,
            CostKind::Power { exponent, .. } if !is_even_positive_integer(to_f64(*exponent)) => SingularSet::Diagonal,
            CostKind::SphereDistSq => SingularSet::Antipodal,
            _ => SingularSet::None,
        }
    }

    /// `c(x,y) = c(y,x)` holds identically.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            CostKind::PerturbedQuadratic { f, g } => f == g,
            _ => true,
        }
    }

    /// The dual cost `c*(y, x) = c(x, y)`.
    pub fn dual(&self) -> Self {
        let mut d = self.clone();
        if let CostKind::PerturbedQuadratic { f, g } = &self.kind {
            d.kind = CostKind::PerturbedQuadratic { f: g.clone(), g: f.clone() };
        }
        d
    }

    /// The `|x-y|^p` exponent of radial Euclidean costs.
    pub(crate) fn radial_profile(&self, s: T) -> Option<profile::Jet<T>> {
        Some(match &self.kind {
            CostKind::Quadratic => profile::half_linear(s),
            CostKind::Sqrt => profile::sqrt_one_plus(s),
            CostKind::Log => profile::neg_half_log(s),
            CostKind::Power { exponent, sign } => profile::power(s, *exponent, sign.value()),
            _ => return None,
        })
    }

    pub(crate) fn sphere_profile(&self, s: T) -> Option<profile::Jet<T>> {
        Some(match &self.kind {
            CostKind::SphereDistSq => profile::half_arccos_sq(s),
            CostKind::ReflectorAntenna => profile::neg_half_log_chord(s),
            _ => return None,
        })
    }

    fn check_points(&self, x: &Point<T>, y: &Point<T>) -> Result<()> {
        let m = self.manifold();
        for p in [x, y] {
            if p.manifold() != m {
                return Err(Error::InvalidArgument(format!("point on {:?}, cost lives on {:?}", p.manifold(), m)));
            }
        }
        Ok(())
    }

    /// Distance-like quantity compared against the exclusion radius:
    /// Euclidean (chordal) distance for the diagonal, angular distance to the
    /// antipode for antipodal singularities.
    pub fn singular_distance(&self, x: &Point<T>, y: &Point<T>) -> T {
        match self.singular_set() {
            SingularSet::None => T::infinity(),
            SingularSet::Diagonal => norm(&sub(x.coords(), y.coords())),
            SingularSet::Antipodal => T::PI() - self.manifold().distance(x, y),
        }
    }

    /// Smallest [`singular_distance`](Self::singular_distance) admitted for
    /// derivative evaluation (zero without a singular set).
    pub fn admissibility_margin(&self) -> T {
        match self.singular_set() {
            SingularSet::None => T::zero(),
            SingularSet::Diagonal => self.r_min,
            SingularSet::Antipodal => lit(ANTIPODAL_DERIV_MARGIN),
        }
    }

    /// Admissibility for derivative evaluation.
    pub fn check_admissible(&self, x: &Point<T>, y: &Point<T>) -> Result<()> {
        self.check_points(x, y)?;
        if self.singular_set() == SingularSet::None {
            return Ok(());
        }
        let radius = self.admissibility_margin();
        let d = self.singular_distance(x, y);
        if d < radius {
            return Err(Error::SingularPair { distance: to_f64(d), radius: to_f64(radius) });
        }
        Ok(())
    }

    /// The cost value; requires `(x, y)` outside the singular set by `r_min`
    /// (sphere distance: `1e-6` rad from the antipode).
    pub fn eval(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        self.check_points(x, y)?;
        let radius = match self.singular_set() {
            SingularSet::None => T::zero(),
            SingularSet::Diagonal => self.r_min,
            SingularSet::Antipodal => lit(ANTIPODAL_VALUE_MARGIN),
        };
        let d = self.singular_distance(x, y);
        if d < radius {
            return Err(Error::SingularPair { distance: to_f64(d), radius: to_f64(radius) });
        }
        Ok(self.value_extended(x, y))
    }

    /// Mathematical value without the exclusion radius; `+inf` on the
    /// diagonal of the logarithmic costs, `-inf`/`+inf` for negative powers.
    pub fn value_extended(&self, x: &Point<T>, y: &Point<T>) -> T {
        let (xc, yc) = (x.coords(), y.coords());
        match &self.kind {
            CostKind::PerturbedQuadratic { f, g } => {
                let u = sub(xc, yc);
                let d = f.eval(xc) - g.eval(yc);
                dot(&u, &u) + d * d
            }
            CostKind::SphereDistSq | CostKind::ReflectorAntenna => {
                let s = dot(xc, yc).max(-T::one()).min(T::one());
                match self.kind {
                    CostKind::SphereDistSq => {
                        let d = self.manifold().distance(x, y);
                        d * d / lit(2.0)
                    }
                    _ => {
                        let u = sub(xc, yc);
                        let chord2 = dot(&u, &u);
                        if chord2 == T::zero() {
                            let _ = s;
                            T::infinity()
                        } else {
                            -chord2.ln() / lit(2.0)
                        }
                    }
                }
            }
            _ => {
                let u = sub(xc, yc);
                let s = dot(&u, &u);
                if s == T::zero() {
                    match &self.kind {
                        CostKind::Log => return T::infinity(),
                        CostKind::Power { exponent, sign } if *exponent < T::zero() => {
                            return sign.value::<T>() * T::neg_infinity();
                        }
                        _ => {}
                    }
                }
                self.radial_profile(s).expect("radial cost")[0]
            }
        }
    }

    /// For the perturbed quadratic cost, verifies `|grad f| < 1` and
    /// `|grad g| < 1` at the given sample points. Other costs pass trivially.
    pub fn check_gradient_bound(&self, samples: &[Point<T>]) -> Result<()> {
        if let CostKind::PerturbedQuadratic { f, g } = &self.kind {
            for p in samples {
                for (name, poly) in [("f", f), ("g", g)] {
                    let gn = norm(&poly.gradient(p.coords()));
                    if !(gn < T::one()) {
                        return Err(Error::InvalidCost(format!(
                            "|grad {name}| = {} >= 1 at {:?}",
                            to_f64(gn),
                            p.coords().iter().map(|&c| to_f64(c)).collect::<Vec<_>>()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn is_even_positive_integer(p: f64) -> bool {
    p > 0.0 && p.fract() == 0.0 && (p as i64) % 2 == 0
}

/// Exponent/sign pairs for which the power cost is claimed to satisfy A3W:
/// `p = 2` with either sign (both are multiples of the quadratic cost), and
/// the minus sign for `p = -2` or `-1/2 <= p < 1`.
pub fn expected_a3w_power(p: f64, sign: Sign) -> bool {
    p == 2.0 || (sign == Sign::Minus && (p == -2.0 || ((-0.5..1.0).contains(&p) && p != 0.0)))
}

/// One row of the human-readable catalog.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub formula: &'static str,
    pub parameters: &'static str,
    pub singular_set: &'static str,
    pub stated_status: &'static str,
    pub example: &'static str,
}

/// The catalog: six literature examples plus the exploratory power alias.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            id: "perturbed_quadratic",
            formula: "|x-y|^2 + |f(x)-g(y)|^2",
            parameters: "f, g convex polynomials (deg <= 4), |grad f|, |grad g| < 1; f = g = 0 is the quadratic baseline",
            singular_set: "none",
            stated_status: "A3W (A3S for strictly convex f, g)",
            example: "Example 7.1",
        },
        CatalogEntry {
            id: "sqrt",
            formula: "sqrt(1 + |x-y|^2)",
            parameters: "none",
            singular_set: "none",
            stated_status: "A3W/A3S as in Example 7.1",
            example: "Example 7.2",
        },
        CatalogEntry {
            id: "log",
            formula: "-1/2 log |x-y|^2",
            parameters: "r_min (default 0.05)",
            singular_set: "x = y",
            stated_status: "A3S",
            example: "Example 7.3",
        },
        CatalogEntry {
            id: "power",
            formula: "+-1/p |x-y|^p",
            parameters: "p = 2 (either sign); p = -2 or -1/2 <= p < 1 with minus sign; r_min",
            singular_set: "x = y unless p is an even positive integer",
            stated_status: "A3W for p = +-2, -1/2; A3S for -1/2 < p < 1",
            example: "Example 7.4",
        },
        CatalogEntry {
            id: "sphere_dist_sq",
            formula: "1/2 d(x,y)^2 on S^n",
            parameters: "dimension n",
            singular_set: "antipodal pairs",
            stated_status: "A3S",
            example: "Example 7.5",
        },
        CatalogEntry {
            id: "reflector_antenna",
            formula: "-1/2 log |x-y|^2 on S^n",
            parameters: "dimension n, r_min",
            singular_set: "x = y",
            stated_status: "A3S",
            example: "Example 7.6",
        },
        CatalogEntry {
            id: "power (exploratory)",
            formula: "+1/p |x-y|^p, e.g. p = 4",
            parameters: "any p != 0",
            singular_set: "x = y unless p is an even positive integer",
            stated_status: "no claim; p = 4 violates A3W",
            example: "Example 7.4 (outside stated range)",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e2(a: f64, b: f64) -> Point<f64> {
        Manifold::Euclidean(2).point(vec![a, b]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let q = CostSpec::<f64>::quadratic(2).unwrap();
        assert_abs_diff_eq!(q.eval(&e2(0.0, 0.0), &e2(3.0, 4.0)).unwrap(), 12.5, epsilon = 1e-14);
        let l = CostSpec::<f64>::log(2).unwrap();
        assert_abs_diff_eq!(l.eval(&e2(0.0, 0.0), &e2(1.0, 0.0)).unwrap(), 0.0, epsilon = 1e-15);
        let s = CostSpec::<f64>::sqrt(2).unwrap();
        assert_abs_diff_eq!(s.eval(&e2(0.3, 0.2), &e2(0.3, 0.2)).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_pairs_rejected() {
        let l = CostSpec::<f64>::log(2).unwrap();
        let err = l.eval(&e2(0.0, 0.0), &e2(0.01, 0.0)).unwrap_err();
        assert!(matches!(err, Error::SingularPair { .. }));
        assert_eq!(l.value_extended(&e2(0.0, 0.0), &e2(0.0, 0.0)), f64::INFINITY);

        let s = CostSpec::<f64>::sphere_dist_sq(2).unwrap();
        let m = s.manifold();
        let n = m.point(vec![0.0, 0.0, 1.0]).unwrap();
        let south = m.point(vec![0.0, 0.0, -1.0]).unwrap();
        assert!(s.eval(&n, &south).is_err());
        let near = m.project_point(vec![1e-3, 0.0, -1.0]).unwrap();
        assert!(s.eval(&n, &near).is_ok());
        assert!(s.check_admissible(&n, &near).is_err());
    }

    #[test]
    fn power_range_enforced_for_expected_tag() {
        assert!(CostSpec::<f64>::power(2, 4.0, Sign::Plus, A3Tag::ExpectedA3W).is_err());
        assert!(CostSpec::<f64>::power(2, 4.0, Sign::Plus, A3Tag::Exploratory).is_ok());
        assert!(CostSpec::<f64>::power(2, -0.5, Sign::Minus, A3Tag::ExpectedA3W).is_ok());
        assert!(CostSpec::<f64>::power(2, 0.5, Sign::Plus, A3Tag::ExpectedA3W).is_err());
        assert!(CostSpec::<f64>::power(2, -2.0, Sign::Minus, A3Tag::ExpectedA3W).is_ok());
        assert!(CostSpec::<f64>::power(2, -2.0, Sign::Plus, A3Tag::ExpectedA3W).is_err());
        assert!(CostSpec::<f64>::power(2, 2.0, Sign::Minus, A3Tag::ExpectedA3W).is_ok());
        assert!(CostSpec::<f64>::power(2, 0.0, Sign::Plus, A3Tag::Exploratory).is_err());
    }

    #[test]
    fn symmetric_costs_are_symmetric() {
        let pts = [e2(0.1, -0.4), e2(0.9, 0.3)];
        for c in [CostSpec::quadratic(2).unwrap(), CostSpec::log(2).unwrap(), CostSpec::sqrt(2).unwrap()] {
            let a = c.eval(&pts[0], &pts[1]).unwrap();
            let b = c.eval(&pts[1], &pts[0]).unwrap();
            assert!((a - b).abs() <= 1e-12);
            assert!(c.is_symmetric());
        }
    }

    #[test]
    fn gradient_bound_checked_on_samples() {
        let f = Polynomial::scaled_square_norm(2, 0.1);
        let c = CostSpec::perturbed_quadratic(2, f.clone(), f).unwrap();
        assert!(c.check_gradient_bound(&[e2(1.0, 1.0)]).is_ok());
        assert!(c.check_gradient_bound(&[e2(6.0, 0.0)]).is_err());
    }

    #[test]
    fn catalog_has_seven_rows() {
        let rows = catalog_entries();
        assert_eq!(rows.len(), 7);
        assert!(rows.iter().any(|r| r.id == "log" && r.stated_status == "A3S" && r.example == "Example 7.3"));
        assert!(rows.iter().any(|r| r.id == "sqrt" && r.example == "Example 7.2"));
    }
}
