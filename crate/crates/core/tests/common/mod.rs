#![allow(dead_code)]

use mtwkit_core::cost_catalog::polynomial::{Monomial, Polynomial};
use mtwkit_core::cost_catalog::{A3Tag, CostSpec, Sign};
use mtwkit_core::geometry::{Manifold, Point};
use mtwkit_core::sampling::{random_unit, rng_for, uniform};

/// Convex perturbations with |grad| < 1 on [-1, 1]^dim.
pub fn perturbed(dim: usize) -> CostSpec<f64> {
    let mut f_terms: Vec<Monomial<f64>> = Vec::new();
    let mut g_terms: Vec<Monomial<f64>> = Vec::new();
    for k in 0..dim {
        let mut p2 = vec![0u32; dim];
        p2[k] = 2;
        let mut p4 = vec![0u32; dim];
        p4[k] = 4;
        f_terms.push(Monomial { coef: 0.1, powers: p2.clone() });
        f_terms.push(Monomial { coef: 0.02, powers: p4 });
        g_terms.push(Monomial { coef: 0.15, powers: p2 });
    }
    let mut lin = vec![0u32; dim];
    lin[0] = 1;
    g_terms.push(Monomial { coef: 0.05, powers: lin });
    CostSpec::perturbed_quadratic(dim, Polynomial::new(dim, f_terms).unwrap(), Polynomial::new(dim, g_terms).unwrap())
        .unwrap()
}

pub fn power(p: f64, sign: Sign, tag: A3Tag, dim: usize) -> CostSpec<f64> {
    CostSpec::power(dim, p, sign, tag).unwrap()
}

/// Every catalog cost in dimension 2 (sphere costs on S^2).
pub fn zoo() -> Vec<(&'static str, CostSpec<f64>)> {
    vec![
        ("quadratic", CostSpec::quadratic(2).unwrap()),
        ("perturbed_quadratic", perturbed(2)),
        ("sqrt", CostSpec::sqrt(2).unwrap()),
        ("log", CostSpec::log(2).unwrap()),
        ("power(-2,-)", power(-2.0, Sign::Minus, A3Tag::ExpectedA3W, 2)),
        ("power(-0.5,-)", power(-0.5, Sign::Minus, A3Tag::ExpectedA3W, 2)),
        ("power(0.5,-)", power(0.5, Sign::Minus, A3Tag::ExpectedA3W, 2)),
        ("power(4,+)", power(4.0, Sign::Plus, A3Tag::Exploratory, 2)),
        ("sphere_dist_sq", CostSpec::sphere_dist_sq(2).unwrap()),
        ("reflector_antenna", CostSpec::reflector_antenna(2).unwrap()),
    ]
}

/// Random pair with `x, y` in `[-1, 1]^n` (or on the sphere) kept at least
/// `margin` away from the singular set.
pub fn random_pair(c: &CostSpec<f64>, seed: u64, k: u64, margin: f64) -> (Point<f64>, Point<f64>) {
    let m = c.manifold();
    let mut rng = rng_for(seed, 77, k);
    loop {
        let (x, y) = match m {
            Manifold::Euclidean(n) => (
                m.point((0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect()).unwrap(),
                m.point((0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect()).unwrap(),
            ),
            Manifold::Sphere(n) => (
                m.project_point(random_unit(&mut rng, n + 1)).unwrap(),
                m.project_point(random_unit(&mut rng, n + 1)).unwrap(),
            ),
        };
        let d = c.singular_distance(&x, &y);
        let limit = match c.singular_set() {
            mtwkit_core::cost_catalog::SingularSet::Diagonal => c.r_min() + margin,
            mtwkit_core::cost_catalog::SingularSet::Antipodal => 1e-2 + margin,
            mtwkit_core::cost_catalog::SingularSet::None => 0.0,
        };
        if d >= limit {
            return (x, y);
        }
    }
}
