mod common;

use common::{random_pair, zoo};
use mtwkit_core::cost_catalog::CostSpec;
use mtwkit_core::geometry::{Manifold, Point};
use mtwkit_core::sampling::{random_unit, rng_for};
use mtwkit_core::transport_maps::{c_exp, c_exp_inverse, cstar_exp, cstar_exp_inverse, symmetry_residual};
use proptest::prelude::*;
use std::time::Instant;

fn dist(a: &Point<f64>, b: &Point<f64>) -> f64 {
    a.coords().iter().zip(b.coords()).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

/// Central differences of `c(., y)` along the ambient axes, projected to
/// the tangent space for sphere costs.
fn fd_minus_grad_x(c: &CostSpec<f64>, x: &Point<f64>, y: &Point<f64>) -> Vec<f64> {
    let m = c.manifold();
    let frame = m.orthonormal_frame(x);
    let h = 1e-6;
    let coords: Vec<f64> = (0..frame.dim())
        .map(|k| {
            let mut e = vec![0.0; frame.dim()];
            e[k] = h;
            let fwd = m.exp_map(x, &frame.tangent(&e)).unwrap();
            e[k] = -h;
            let bwd = m.exp_map(x, &frame.tangent(&e)).unwrap();
            -(c.eval(&fwd, y).unwrap() - c.eval(&bwd, y).unwrap()) / (2.0 * h)
        })
        .collect();
    frame.tangent(&coords).components().to_vec()
}

#[test]
fn round_trips_and_symmetry() {
    let start = Instant::now();
    for (name, c) in zoo() {
        for k in 0..200 {
            let (x, y) = random_pair(&c, 51, k, 0.05);
            let p = c_exp_inverse(&c, &x, &y).unwrap();
            let back = c_exp(&c, &x, &p).unwrap().target;
            assert!(dist(&back, &y) < 1e-8, "{name} sample {k}: {:e}", dist(&back, &y));

            let q = cstar_exp_inverse(&c, &x, &y).unwrap();
            let back = cstar_exp(&c, &y, &q).unwrap().target;
            assert!(dist(&back, &x) < 1e-8, "{name} dual sample {k}: {:e}", dist(&back, &x));
        }
        for k in 0..100 {
            let (x, y) = random_pair(&c, 52, k, 0.05);
            let m = c.manifold();
            let mut rng = rng_for(52, 9, k);
            let n = m.dim();
            let eta = m.orthonormal_frame(&x).tangent(&random_unit(&mut rng, n));
            let xi = m.orthonormal_frame(&y).tangent(&random_unit(&mut rng, n));
            let r = symmetry_residual(&c, &x, &y, &eta, &xi).unwrap();
            assert!(r < 1e-8, "{name} sample {k}: {r:e}");
        }
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "{:?}", start.elapsed());
}

#[test]
fn inverse_matches_finite_difference_gradient() {
    for (name, c) in zoo() {
        for k in 0..50 {
            let (x, y) = random_pair(&c, 53, k, 0.05);
            let p = c_exp_inverse(&c, &x, &y).unwrap();
            let fd = fd_minus_grad_x(&c, &x, &y);
            let err = p.components().iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = 1.0 + fd.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(err < 1e-6 * scale, "{name} sample {k}: {err:e}");
        }
    }
}

#[test]
fn sphere_c_exp_is_the_riemannian_exponential() {
    let c = CostSpec::sphere_dist_sq(2).unwrap();
    let m = c.manifold();
    for k in 0..50 {
        let (x, _) = random_pair(&c, 54, k, 0.0);
        let mut rng = rng_for(54, 9, k);
        let v = m.orthonormal_frame(&x).tangent(&random_unit(&mut rng, 2).iter().map(|a| 2.5 * a).collect::<Vec<_>>());
        let y = c_exp(&c, &x, &v).unwrap().target;
        assert!(dist(&y, &m.exp_map(&x, &v).unwrap()) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_c_exp_is_translation(a in -2.0f64..2.0, b in -2.0f64..2.0, u in -2.0f64..2.0, v in -2.0f64..2.0) {
        let c = CostSpec::quadratic(2).unwrap();
        let m = Manifold::Euclidean(2);
        let x = m.point(vec![a, b]).unwrap();
        let p = m.orthonormal_frame(&x).tangent(&[u, v]);
        let y = c_exp(&c, &x, &p).unwrap().target;
        prop_assert!((y.coords()[0] - (a + u)).abs() < 1e-12 && (y.coords()[1] - (b + v)).abs() < 1e-12);
        let back = c_exp_inverse(&c, &x, &y).unwrap();
        prop_assert!((back.components()[0] - u).abs() < 1e-10 && (back.components()[1] - v).abs() < 1e-10);
    }

    #[test]
    fn log_round_trip(a in -1.0f64..1.0, b in -1.0f64..1.0, r in 0.1f64..1.5, t in 0.0f64..6.28) {
        let c = CostSpec::log(2).unwrap();
        let m = Manifold::Euclidean(2);
        let x = m.point(vec![a, b]).unwrap();
        let y = m.point(vec![a + r * t.cos(), b + r * t.sin()]).unwrap();
        let p = c_exp_inverse(&c, &x, &y).unwrap();
        // -grad_x of -1/2 log|x-y|^2 is (x-y)/|x-y|^2.
        prop_assert!((p.components()[0] + t.cos() / r).abs() < 1e-10);
        let back = c_exp(&c, &x, &p).unwrap().target;
        prop_assert!(dist(&back, &y) < 1e-9);
    }
}
