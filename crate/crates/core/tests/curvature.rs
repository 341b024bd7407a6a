mod common;

use common::{power, random_pair, zoo};
use mtwkit_core::cost_catalog::polynomial::Polynomial;
use mtwkit_core::cost_catalog::{A3Tag, CostSpec, Sign};
use mtwkit_core::mtw_curvature::{
    c_sectional_curvature, c_sectional_curvature_analytic, orthogonal_pair, scan_a3, A3Verdict, CurvatureOptions,
    ScanOptions,
};
use mtwkit_core::sampling::rng_for;
use mtwkit_core::transport_maps::{DomainSpec, Shape, Side};

fn domains(c: &CostSpec<f64>) -> (DomainSpec, DomainSpec) {
    if c.manifold().is_sphere() {
        (DomainSpec::new(Side::Omega, Shape::FullSphere), DomainSpec::new(Side::Lambda, Shape::FullSphere))
    } else {
        let n = c.dim();
        (DomainSpec::unit_box(Side::Omega, n, 1.0), DomainSpec::unit_box(Side::Lambda, n, 1.0))
    }
}

#[test]
fn fd_and_analytic_pipelines_agree() {
    // Near the diagonal the mixed Hessian of |x-y|^4 degenerates and the
    // fourth-order stencil loses accuracy (it converges to the analytic value
    // as the step shrinks), so those pairs stay further apart.
    for (name, c) in zoo() {
        let (min_sep, tol) = if name == "power(4,+)" { (0.5, 1e-2) } else { (0.0, 1e-3) };
        let mut worst: f64 = 0.0;
        let mut n = 0;
        for k in 0..200 {
            let (x, y) = random_pair(&c, 21, k, 0.3);
            let sep = x.coords().iter().zip(y.coords()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if sep < min_sep {
                continue;
            }
            let frame = c.manifold().orthonormal_frame(&x);
            let (eta, xi) = orthogonal_pair(&mut rng_for(21, 3, k), &frame);
            let Ok(fd) = c_sectional_curvature(&c, &x, &y, &eta, &xi, CurvatureOptions::default()) else { continue };
            let an = c_sectional_curvature_analytic(&c, &x, &y, &eta, &xi).unwrap();
            worst = worst.max((fd - an).abs() / (1.0 + an.abs()));
            n += 1;
        }
        assert!(n >= 100, "{name}: only {n} pairs evaluated");
        assert!(worst < tol, "{name}: relative disagreement {worst:e}");
    }
}

#[test]
fn quadratic_baseline_is_flat() {
    for dim in [2, 3] {
        let zero = CostSpec::perturbed_quadratic(dim, Polynomial::zero(dim), Polynomial::zero(dim)).unwrap();
        for c in [CostSpec::quadratic(dim).unwrap(), zero] {
            let (o, l) = domains(&c);
            let r = scan_a3(&c, &o, &l, &ScanOptions { seed: 5, ..Default::default() }).unwrap();
            assert_eq!(r.samples, 8000);
            assert!(r.values.iter().all(|v| v.2.abs() < 1e-7), "{}", c.id());
            assert_eq!(r.verdict, A3Verdict::A3wConsistent);
        }
    }
}

#[test]
fn catalog_verdicts() {
    for (name, c) in zoo() {
        let (o, l) = domains(&c);
        let r = scan_a3(&c, &o, &l, &ScanOptions { seed: 5, n_points: 300, ..Default::default() }).unwrap();
        let expected: &[A3Verdict] = match name {
            "quadratic" | "power(-2,-)" => &[A3Verdict::A3wConsistent],
            "power(4,+)" => &[A3Verdict::Violated],
            _ => &[A3Verdict::A3sConsistent],
        };
        assert!(expected.contains(&r.verdict), "{name}: {:?} min {:e}", r.verdict, r.min_value);
    }
}

#[test]
fn log_cost_is_strictly_positive() {
    let c = CostSpec::log(2).unwrap();
    let (o, l) = domains(&c);
    let r = scan_a3(&c, &o, &l, &ScanOptions { seed: 9, ..Default::default() }).unwrap();
    assert!(r.min_value > 1e-4, "{:e}", r.min_value);
    assert_eq!(r.verdict, A3Verdict::A3sConsistent);
}

#[test]
fn sphere_curvature_on_the_diagonal_is_two_thirds() {
    // For half the squared distance on the unit sphere, the curvature at
    // y = x on an orthonormal pair is 2/3 of the sectional curvature.
    let c = CostSpec::sphere_dist_sq(2).unwrap();
    for k in 0..50 {
        let (x, _) = random_pair(&c, 41, k, 0.0);
        let frame = c.manifold().orthonormal_frame(&x);
        let (eta, xi) = orthogonal_pair(&mut rng_for(41, 3, k), &frame);
        let v = c_sectional_curvature_analytic(&c, &x, &x, &eta, &xi).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-8, "{v}");
    }
}

#[test]
fn power_cost_signs() {
    // Sign table of the power family: the minus branch is A3W for p = -2,
    // A3S for -1/2 <= p < 1 (p = -1 included), while the plus branch fails.
    let omega = DomainSpec::unit_box(Side::Omega, 2, 1.0);
    let opts = ScanOptions { seed: 5, n_points: 300, ..Default::default() };
    for (p, s, ok) in [
        (-2.0, Sign::Plus, false),
        (-2.0, Sign::Minus, true),
        (2.0, Sign::Plus, true),
        (2.0, Sign::Minus, true),
        (-0.5, Sign::Plus, false),
        (-0.5, Sign::Minus, true),
        (-1.0, Sign::Plus, false),
        (-1.0, Sign::Minus, true),
        (0.5, Sign::Plus, false),
        (0.5, Sign::Minus, true),
        (4.0, Sign::Plus, false),
        (4.0, Sign::Minus, false),
    ] {
        let c = CostSpec::<f64>::power(2, p, s, A3Tag::Exploratory).unwrap();
        let r = scan_a3(&c, &omega, &omega, &opts).unwrap();
        assert_eq!(r.verdict != A3Verdict::Violated, ok, "p={p} {s:?}: min {:e}", r.min_value);
    }
}

#[test]
fn violations_survive_step_halving() {
    let c = power(4.0, Sign::Plus, A3Tag::Exploratory, 2);
    let (o, l) = domains(&c);
    let r = scan_a3(&c, &o, &l, &ScanOptions { seed: 3, n_points: 200, ..Default::default() }).unwrap();
    let (halved, analytic) = r.reverify(&c, CurvatureOptions::default()).unwrap();
    assert!(halved < 0.0 && analytic < 0.0, "{halved} {analytic}");
    assert!((halved - r.min_value).abs() < 1e-3 * r.min_value.abs());
}

#[test]
fn scans_are_reproducible() {
    let c = CostSpec::sqrt(2).unwrap();
    let (o, l) = domains(&c);
    let opts = ScanOptions { seed: 17, n_points: 100, ..Default::default() };
    let a = scan_a3(&c, &o, &l, &opts).unwrap();
    let b = scan_a3(&c, &o, &l, &opts).unwrap();
    assert_eq!(a.values, b.values);
}
