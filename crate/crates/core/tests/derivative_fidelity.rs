mod common;

use common::{random_pair, zoo};
use mtwkit_core::cost_catalog::{derivatives, fd_oracle, fd_oracle_richardson, relative_residual, CostSpec, DerivOrder};

#[test]
fn analytic_matches_finite_differences() {
    for (name, c) in zoo() {
        let tol = if name == "quadratic" { 1e-8 } else { 1e-5 };
        for k in 0..500 {
            let (x, y) = random_pair(&c, 11, k, 1e-3);
            let b = derivatives(&c, &x, &y, &DerivOrder::ALL).unwrap();
            for o in DerivOrder::ALL {
                let fd = fd_oracle(&c, &x, &y, o, 1e-4).unwrap();
                let r = relative_residual(b.get(o).unwrap(), &fd);
                assert!(r < tol, "{name} {o:?} sample {k}: residual {r:e}");
            }
        }
    }
}

#[test]
fn hessians_are_symmetric_and_mixed_partials_commute() {
    for (name, c) in zoo() {
        for k in 0..50 {
            let (x, y) = random_pair(&c, 12, k, 1e-3);
            let b = derivatives(&c, &x, &y, &DerivOrder::ALL).unwrap();
            let n = c.dim();
            let (hxx, hyy) = (b.hess_xx(), b.hess_yy());
            let t = b.dx_dyy();
            for i in 0..n {
                for j in 0..n {
                    assert!((hxx[(i, j)] - hxx[(j, i)]).abs() < 1e-10, "{name}");
                    assert!((hyy[(i, j)] - hyy[(j, i)]).abs() < 1e-10, "{name}");
                    for l in 0..n {
                        assert!((t.get(&[l, i, j]) - t.get(&[l, j, i])).abs() < 1e-9, "{name}");
                    }
                }
            }
        }
    }
}

#[test]
fn symmetric_costs_agree_under_swap() {
    for c in [CostSpec::<f64>::log(2).unwrap(), CostSpec::quadratic(2).unwrap(), CostSpec::sqrt(3).unwrap()] {
        for k in 0..100 {
            let (x, y) = random_pair(&c, 13, k, 0.0);
            assert!((c.eval(&x, &y).unwrap() - c.eval(&y, &x).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn richardson_improves_sqrt_cost() {
    let c = CostSpec::<f64>::sqrt(2).unwrap();
    let mut coarse = 0.0;
    let mut fine = 0.0;
    let mut extrapolated = 0.0;
    for k in 0..50 {
        let (x, y) = random_pair(&c, 14, k, 0.0);
        let b = derivatives(&c, &x, &y, &[DerivOrder::HessXX]).unwrap();
        let a = b.get(DerivOrder::HessXX).unwrap();
        let h = 2e-2;
        coarse += relative_residual(a, &fd_oracle(&c, &x, &y, DerivOrder::HessXX, h).unwrap());
        fine += relative_residual(a, &fd_oracle(&c, &x, &y, DerivOrder::HessXX, h / 2.0).unwrap());
        extrapolated += relative_residual(a, &fd_oracle_richardson(&c, &x, &y, DerivOrder::HessXX, h).unwrap());
    }
    let ratio = coarse / fine;
    assert!((3.0..5.0).contains(&ratio), "halving ratio {ratio}");
    assert!(extrapolated < fine / 10.0);
}
