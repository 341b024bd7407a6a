use super::derivs::DerivOrder;
use super::{derivatives, CostSpec};
use crate::geometry::Point;
use crate::linalg::{norm, sub};
use crate::report::{VerificationReport, Witness};
use crate::scalar::{to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct A1A2Options {
    /// `|det D²_xy c|` must exceed this.
    pub det_tol: f64,
    /// Two targets closer than this count as the same sample.
    pub y_separation: f64,
    /// Distinct targets whose `p` values are closer than this violate A1.
    pub p_resolution: f64,
}

impl Default for A1A2Options {
    fn default() -> Self {
        Self { det_tol: 1e-8, y_separation: 1e-6, p_resolution: 1e-10 }
    }
}

fn coords<T: Real>(p: &Point<T>) -> Vec<f64> {
    p.coords().iter().map(|&v| to_f64(v)).collect()
}

/// A2 (nondegenerate mixed Hessian) at every sample, and a sampled
/// necessary condition for A1: for a fixed `x`, distinct targets must give
/// distinguishable `p = -grad_x c(x, y)`.
pub fn check_a1_a2<T: Real>(c: &CostSpec<T>, samples: &[(Point<T>, Point<T>)], opts: A1A2Options) -> VerificationReport {
    let mut report = VerificationReport::new("a1_a2", c.id());
    let mut with_p: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, (x, y)) in samples.iter().enumerate() {
        let b = match derivatives(c, x, y, &[DerivOrder::GradX, DerivOrder::HessXY]) {
            Ok(b) => b,
            Err(_) => {
                report.skipped += 1;
                continue;
            }
        };
        report.samples += 1;
        let det = to_f64(b.hess_xy().det()).abs();
        report.observe_margin(det - opts.det_tol);
        if !(det > opts.det_tol) {
            report.failures += 1;
            if report.witnesses.len() < 8 {
                report.witnesses.push(
                    Witness::new("A2: mixed Hessian nearly singular")
                        .with("x", coords(x))
                        .with("y", coords(y))
                        .with_scalar("abs_det", det),
                );
            }
        }
        let p: Vec<f64> = b.frame_x.ambient(b.grad_x()).iter().map(|&v| -to_f64(v)).collect();
        with_p.push((k, p));
    }

    let mut a1_pairs = 0u64;
    for (a, (ka, pa)) in with_p.iter().enumerate() {
        for (kb, pb) in with_p.iter().skip(a + 1) {
            let (xa, ya) = (&samples[*ka].0, &samples[*ka].1);
            let (xb, yb) = (&samples[*kb].0, &samples[*kb].1);
            if xa != xb {
                continue;
            }
            let dy = to_f64(norm(&sub(ya.coords(), yb.coords())));
            if dy <= opts.y_separation {
                continue;
            }
            a1_pairs += 1;
            let dp = norm(&sub(pa, pb));
            if dp < opts.p_resolution {
                report.failures += 1;
                if report.witnesses.len() < 8 {
                    report.witnesses.push(
                        Witness::new("A1: distinct targets share a gradient")
                            .with("x", coords(xa))
                            .with("y1", coords(ya))
                            .with("y2", coords(yb))
                            .with_scalar("p_distance", dp),
                    );
                }
            }
        }
    }
    report.metric("a1_pairs_compared", a1_pairs as f64);
    report.finalize()
}
