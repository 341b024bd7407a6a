//! Sliding mountains along c-segments: the DASM and monotonicity verifiers,
//! level-set fronts and the second-variation identity.

mod checks;
mod field;
mod fit;
mod front;
mod identity;
mod segment;

pub use checks::{dasm_check, monotonicity_check, SlidingCheckOptions};
pub use field::{sliding_mountain_derivs, MountainField, MountainValues, ThetaNode};
pub use identity::{identity_check, IdentityOptions};
pub use fit::{fit_circle, fit_sphere, SphereFit};
pub use front::{
    d2f_gradient_at_xm, expansion_rate, front_ode_track, front_point, front_sample, lemma62_check, pdot_at,
    positivity_check, q_theta, w_basis, w_grid, FrontSample, Lemma62Options, Lemma62Result, PositivityOptions,
    DEFAULT_H_W, REACHABILITY_PROBES,
};
pub use segment::{
    build_c_segment, build_c_segment_on, uniform_grid, CSegment, SegmentKinematics, LOG_COLLINEAR_OFFSET,
};

use crate::cost_catalog::CostSpec;
use crate::error::Result;
use crate::geometry::Point;
use crate::sampling::streams;
use crate::transport_maps::DomainSpec;

pub const DEFAULT_N_THETA: usize = 101;
pub const DEFAULT_X_SAMPLES: usize = 500;

/// `segment_kinematics(c, seg, theta)`.
pub fn segment_kinematics(seg: &CSegment, theta: f64) -> Result<SegmentKinematics> {
    seg.kinematics(theta)
}

/// `(x_m, y0, y1)` with a buildable c-segment.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentConfig {
    pub x_m: Point<f64>,
    pub y0: Point<f64>,
    pub y1: Point<f64>,
}

/// Draws configurations with `x_m` in `omega`, `y0, y1` in `lambda`, every
/// pair at least `clearance` beyond the admissibility margin, and a c-segment
/// whose default grid nodes all lie in `lambda`. Deterministic in `seed`; may return fewer
/// than `count` if the pools run out.
pub fn sample_segment_configs(
    c: &CostSpec<f64>,
    omega: &DomainSpec,
    lambda: &DomainSpec,
    count: usize,
    seed: u64,
    clearance: f64,
) -> Result<Vec<SegmentConfig>> {
    let m = c.manifold();
    let pool = 8 * count + 16;
    let xs: Vec<Point<f64>> = omega.sample(m, pool, seed, streams::CONFIGS)?;
    let ys: Vec<Point<f64>> = lambda.sample(m, 2 * pool, seed, streams::AUX)?;
    let clear = |x: &Point<f64>, y: &Point<f64>| {
        c.check_admissible(x, y).is_ok() && c.singular_distance(x, y) > c.admissibility_margin() + clearance
    };
    let mut out = Vec::with_capacity(count);
    for k in 0..pool {
        if out.len() == count {
            break;
        }
        let (x_m, y0, y1) = (&xs[k], &ys[2 * k], &ys[2 * k + 1]);
        if !clear(x_m, y0) || !clear(x_m, y1) {
            continue;
        }
        if build_c_segment_on(c, x_m, y0, y1, &uniform_grid(DEFAULT_N_THETA), Some(lambda)).is_ok() {
            out.push(SegmentConfig { x_m: x_m.clone(), y0: y0.clone(), y1: y1.clone() });
        }
    }
    Ok(out)
}
