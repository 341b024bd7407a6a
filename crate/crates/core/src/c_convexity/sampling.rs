use crate::cost_catalog::CostSpec;
use crate::error::Result;
use crate::geometry::Point;
use crate::mountain_lab::{build_c_segment_on, sample_segment_configs, uniform_grid, DEFAULT_N_THETA};
use crate::sampling::streams;
use crate::transport_maps::DomainSpec;

use super::DiscreteCPotential;

/// Support points of a potential creased at `x_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialConfig {
    pub x_m: Point<f64>,
    pub ys: Vec<Point<f64>>,
}

impl PotentialConfig {
    /// All mountains at height zero at `x_m`.
    pub fn potential(&self, c: &CostSpec<f64>, omega: &DomainSpec) -> Result<DiscreteCPotential> {
        DiscreteCPotential::creased_at(c.clone(), &self.x_m, &self.ys, omega.clone())
    }
}

const EXTRA_CANDIDATES: usize = 8;

/// Two- or three-mountain configurations whose pairwise c-segments at `x_m`
/// stay in `lambda` (see [`sample_segment_configs`]). Deterministic in `seed`.
pub fn sample_potentials(
    c: &CostSpec<f64>,
    omega: &DomainSpec,
    lambda: &DomainSpec,
    count: usize,
    n_mountains: usize,
    seed: u64,
    clearance: f64,
) -> Result<Vec<PotentialConfig>> {
    let pairs = sample_segment_configs(c, omega, lambda, if n_mountains > 2 { 2 * count } else { count }, seed, clearance)?;
    if n_mountains <= 2 {
        return Ok(pairs.into_iter().map(|s| PotentialConfig { x_m: s.x_m, ys: vec![s.y0, s.y1] }).collect());
    }
    let extra: Vec<Point<f64>> = lambda.sample(c.manifold(), EXTRA_CANDIDATES * pairs.len(), seed, streams::LAMBDA)?;
    let grid = uniform_grid(DEFAULT_N_THETA);
    let mut out = Vec::with_capacity(count);
    for (k, s) in pairs.into_iter().enumerate() {
        if out.len() == count {
            break;
        }
        let mut ys = vec![s.y0, s.y1];
        while ys.len() < n_mountains {
            let pick = extra[EXTRA_CANDIDATES * k..EXTRA_CANDIDATES * (k + 1)].iter().find(|y| {
                c.check_admissible(&s.x_m, y).is_ok()
                    && c.singular_distance(&s.x_m, y) > c.admissibility_margin() + clearance
                    && !ys.contains(y)
                    && ys.iter().all(|z| build_c_segment_on(c, &s.x_m, z, y, &grid, Some(lambda)).is_ok())
            });
            match pick {
                Some(y) => ys.push(y.clone()),
                None => break,
            }
        }
        if ys.len() == n_mountains {
            out.push(PotentialConfig { x_m: s.x_m, ys });
        }
    }
    Ok(out)
}
