use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point};
use crate::linalg::norm;
use crate::sampling::Halton;
use crate::scalar::{lit, to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Omega,
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Axis-aligned box in `R^n`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Geodesic ball of angular `radius` around `center` on the sphere.
    SphereCap { center: Vec<f64>, radius: f64 },
    FullSphere,
    /// All of `R^n`; samples are drawn from the ball of the given radius.
    Full { radius: f64 },
}

/// Source (`Omega`) or target (`Lambda`) domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub side: Side,
    pub shape: Shape,
}

impl DomainSpec {
    pub fn new(side: Side, shape: Shape) -> Self {
        Self { side, shape }
    }

    pub fn unit_box(side: Side, dim: usize, half_width: f64) -> Self {
        Self::new(side, Shape::Box { lo: vec![-half_width; dim], hi: vec![half_width; dim] })
    }

    /// Rejects shapes that do not fit the manifold or have empty interior.
    pub fn validate(&self, m: Manifold) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match (&self.shape, m) {
            (Shape::Box { lo, hi }, Manifold::Euclidean(n)) => {
                if lo.len() != n || hi.len() != n {
                    return bad(format!("box bounds must have {n} entries"));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
                    return bad("box needs lo < hi in every coordinate".into());
                }
                Ok(())
            }
            (Shape::Full { radius }, Manifold::Euclidean(_)) => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad("working radius must be positive".into());
                }
                Ok(())
            }
            (Shape::SphereCap { center, radius }, Manifold::Sphere(n)) => {
                if center.len() != n + 1 {
                    return bad(format!("cap centre must have {} entries", n + 1));
                }
                if ((norm(center) - 1.0).abs()) > 1e-9 {
                    return bad("cap centre must be a unit vector".into());
                }
                if !(*radius > 0.0 && *radius < std::f64::consts::PI) {
                    return bad("cap radius must lie in (0, pi)".into());
                }
                Ok(())
            }
            (Shape::FullSphere, Manifold::Sphere(_)) => Ok(()),
            (s, m) => bad(format!("domain shape {s:?} does not fit manifold {m:?}")),
        }
    }

    pub fn contains<T: Real>(&self, p: &Point<T>) -> bool {
        let c = p.coords();
        match &self.shape {
            Shape::Box { lo, hi } => {
                let slack = 1e-12;
                c.iter().zip(lo.iter().zip(hi)).all(|(&v, (&a, &b))| {
                    let v = to_f64(v);
                    v >= a - slack && v <= b + slack
                })
            }
            Shape::Full { .. } | Shape::FullSphere => true,
            Shape::SphereCap { center, radius } => {
                let d: f64 = c.iter().zip(center).map(|(&a, &b)| to_f64(a) * b).sum();
                d.clamp(-1.0, 1.0).acos() <= radius + 1e-12
            }
        }
    }

    /// Quasi-random points of the domain. Deterministic in `(seed, stream)`.
    pub fn sample<T: Real>(&self, m: Manifold, count: usize, seed: u64, stream: u64) -> Result<Vec<Point<T>>> {
        self.validate(m)?;
        let n = m.dim();
        let mut out = Vec::with_capacity(count);
        let mut index = 0u64;
        match &self.shape {
            Shape::Box { lo, hi } => {
                let h = Halton::new(n, seed, stream);
                while out.len() < count {
                    let u = h.point(index);
                    index += 1;
                    let c = (0..n).map(|k| lit(lo[k] + u[k] * (hi[k] - lo[k]))).collect();
                    out.push(m.point(c)?);
                }
            }
            Shape::Full { radius } => {
                let h = Halton::new(n, seed, stream);
                while out.len() < count {
                    let v: Vec<f64> = h.point(index).iter().map(|u| 2.0 * u - 1.0).collect();
                    index += 1;
                    if norm(&v) <= 1.0 {
                        out.push(m.point(v.iter().map(|&a| lit(a * radius)).collect())?);
                    }
                }
            }
            Shape::SphereCap { center, radius } => {
                let c: Point<T> = m.project_point(center.iter().map(|&v| lit(v)).collect())?;
                let frame = m.orthonormal_frame(&c);
                let h = Halton::new(n, seed, stream);
                while out.len() < count {
                    let v: Vec<f64> = h.point(index).iter().map(|u| 2.0 * u - 1.0).collect();
                    index += 1;
                    if norm(&v) <= 1.0 {
                        let a: Vec<T> = v.iter().map(|&s| lit(s * radius)).collect();
                        out.push(frame.chart(&a));
                    }
                }
            }
            Shape::FullSphere => {
                let h = Halton::new(n + 1, seed, stream);
                while out.len() < count {
                    let v: Vec<f64> = h.point(index).iter().map(|u| 2.0 * u - 1.0).collect();
                    index += 1;
                    let r = norm(&v);
                    if r <= 1.0 && r > 0.2 {
                        out.push(m.project_point(v.iter().map(|&a| lit(a)).collect())?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Regular grid with `per_axis` nodes per coordinate direction. Sphere
    /// domains are gridded in normal coordinates at the cap centre (or the
    /// last coordinate pole for the full sphere), clipped to the disc.
    pub fn grid<T: Real>(&self, m: Manifold, per_axis: usize) -> Result<Vec<Point<T>>> {
        self.validate(m)?;
        let n = m.dim();
        let per_axis = per_axis.max(2);
        let lattice = |lo: &[f64], hi: &[f64]| -> Vec<Vec<f64>> {
            let total = per_axis.pow(n as u32);
            (0..total)
                .map(|flat| {
                    let mut r = flat;
                    let mut v = vec![0.0; n];
                    for k in (0..n).rev() {
                        let i = r % per_axis;
                        r /= per_axis;
                        v[k] = lo[k] + (hi[k] - lo[k]) * i as f64 / (per_axis - 1) as f64;
                    }
                    v
                })
                .collect()
        };
        match &self.shape {
            Shape::Box { lo, hi } => lattice(lo, hi).into_iter().map(|v| m.point(v.into_iter().map(lit).collect())).collect(),
            Shape::Full { radius } => lattice(&vec![-radius; n], &vec![*radius; n])
                .into_iter()
                .map(|v| m.point(v.into_iter().map(lit).collect()))
                .collect(),
            Shape::SphereCap { .. } | Shape::FullSphere => {
                let (center, radius) = match &self.shape {
                    Shape::SphereCap { center, radius } => (center.clone(), *radius),
                    _ => {
                        let mut c = vec![0.0; n + 1];
                        c[n] = 1.0;
                        (c, std::f64::consts::PI - 1e-3)
                    }
                };
                let c: Point<T> = m.project_point(center.into_iter().map(lit).collect())?;
                let frame = m.orthonormal_frame(&c);
                Ok(lattice(&vec![-radius; n], &vec![radius; n])
                    .into_iter()
                    .filter(|v| norm(v) <= radius)
                    .map(|v| frame.chart(&v.into_iter().map(lit).collect::<Vec<T>>()))
                    .collect())
            }
        }
    }

    /// Approximate spacing of [`DomainSpec::grid`] along one axis.
    pub fn grid_spacing(&self, m: Manifold, per_axis: usize) -> f64 {
        let per_axis = per_axis.max(2) as f64 - 1.0;
        match &self.shape {
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max) / per_axis,
            Shape::Full { radius } => 2.0 * radius / per_axis,
            Shape::SphereCap { radius, .. } => 2.0 * radius / per_axis,
            Shape::FullSphere => {
                let _ = m;
                2.0 * std::f64::consts::PI / per_axis
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_inside() {
        let d = DomainSpec::unit_box(Side::Omega, 2, 1.0);
        let pts: Vec<Point<f64>> = d.sample(Manifold::Euclidean(2), 200, 3, 1).unwrap();
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| d.contains(p)));

        let cap = DomainSpec::new(Side::Lambda, Shape::SphereCap { center: vec![0.0, 0.0, 1.0], radius: 0.7 });
        let pts: Vec<Point<f64>> = cap.sample(Manifold::Sphere(2), 100, 3, 2).unwrap();
        assert!(pts.iter().all(|p| cap.contains(p)));
    }

    #[test]
    fn mismatched_shape_rejected() {
        let d = DomainSpec::new(Side::Omega, Shape::FullSphere);
        assert!(d.validate(Manifold::Euclidean(2)).is_err());
        let b = DomainSpec::new(Side::Omega, Shape::Box { lo: vec![0.0, 1.0], hi: vec![1.0, 1.0] });
        assert!(b.validate(Manifold::Euclidean(2)).is_err());
    }

    #[test]
    fn grid_counts() {
        let d = DomainSpec::unit_box(Side::Omega, 2, 1.0);
        let g: Vec<Point<f64>> = d.grid(Manifold::Euclidean(2), 5).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0].coords(), &[-1.0, -1.0]);
        assert_eq!(g[24].coords(), &[1.0, 1.0]);
    }
}
