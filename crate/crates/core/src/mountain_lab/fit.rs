//! Least-squares circle and sphere fits for checking front and segment shapes.

use crate::linalg::{axpy, dot, least_squares, norm, scale, sub, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SphereFit {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `max | |p - center| - radius |` (plus the distance to the fitted plane
    /// for circle fits).
    pub residual: f64,
}

impl SphereFit {
    /// Distance of `p` from the fitted sphere.
    pub fn distance(&self, p: &[f64]) -> f64 {
        (norm(&sub(p, &self.center)) - self.radius).abs()
    }

    /// Angle between `dir` and the sphere's normal at `p`.
    pub fn normal_angle(&self, p: &[f64], dir: &[f64]) -> f64 {
        let r = sub(p, &self.center);
        let c = dot(&r, dir).abs() / (norm(&r) * norm(dir));
        c.clamp(0.0, 1.0).acos()
    }

    /// Angle between `dir` and the tangent space at `p`.
    pub fn tangency_angle(&self, p: &[f64], dir: &[f64]) -> f64 {
        let r = sub(p, &self.center);
        let s = dot(&r, dir).abs() / (norm(&r) * norm(dir));
        s.clamp(0.0, 1.0).asin()
    }
}

/// Algebraic fit `|p|² = 2 c·p + k` in `R^n`; needs `n + 1` points in
/// general position.
pub fn fit_sphere(points: &[Vec<f64>]) -> Option<SphereFit> {
    let n = points.first()?.len();
    if points.len() < n + 1 {
        return None;
    }
    // centre the data for conditioning
    let mean: Vec<f64> = (0..n).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / points.len() as f64).collect();
    let shifted: Vec<Vec<f64>> = points.iter().map(|p| sub(p, &mean)).collect();
    let a = Matrix::from_fn(points.len(), n + 1, |r, c| if c < n { 2.0 * shifted[r][c] } else { 1.0 });
    let b: Vec<f64> = shifted.iter().map(|p| dot(p, p)).collect();
    let sol = least_squares(&a, &b)?;
    let c = sol[..n].to_vec();
    let radius = (sol[n] + dot(&c, &c)).sqrt();
    let center = axpy(&mean, 1.0, &c);
    let mut fit = SphereFit { center, radius, residual: 0.0 };
    fit.residual = points.iter().map(|p| fit.distance(p)).fold(0.0, f64::max);
    Some(fit)
}

/// Circle through planar points in `R^n`: the plane is spanned by the two
/// most spread directions from the first point, the circle is fitted in it.
pub fn fit_circle(points: &[Vec<f64>]) -> Option<SphereFit> {
    let p0 = points.first()?;
    if p0.len() == 2 {
        return fit_sphere(points);
    }
    let far = points.iter().max_by(|a, b| norm(&sub(a, p0)).total_cmp(&norm(&sub(b, p0))))?;
    let u = sub(far, p0);
    let u = scale(&u, 1.0 / norm(&u));
    let perp = |p: &Vec<f64>| {
        let d = sub(p, p0);
        axpy(&d, -dot(&d, &u), &u)
    };
    let v = points.iter().map(perp).max_by(|a, b| norm(a).total_cmp(&norm(b)))?;
    let v = scale(&v, 1.0 / norm(&v));
    let planar: Vec<Vec<f64>> = points.iter().map(|p| vec![dot(&sub(p, p0), &u), dot(&sub(p, p0), &v)]).collect();
    let f2 = fit_sphere(&planar)?;
    let center = axpy(&axpy(p0, f2.center[0], &u), f2.center[1], &v);
    let off_plane = points
        .iter()
        .map(|p| {
            let d = sub(p, p0);
            norm(&axpy(&axpy(&d, -dot(&d, &u), &u), -dot(&d, &v), &v))
        })
        .fold(0.0, f64::max);
    Some(SphereFit { center, radius: f2.radius, residual: f2.residual + off_plane })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_circle_recovered() {
        let pts: Vec<Vec<f64>> =
            (0..12).map(|k| k as f64 * 0.4).map(|t| vec![1.0 + 2.0 * t.cos(), -0.5 + 2.0 * t.sin()]).collect();
        let f = fit_sphere(&pts).unwrap();
        assert!((f.radius - 2.0).abs() < 1e-12);
        assert!(norm(&sub(&f.center, &[1.0, -0.5])) < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(f.tangency_angle(&pts[0], &[-(0.0f64.sin()), 0.0f64.cos()]) < 1e-12);
    }

    #[test]
    fn circle_in_three_dimensions() {
        let pts: Vec<Vec<f64>> = (0..10).map(|k| k as f64 * 0.3).map(|t| vec![t.cos(), 2f64.sqrt() * t.sin(), t.cos()]).collect();
        let f = fit_circle(&pts).unwrap();
        assert!((f.radius - 2f64.sqrt()).abs() < 1e-10, "{f:?}");
        assert!(f.residual < 1e-10);
    }
}
