use super::segment::{kinematics_at, CSegment, SegmentKinematics};
use crate::cost_catalog::{derivatives, CostSpec, DerivOrder};
use crate::error::Result;
use crate::geometry::Point;
use crate::linalg::{dot, sub, Matrix};

/// Everything at one `theta` that does not depend on `x`.
#[derive(Clone, Debug)]
pub struct ThetaNode {
    pub kin: SegmentKinematics,
    /// `c(x_m, y)`, `D_y c(x_m, y)` and `D²_yy c(x_m, y)` in the frame at `y`.
    pub c_m: f64,
    pub dy_m: Vec<f64>,
    pub dyy_m: Matrix<f64>,
}

/// `f_theta`, `d/dtheta f_theta` and `d²/dtheta² f_theta` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MountainValues {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

/// Sliding mountain `f_theta(x) = -c(x, y_theta) + c(x_m, y_theta)`.
#[derive(Clone, Debug)]
pub struct MountainField {
    pub cost: CostSpec<f64>,
    pub segment: CSegment,
    nodes: Vec<ThetaNode>,
}

impl MountainField {
    /// Precomputes the nodes of `segment.theta_grid`.
    pub fn new(segment: CSegment) -> Result<Self> {
        let cost = segment.cost.clone();
        let dp = segment.direction();
        let nodes = segment
            .theta_grid
            .iter()
            .zip(&segment.ys)
            .map(|(&theta, y)| node_at(&cost, &segment.x_m, y, &dp, theta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cost, segment, nodes })
    }

    pub fn nodes(&self) -> &[ThetaNode] {
        &self.nodes
    }

    /// Node at an arbitrary `theta`, solving for `y_theta` afresh.
    pub fn node(&self, theta: f64) -> Result<ThetaNode> {
        let y = self.segment.y_at(theta)?;
        node_at(&self.cost, &self.segment.x_m, &y, &self.segment.direction(), theta)
    }

    pub fn values_at(&self, node: &ThetaNode, x: &Point<f64>) -> Result<MountainValues> {
        let b = derivatives(&self.cost, x, &node.kin.y, &[DerivOrder::Value, DerivOrder::GradY, DerivOrder::HessYY])?;
        let bracket = sub(&node.dy_m, b.grad_y());
        let h = b.hess_yy();
        let mut quad = 0.0;
        let (yd, n) = (&node.kin.ydot, self.cost.dim());
        for i in 0..n {
            for j in 0..n {
                quad += (node.dyy_m[(i, j)] - h[(i, j)]) * yd[i] * yd[j];
            }
        }
        Ok(MountainValues {
            f: node.c_m - b.value(),
            df: dot(&bracket, yd),
            d2f: quad + dot(&bracket, &node.kin.yddot),
        })
    }

    pub fn values(&self, theta: f64, x: &Point<f64>) -> Result<MountainValues> {
        self.values_at(&self.node(theta)?, x)
    }

    /// `f_theta(x)` alone.
    pub fn f(&self, theta: f64, x: &Point<f64>) -> Result<f64> {
        let y = self.segment.y_at(theta)?;
        Ok(self.cost.eval(&self.segment.x_m, &y)? - self.cost.eval(x, &y)?)
    }

    /// Central differences in `theta` of `f_theta(x)`: `(df, d2f)`.
    pub fn fd_theta(&self, theta: f64, x: &Point<f64>, h: f64) -> Result<(f64, f64)> {
        let fp = self.f(theta + h, x)?;
        let f0 = self.f(theta, x)?;
        let fm = self.f(theta - h, x)?;
        Ok(((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)))
    }

    /// [`fd_theta`](Self::fd_theta) with Richardson extrapolation from `h`
    /// and `h / 2`; needed near the singular set, where `theta`-derivatives of
    /// high order are large.
    pub fn fd_theta_richardson(&self, theta: f64, x: &Point<f64>, h: f64) -> Result<(f64, f64)> {
        let (a1, a2) = self.fd_theta(theta, x, h)?;
        let (b1, b2) = self.fd_theta(theta, x, h / 2.0)?;
        Ok(((4.0 * b1 - a1) / 3.0, (4.0 * b2 - a2) / 3.0))
    }
}

fn node_at(c: &CostSpec<f64>, x_m: &Point<f64>, y: &Point<f64>, dp: &[f64], theta: f64) -> Result<ThetaNode> {
    let kin = kinematics_at(c, x_m, y, dp, theta)?;
    let b = derivatives(c, x_m, y, &[DerivOrder::Value, DerivOrder::GradY, DerivOrder::HessYY])?;
    Ok(ThetaNode { c_m: b.value(), dy_m: b.grad_y().to_vec(), dyy_m: b.hess_yy(), kin })
}

/// `(f, df/dtheta, d²f/dtheta²)` of the sliding mountain at `(theta, x)`.
pub fn sliding_mountain_derivs(field: &MountainField, theta: f64, x: &Point<f64>) -> Result<MountainValues> {
    field.values(theta, x)
}
