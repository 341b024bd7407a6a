//! Numerical toolkit for the geometry of cost-convex functions.
//!
//! The layers build on each other:
//!
//! - [`geometry`]: Euclidean space and the round sphere, exp/log maps, frames.
//! - [`cost_catalog`]: cost functions with analytic derivatives up to
//!   `D²_xx D²_yy c` and a finite-difference oracle.
//! - [`transport_maps`]: c- and c*-exponential maps.
//! - [`mtw_curvature`]: c-sectional curvature and A3W/A3S scans.
//! - [`mountain_lab`]: c-segments, sliding mountains, moving fronts.
//! - [`c_convexity`]: discrete c-convex potentials and subdifferentials.
//!
//! Kernels are generic over [`Real`]; campaign-level checks that sample,
//! aggregate and report work in `f64`, and the aliases below fix the scalar
//! for callers that do not care.

pub mod c_convexity;
pub mod cost_catalog;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mountain_lab;
pub mod mtw_curvature;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod transport_maps;

pub use error::{Error, Result};
pub use geometry::Manifold;
pub use report::{Verdict, VerificationReport, Witness};
pub use scalar::Real;

pub type Point = geometry::Point<f64>;
pub type TangentVector = geometry::TangentVector<f64>;
pub type Frame = geometry::Frame<f64>;
pub type CostSpec = cost_catalog::CostSpec<f64>;
pub type DerivativeBlock = cost_catalog::DerivativeBlock<f64>;
pub type CExpResult = transport_maps::CExpResult<f64>;
