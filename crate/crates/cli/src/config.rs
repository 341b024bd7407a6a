//! Campaign configuration: JSON, unknown keys rejected, seed mandatory.

use std::path::Path;

use serde::Deserialize;

use mtwkit_core::cost_catalog::polynomial::{Monomial, Polynomial};
use mtwkit_core::cost_catalog::{A3Tag, CostSpec, Sign};
use mtwkit_core::geometry::{Manifold, Point};
use mtwkit_core::transport_maps::{DomainSpec, Shape, Side};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub cost: CostBlock,
    #[serde(default)]
    pub omega: Option<Shape>,
    #[serde(default)]
    pub lambda: Option<Shape>,
    pub checks: Vec<CheckBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Directory for the report and CSV files (default `mtwkit-out`).
    pub dir: Option<String>,
    /// Report file name inside `dir` (default `report.json`).
    pub report: Option<String>,
    /// Write per-check CSV files (default true).
    pub csv: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialBlock {
    pub coef: f64,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostBlock {
    Quadratic {
        dim: usize,
    },
    PerturbedQuadratic {
        dim: usize,
        f: Vec<MonomialBlock>,
        g: Vec<MonomialBlock>,
    },
    Sqrt {
        dim: usize,
    },
    Log {
        dim: usize,
        r_min: Option<f64>,
    },
    Power {
        dim: usize,
        exponent: f64,
        sign: Sign,
        tag: Option<A3Tag>,
        r_min: Option<f64>,
    },
    SphereDistSq {
        dim: usize,
    },
    ReflectorAntenna {
        dim: usize,
        r_min: Option<f64>,
    },
}

impl CostBlock {
    pub fn build(&self) -> Result<CostSpec<f64>, CliError> {
        let poly = |dim: usize, t: &[MonomialBlock]| {
            Polynomial::new(dim, t.iter().map(|m| Monomial { coef: m.coef, powers: m.powers.clone() }).collect())
        };
        let with_r = |c: CostSpec<f64>, r: &Option<f64>| match r {
            Some(r) => c.with_r_min(*r),
            None => Ok(c),
        };
        let c = match self {
            CostBlock::Quadratic { dim } => CostSpec::quadratic(*dim),
            CostBlock::PerturbedQuadratic { dim, f, g } => {
                poly(*dim, f).and_then(|f| poly(*dim, g).and_then(|g| CostSpec::perturbed_quadratic(*dim, f, g)))
            }
            CostBlock::Sqrt { dim } => CostSpec::sqrt(*dim),
            CostBlock::Log { dim, r_min } => CostSpec::log(*dim).and_then(|c| with_r(c, r_min)),
            CostBlock::Power { dim, exponent, sign, tag, r_min } => {
                CostSpec::power(*dim, *exponent, *sign, tag.unwrap_or(A3Tag::ExpectedA3W)).and_then(|c| with_r(c, r_min))
            }
            CostBlock::SphereDistSq { dim } => CostSpec::sphere_dist_sq(*dim),
            CostBlock::ReflectorAntenna { dim, r_min } => CostSpec::reflector_antenna(*dim).and_then(|c| with_r(c, r_min)),
        };
        c.map_err(|e| CliError::Config(format!("cost: {e}")))
    }
}

/// Explicit c-segment instead of sampled configurations.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentBlock {
    pub x_m: Vec<f64>,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportBlock {
    pub y: Vec<f64>,
    pub v: f64,
}

/// Explicit potential instead of sampled ones.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub support: Vec<SupportBlock>,
    /// Points to probe; the first one is used by the connectivity check.
    pub x: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    pub seed: Option<u64>,
    pub n_points: Option<usize>,
    pub n_frames: Option<usize>,
    pub tol: Option<f64>,
    pub margin: Option<f64>,
    pub h_t: Option<f64>,
    pub richardson: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlidingParams {
    pub seed: Option<u64>,
    pub n_configs: Option<usize>,
    pub n_x: Option<usize>,
    pub n_theta: Option<usize>,
    pub clearance: Option<f64>,
    pub strict: Option<bool>,
    /// DASM slack for `dasm`, negative-derivative slack for `monotonicity`.
    pub tol: Option<f64>,
    pub tol_pos: Option<f64>,
    pub segment: Option<SegmentBlock>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityParams {
    pub seed: Option<u64>,
    pub n_configs: Option<usize>,
    pub w_max: Option<f64>,
    pub clearance: Option<f64>,
    pub h_w: Option<f64>,
    pub h_t: Option<f64>,
    pub tol: Option<f64>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PositivityParams {
    pub seed: Option<u64>,
    pub n_configs: Option<usize>,
    pub n_theta: Option<usize>,
    pub w_per_axis: Option<usize>,
    pub w_radius: Option<f64>,
    pub clearance: Option<f64>,
    pub strict: Option<bool>,
    pub tol: Option<f64>,
    pub segment: Option<SegmentBlock>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontParams {
    pub seed: Option<u64>,
    pub n_configs: Option<usize>,
    pub n_starts: Option<usize>,
    pub theta0: Option<f64>,
    pub theta1: Option<f64>,
    pub dt: Option<f64>,
    pub w_radius: Option<f64>,
    pub clearance: Option<f64>,
    /// Bound on `|d/dtheta f|` along trajectories.
    pub tol: Option<f64>,
    pub segment: Option<SegmentBlock>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsisParams {
    pub seed: Option<u64>,
    pub n_potentials: Option<usize>,
    pub n_mountains: Option<usize>,
    pub n_x: Option<usize>,
    pub z_per_axis: Option<usize>,
    pub n_hull_probes: Option<usize>,
    pub clearance: Option<f64>,
    pub tol: Option<f64>,
    pub activity_tol: Option<f64>,
    /// Re-evaluate the worst probe on a 10x finer grid (default true).
    pub refine: Option<bool>,
    pub potential: Option<PotentialBlock>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConnectivityParams {
    pub seed: Option<u64>,
    pub n_potentials: Option<usize>,
    pub n_mountains: Option<usize>,
    pub n_theta: Option<usize>,
    pub per_axis: Option<usize>,
    pub clearance: Option<f64>,
    pub tol: Option<f64>,
    pub activity_tol: Option<f64>,
    pub potential: Option<PotentialBlock>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckBlock {
    #[serde(alias = "scan_a3")]
    CurvatureScan(ScanParams),
    Dasm(SlidingParams),
    Monotonicity(SlidingParams),
    Identity(IdentityParams),
    Positivity(PositivityParams),
    FrontTrack(FrontParams),
    Csis(CsisParams),
    Connectivity(ConnectivityParams),
}

/// Check kinds, in the spelling used by the subcommands and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    CurvatureScan,
    Dasm,
    Monotonicity,
    Identity,
    Positivity,
    FrontTrack,
    Csis,
    Connectivity,
}

impl CheckBlock {
    pub fn kind(&self) -> CheckKind {
        match self {
            CheckBlock::CurvatureScan(_) => CheckKind::CurvatureScan,
            CheckBlock::Dasm(_) => CheckKind::Dasm,
            CheckBlock::Monotonicity(_) => CheckKind::Monotonicity,
            CheckBlock::Identity(_) => CheckKind::Identity,
            CheckBlock::Positivity(_) => CheckKind::Positivity,
            CheckBlock::FrontTrack(_) => CheckKind::FrontTrack,
            CheckBlock::Csis(_) => CheckKind::Csis,
            CheckBlock::Connectivity(_) => CheckKind::Connectivity,
        }
    }

    /// Block with every parameter at its default.
    pub fn default_for(kind: CheckKind) -> Self {
        match kind {
            CheckKind::CurvatureScan => CheckBlock::CurvatureScan(Default::default()),
            CheckKind::Dasm => CheckBlock::Dasm(Default::default()),
            CheckKind::Monotonicity => CheckBlock::Monotonicity(Default::default()),
            CheckKind::Identity => CheckBlock::Identity(Default::default()),
            CheckKind::Positivity => CheckBlock::Positivity(Default::default()),
            CheckKind::FrontTrack => CheckBlock::FrontTrack(Default::default()),
            CheckKind::Csis => CheckBlock::Csis(Default::default()),
            CheckKind::Connectivity => CheckBlock::Connectivity(Default::default()),
        }
    }

    /// Rejects grids too small to evaluate and non-positive tolerances.
    fn validate(&self) -> Result<(), String> {
        let at_least = |name: &str, v: Option<usize>, min: usize| match v {
            Some(v) if v < min => Err(format!("{name}: must be >= {min}")),
            _ => Ok(()),
        };
        let positive = |name: &str, v: Option<f64>| match v {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(format!("{name}: must be positive")),
            _ => Ok(()),
        };
        match self {
            CheckBlock::CurvatureScan(p) => {
                at_least("n_points", p.n_points, 1)?;
                at_least("n_frames", p.n_frames, 1)?;
                positive("h_t", p.h_t)?;
                positive("tol", p.tol)
            }
            CheckBlock::Dasm(p) | CheckBlock::Monotonicity(p) => {
                at_least("n_configs", p.n_configs, 1)?;
                at_least("n_x", p.n_x, 1)?;
                at_least("n_theta", p.n_theta, 3)?;
                positive("tol", p.tol)
            }
            CheckBlock::Identity(p) => {
                at_least("n_configs", p.n_configs, 1)?;
                positive("h_w", p.h_w)?;
                positive("h_t", p.h_t)?;
                positive("tol", p.tol)
            }
            CheckBlock::Positivity(p) => {
                at_least("n_configs", p.n_configs, 1)?;
                at_least("n_theta", p.n_theta, 2)?;
                at_least("w_per_axis", p.w_per_axis, 1)?;
                positive("tol", p.tol)
            }
            CheckBlock::FrontTrack(p) => {
                at_least("n_configs", p.n_configs, 1)?;
                positive("dt", p.dt)?;
                positive("tol", p.tol)
            }
            CheckBlock::Csis(p) => {
                at_least("n_potentials", p.n_potentials, 1)?;
                at_least("z_per_axis", p.z_per_axis, 2)?;
                positive("tol", p.tol)
            }
            CheckBlock::Connectivity(p) => {
                at_least("n_potentials", p.n_potentials, 1)?;
                at_least("n_theta", p.n_theta, 2)?;
                at_least("per_axis", p.per_axis, 2)?;
                positive("tol", p.tol)
            }
        }
    }

    /// Applies the command-line `--seed` and `--tol` overrides.
    pub fn override_with(&mut self, seed: Option<u64>, tol: Option<f64>) {
        macro_rules! set {
            ($p:expr) => {{
                if seed.is_some() {
                    $p.seed = seed;
                }
                if tol.is_some() {
                    $p.tol = tol;
                }
            }};
        }
        match self {
            CheckBlock::CurvatureScan(p) => set!(p),
            CheckBlock::Dasm(p) | CheckBlock::Monotonicity(p) => set!(p),
            CheckBlock::Identity(p) => set!(p),
            CheckBlock::Positivity(p) => set!(p),
            CheckBlock::FrontTrack(p) => set!(p),
            CheckBlock::Csis(p) => set!(p),
            CheckBlock::Connectivity(p) => set!(p),
        }
    }
}

impl CampaignConfig {
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.checks.is_empty() {
            return Err(CliError::Config("checks: at least one check is required".into()));
        }
        for (i, b) in cfg.checks.iter().enumerate() {
            b.validate().map_err(|m| CliError::Config(format!("checks[{i}].{m}")))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    /// `(omega, lambda)`: the configured shapes, or `[-1, 1]^n` boxes
    /// (the whole sphere for sphere costs).
    pub fn domains(&self, c: &CostSpec<f64>) -> Result<(DomainSpec, DomainSpec), CliError> {
        let default = |side| match c.manifold() {
            Manifold::Euclidean(n) => DomainSpec::unit_box(side, n, 1.0),
            Manifold::Sphere(_) => DomainSpec::new(side, Shape::FullSphere),
        };
        let o = self.omega.clone().map_or_else(|| default(Side::Omega), |s| DomainSpec::new(Side::Omega, s));
        let l = self.lambda.clone().map_or_else(|| default(Side::Lambda), |s| DomainSpec::new(Side::Lambda, s));
        for (name, d) in [("omega", &o), ("lambda", &l)] {
            d.validate(c.manifold()).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        }
        Ok((o, l))
    }
}

pub fn point(c: &CostSpec<f64>, coords: &[f64], field: &str) -> Result<Point<f64>, CliError> {
    c.manifold().point(coords.to_vec()).map_err(|e| CliError::Config(format!("{field}: {e}")))
}
