//! `mtwkit` campaign runner: reads a JSON campaign config, runs the listed
//! checks in order and writes one JSON report plus per-check CSV files.

pub mod catalog;
pub mod checks;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{CampaignConfig, CheckBlock, CheckKind};
pub use output::CampaignReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Command-line overrides shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub tol: Option<f64>,
}

/// Runs the campaign; `only` restricts it to one check kind (its listed
/// blocks, or a default block if the config lists none).
pub fn run_campaign(cfg: &CampaignConfig, only: Option<CheckKind>, ov: &Overrides) -> Result<CampaignReport, CliError> {
    let cost = cfg.cost.build()?;
    let (omega, lambda) = cfg.domains(&cost)?;
    let seed = ov.seed.unwrap_or(cfg.seed);
    let mut blocks: Vec<CheckBlock> = match only {
        None => cfg.checks.clone(),
        Some(kind) => {
            let listed: Vec<_> = cfg.checks.iter().filter(|b| b.kind() == kind).cloned().collect();
            if listed.is_empty() {
                vec![CheckBlock::default_for(kind)]
            } else {
                listed
            }
        }
    };
    for b in &mut blocks {
        b.override_with(ov.seed, ov.tol);
    }
    let ctx = checks::Context { cost: &cost, omega: &omega, lambda: &lambda, seed };
    let reports = blocks.iter().map(|b| checks::run(b, &ctx)).collect::<Result<Vec<_>, _>>()?;
    Ok(CampaignReport::new(cost.id(), seed, reports))
}

/// Loads, runs and writes; returns the report and the files written.
pub fn run_file(path: &Path, only: Option<CheckKind>, ov: &Overrides) -> Result<(CampaignReport, Vec<PathBuf>), CliError> {
    let cfg = CampaignConfig::load(path)?;
    let report = run_campaign(&cfg, only, ov)?;
    let dir = ov.out_dir.clone().unwrap_or_else(|| PathBuf::from(cfg.output.dir.as_deref().unwrap_or("mtwkit-out")));
    let name = cfg.output.report.as_deref().unwrap_or("report.json");
    let files = output::write_all(&dir, name, &report, cfg.output.csv.unwrap_or(true))?;
    Ok((report, files))
}

/// Worker count from `MTWKIT_THREADS` (unset: all cores).
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MTWKIT_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("MTWKIT_THREADS: expected a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}
