use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mtwkit::{catalog, configure_threads, run_file, CheckKind, CliError, Overrides};

#[derive(Parser)]
#[command(name = "mtwkit", version, about = "Verification campaigns for cost-convex geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Campaign config (JSON)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the campaign seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the main tolerance of every check
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check listed in the config
    Verify {
        /// Campaign config (JSON); same as --config
        path: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// c-sectional curvature scan (A3W/A3S)
    CurvatureScan(Common),
    /// Double mountain above sliding mountains
    Dasm(Common),
    /// Monotonicity of the sliding super-level sets
    Monotonicity(Common),
    /// Second-variation identity of the sliding mountain
    Identity(Common),
    /// Positivity of the second theta-derivative on fronts
    Positivity(Common),
    /// Level-set ODE tracking of moving fronts
    FrontTrack(Common),
    /// c-subdifferential versus subdifferential
    Csis(Common),
    /// Connectivity of contact sets
    Connectivity(Common),
    /// Print the cost catalog
    Catalog(Common),
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (common, path, only) = match cli.command {
        Command::Catalog(_) => {
            print!("{}", catalog::catalog_table());
            return Ok(0);
        }
        Command::Verify { path, common } => {
            let p = path.or(common.config.clone());
            (common, p, None)
        }
        Command::CurvatureScan(c) => (c.clone(), c.config, Some(CheckKind::CurvatureScan)),
        Command::Dasm(c) => (c.clone(), c.config, Some(CheckKind::Dasm)),
        Command::Monotonicity(c) => (c.clone(), c.config, Some(CheckKind::Monotonicity)),
        Command::Identity(c) => (c.clone(), c.config, Some(CheckKind::Identity)),
        Command::Positivity(c) => (c.clone(), c.config, Some(CheckKind::Positivity)),
        Command::FrontTrack(c) => (c.clone(), c.config, Some(CheckKind::FrontTrack)),
        Command::Csis(c) => (c.clone(), c.config, Some(CheckKind::Csis)),
        Command::Connectivity(c) => (c.clone(), c.config, Some(CheckKind::Connectivity)),
    };
    let path = path.ok_or_else(|| CliError::Config("config: a config file is required (--config <path>)".into()))?;
    configure_threads()?;
    let ov = Overrides { seed: common.seed, out_dir: common.out_dir, tol: common.tol };
    let (report, files) = run_file(&path, only, &ov)?;
    for r in &report.reports {
        let margin = r.worst_margin.map_or("n/a".to_string(), |m| format!("{m:.3e}"));
        println!(
            "{:<20} {:<13} samples={} failures={} skipped={} worst_margin={}",
            r.check,
            format!("{:?}", r.verdict).to_lowercase(),
            r.samples,
            r.failures,
            r.skipped,
            margin
        );
    }
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mtwkit: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
