use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod report;
mod stages;

use stages::{RunConfig, Stage};

/// Semigroup, differential, period and theta data for Weierstrass curves,
/// with numerical checks of the Jacobi inversion formulae.
#[derive(Debug, Parser)]
#[command(name = "wcurve", version)]
struct Args {
    /// Curve spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Comma-separated stages; default depends on the spec kind.
    #[arg(long, value_delimiter = ',')]
    stages: Vec<Stage>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Theta truncation target.
    #[arg(long, default_value_t = 1e-12)]
    eps: f64,
    /// Line-delimited JSON report (`-` for stdout, replacing the table).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Period matrix file: read when present, written after computing.
    #[arg(long)]
    periods_cache: Option<PathBuf>,
    /// Random configurations per identity check.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Residual gate for identity checks (default by genus).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Allow the full half-period search above genus 4 (minutes).
    #[arg(long)]
    large_search: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = RunConfig {
        spec: args.spec,
        stages: args.stages,
        seed: args.seed,
        eps: args.eps,
        samples: args.samples,
        periods_cache: args.periods_cache,
        tolerance: args.tolerance,
        large_search: args.large_search,
    };
    let rep = match stages::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("wcurve: {e}");
            return ExitCode::from(2);
        }
    };
    let to_stdout = args.report.as_deref().is_some_and(|p| p.as_os_str() == "-");
    match &args.report {
        Some(_) if to_stdout => print!("{}", rep.to_json_lines()),
        Some(path) => {
            if let Err(e) = std::fs::write(path, rep.to_json_lines()) {
                eprintln!("wcurve: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {}
    }
    if !to_stdout {
        print!("{}", rep.summary());
    }
    if rep.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
