use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rkhsmult::config::ModeName;
use rkhsmult::{run_path, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "rkhsmult",
    version,
    about = "Multiplicativity criteria for functionals on CNP spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// CNP transform, verdict and b_n table of each kernel.
    Cnp(RunArgs),
    /// Kernel-function criteria for powers, Schur products and tensor products.
    Verify(RunArgs),
    /// Truncated functional norms and inverse-power membership.
    Norm(RunArgs),
    /// Exact coefficient identities and the brute-force product oracle.
    Identity(RunArgs),
    /// Every check in the config.
    Report(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Job config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Truncation degree N.
    #[arg(long)]
    degree: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-sample residual table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// 100-point sweep of radius 1/4 instead of the configured samples.
    #[arg(long)]
    dense: bool,
    /// Adds wall-clock timings, which makes reports non-reproducible.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Cnp(a) => (Command::Cnp, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Norm(a) => (Command::Norm, a),
        Sub::Identity(a) => (Command::Identity, a),
        Sub::Report(a) => (Command::Report, a),
    };
    let overrides = Overrides {
        degree: args.degree,
        tolerance: args.tol,
        mode: args.mode.map(|m| match m {
            ModeArg::Exact => ModeName::Exact,
            ModeArg::Float => ModeName::Float,
        }),
        dense: args.dense,
    };
    let report = match run_path(&args.config, command, &overrides, args.timing) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rkhsmult: {}", e);
            return ExitCode::from(2);
        }
    };
    let json = report.to_json();
    let written = match &args.out {
        Some(path) => std::fs::write(path, json).map_err(|e| format!("cannot write {}: {}", path.display(), e)),
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| format!("cannot write report: {}", e)),
    };
    if let Err(e) = written {
        eprintln!("rkhsmult: {}", e);
        return ExitCode::from(2);
    }
    if let Some(path) = &args.csv {
        let result = File::create(path)
            .map_err(|e| e.to_string())
            .and_then(|f| report.write_csv(f).map_err(|e| e.to_string()));
        if let Err(e) = result {
            eprintln!("rkhsmult: cannot write {}: {}", path.display(), e);
            return ExitCode::from(2);
        }
    }
    for c in &report.checks {
        if let Some(e) = &c.error {
            eprintln!("rkhsmult: check {} failed to run: {}", c.id, e);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
