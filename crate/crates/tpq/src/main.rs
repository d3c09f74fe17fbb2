use clap::Parser;
use std::process::ExitCode;
use tpq::cli::{run_command, Command, Options};

/// Exact symbolic checker for twisted Poisson structures, prequantization
/// and polarized quantization on coordinate charts.
#[derive(Parser)]
#[command(name = "tpq", version, about)]
struct Args {
    /// One of: check-structure, check-prequant, solve-prequant-lie,
    /// check-polarization, membership, h0-residual, quantum-op,
    /// cohomology-lie, jacobiator, chainmap, run-example
    command: String,

    /// Structure file path, or example name for run-example
    /// (ex1, ex2, ex3, ex4, ex6, quant51)
    target: String,

    /// Size parameter: complex dimension for quant51, degree for
    /// cohomology-lie
    #[arg(long, default_value_t = 2)]
    n: usize,

    /// Seed for the randomized identity trials
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the JSON report to this path
    #[arg(long)]
    json: Option<std::path::PathBuf>,

    /// Raise the chart dimension cap
    #[arg(long)]
    max_dim: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(cmd) = Command::parse(&args.command) else {
        eprintln!("unknown command `{}`", args.command);
        return ExitCode::from(2);
    };
    let opts = Options {
        n: args.n,
        seed: args.seed,
        max_dim: args.max_dim,
    };
    let report = run_command(cmd, &args.target, &opts);
    println!("{report}");
    if let Some(path) = &args.json {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("cannot write report to {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.status.exit_code() as u8)
}
