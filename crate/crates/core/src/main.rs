use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delay_nullctl::cli::{resolve_config, run, Command, Overrides};
use delay_nullctl::config::{parse_branches, parse_n_list};

#[derive(Parser)]
#[command(
    version,
    about = "Minimal-norm null controls for a linear distributed-delay equation"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// Configuration file (defaults apply when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Summation orders, e.g. 2,4,6
    #[arg(long, global = true)]
    n_list: Option<String>,

    /// Time steps per unit delay for simulation and control sampling
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Inclusive branch range a..b
    #[arg(long, global = true, value_parser = parse_branches, allow_hyphen_values = true)]
    branches: Option<std::ops::RangeInclusive<i64>>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Characteristic roots and their residuals
    Spectrum,
    /// Regularized partial sums of the eigen-expansion
    Reconstruct,
    /// Spectral null controls
    Synthesize,
    /// Simulate the controlled system and report terminal norms
    Verify,
    /// Compare spectral controls with the least-norm oracle
    Compare,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let cmd = match args.command {
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Reconstruct => Command::Reconstruct,
        Cmd::Synthesize => Command::Synthesize,
        Cmd::Verify => Command::Verify,
        Cmd::Compare => Command::Compare,
    };
    let n_list = match args.n_list.as_deref().map(parse_n_list).transpose() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: --n-list: {e}");
            return ExitCode::from(2);
        }
    };
    let ov = Overrides {
        out: args.out,
        n_list,
        grid: args.grid,
        branches: args.branches,
    };
    let result = resolve_config(args.config.as_deref(), &ov).and_then(|c| run(cmd, &c));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
