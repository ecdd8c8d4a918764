use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use tidpp::experiment::{error_json, exit_code_for, run_file, Command, RunOptions};

#[derive(Clone, Copy, ValueEnum)]
enum Sub {
    KernelTable,
    TreeKernel,
    Sample,
    Dominate,
    Dbar,
    Depend,
    Vwb,
    Poisson,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::KernelTable => Command::KernelTable,
            Sub::TreeKernel => Command::TreeKernel,
            Sub::Sample => Command::Sample,
            Sub::Dominate => Command::Dominate,
            Sub::Dbar => Command::Dbar,
            Sub::Depend => Command::Depend,
            Sub::Vwb => Command::Vwb,
            Sub::Poisson => Command::Poisson,
        }
    }
}

/// Run one experiment from a JSON config. Exit 0 when every check passes,
/// 2 on a tolerance failure, 3 on an invalid config.
#[derive(Parser)]
#[command(name = "tidpp", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Replace the config's seed list with this single seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the command's default tolerance.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let body = serde_json::json!({ "tool": "tidpp", "error": "invalid-config", "exit_code": 3, "message": e.to_string() });
            eprintln!("{body}");
            return ExitCode::from(3);
        }
    };
    let opts = RunOptions { seed: cli.seed, out: cli.out, tol: cli.tol };
    match run_file(cli.command.into(), &cli.config, &opts) {
        Ok(report) => {
            let summary = serde_json::json!({
                "command": report.command,
                "passed": report.passed(),
                "failed": report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>(),
                "checks": report.checks.len(),
                "artifacts": report.artifacts,
            });
            println!("{summary}");
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
