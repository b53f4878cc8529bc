use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quasidiff_cli::commands::{cmd_mfcq, cmd_optcheck, cmd_qd, cmd_regcheck, cmd_slope, CliError, Context};
use quasidiff_cli::problem::ProblemFile;

#[derive(Parser)]
#[command(name = "quasidiff", version, about = "Quasidifferential checks for expression-defined systems")]
struct Cli {
    /// Write the report as JSON to this path as well.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Feasibility and membership tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasidifferentials and directional derivatives of every expression.
    Qd {
        file: PathBuf,
        #[arg(long)]
        at: Option<String>,
        /// Direction, comma separated; repeatable. Defaults to the compass.
        #[arg(long = "dir")]
        dirs: Vec<String>,
    },
    /// Steepest-descent rate of the residual at one point and target.
    Slope {
        file: PathBuf,
        #[arg(long)]
        at: Option<String>,
        /// `y1, ...; z1, ...`
        #[arg(long)]
        target: Option<String>,
    },
    /// Quasidifferential Mangasarian-Fromovitz qualification.
    Mfcq {
        file: PathBuf,
        #[arg(long)]
        at: Option<String>,
    },
    /// Grid check of the metric-regularity error bound.
    Regcheck {
        file: PathBuf,
        #[arg(long = "K")]
        k: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Penalty-based optimality conditions.
    Optcheck {
        file: PathBuf,
        #[arg(long)]
        at: Option<String>,
        /// Penalty weight; repeatable.
        #[arg(long = "c")]
        c: Vec<f64>,
    },
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if !(cli.tol > 0.0) {
        return Err(CliError::Input(format!("--tol must be positive, got {}", cli.tol)));
    }
    let file = match &cli.command {
        Command::Qd { file, .. }
        | Command::Slope { file, .. }
        | Command::Mfcq { file, .. }
        | Command::Regcheck { file, .. }
        | Command::Optcheck { file, .. } => file,
    };
    let pf = ProblemFile::read(file)?;
    let ctx = Context {
        file: file.display().to_string(),
        seed: cli.seed,
        tol: cli.tol,
    };
    let report = match &cli.command {
        Command::Qd { at, dirs, .. } => cmd_qd(&ctx, &pf, at.as_deref(), dirs),
        Command::Slope { at, target, .. } => cmd_slope(&ctx, &pf, at.as_deref(), target.as_deref()),
        Command::Mfcq { at, .. } => cmd_mfcq(&ctx, &pf, at.as_deref()),
        Command::Regcheck { k, r, grid, .. } => cmd_regcheck(&ctx, &pf, *k, *r, *grid),
        Command::Optcheck { at, c, .. } => cmd_optcheck(&ctx, &pf, at.as_deref(), c),
    }?;
    if let Some(path) = &cli.json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(report.render())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
