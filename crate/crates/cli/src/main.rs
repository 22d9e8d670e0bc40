use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use logipure_cli::{run, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "logipure", version, about = "Purification of logical qubits from thermal states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// Experiment configuration (JSON). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-round fidelity and probability over (a, t), analytic and numeric
    Fig2(Io),
    /// Thermal weight p_beta over (J_S, beta)
    Fig3(Io),
    /// Rounds needed to reach each target fidelity over (a, t)
    Fig4(Io),
    /// Heisenberg-chain purification table, computed against printed values
    Table1(Io),
    /// One repeated-round trajectory
    Purify(Io),
    /// Pauli expansion of the engineered interaction
    Decompose(Io),
}

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (experiment, io) = match cli.command {
        Command::Fig2(io) => (Experiment::Fig2, io),
        Command::Fig3(io) => (Experiment::Fig3, io),
        Command::Fig4(io) => (Experiment::Fig4, io),
        Command::Table1(io) => (Experiment::Table1, io),
        Command::Purify(io) => (Experiment::Purify, io),
        Command::Decompose(io) => (Experiment::Decompose, io),
    };
    let cfg = match &io.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let out = io
        .out
        .or_else(|| cfg.output.clone())
        .context("no output path: pass --out or set `output` in the config")?;
    for artifact in run(experiment, &cfg, &out)? {
        if let Some(dir) = artifact.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(&artifact.path, &artifact.contents)
            .with_context(|| format!("writing {}", artifact.path.display()))?;
        eprintln!("wrote {}", artifact.path.display());
    }
    Ok(())
}
