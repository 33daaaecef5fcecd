use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcnn_cli::config::{parse_law, ModeKind};
use mcnn_cli::{cmd_eval, cmd_fd, cmd_repro, cmd_train, CliError, EvalSource, RunConfig};

/// Multi-constitutive neural network for large-strain consolidation.
#[derive(Parser)]
#[command(name = "mcnn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// `mcnn` or `pinn`.
    #[arg(long)]
    mode: Option<String>,
    /// Constitutive law 1, 2 or 3 (single-law mode).
    #[arg(long)]
    law: Option<String>,
    /// Reduced epoch schedule.
    #[arg(long)]
    fast: bool,
    /// Override any configuration key, e.g. `--set epochs=500`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one network and write checkpoint and loss history.
    Train(Common),
    /// Solve the finite-difference reference for all laws.
    Fd(Common),
    /// Score a checkpoint (or other grids) against reference grids.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            value_name = "PATH",
            conflicts_with = "against",
            required_unless_present = "against"
        )]
        checkpoint: Option<PathBuf>,
        /// Directory of fd_law*.csv grids to score instead of a network.
        #[arg(long, value_name = "DIR")]
        against: Option<PathBuf>,
        /// Directory holding the reference fd_law*.csv grids.
        #[arg(long, value_name = "DIR")]
        reference: PathBuf,
    },
    /// Full pipeline: reference, all trainings, evaluation, summary.
    Repro(Common),
}

fn resolve(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for pair in &c.overrides {
        cfg.apply_override(pair)?;
    }
    if let Some(m) = &c.mode {
        cfg.set("mode", m)?;
    }
    if let Some(l) = &c.law {
        cfg.law = Some(parse_law(l)?);
        if c.mode.is_none() {
            cfg.mode = ModeKind::Pinn;
        }
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    cfg.fast |= c.fast;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(c) => {
            let t = cmd_train(&resolve(&c)?)?;
            println!(
                "{} (final loss {:.4e})",
                t.checkpoint.display(),
                t.final_loss
            );
        }
        Command::Fd(c) => {
            for p in cmd_fd(&resolve(&c)?)? {
                println!("{}", p.display());
            }
        }
        Command::Eval {
            common,
            checkpoint,
            against,
            reference,
        } => {
            let source = match (checkpoint, against) {
                (Some(p), _) => EvalSource::Checkpoint(p),
                (None, Some(d)) => EvalSource::Grids(d),
                (None, None) => unreachable!("clap requires one source"),
            };
            for r in cmd_eval(&resolve(&common)?, &source, &reference)? {
                println!(
                    "law {} {}: {:.4}%",
                    r.law, r.method, r.relative_error_percent
                );
            }
        }
        Command::Repro(c) => {
            let o = cmd_repro(&resolve(&c)?)?;
            for r in &o.rows {
                println!(
                    "law {} {:<5} {:.4}%",
                    r.law, r.method, r.relative_error_percent
                );
            }
            println!("{}", o.summary.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
