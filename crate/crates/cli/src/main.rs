use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dfrc_cli::{cmd_run, cmd_sweep, cmd_trace, Overrides};
use dfrc_core::Policy;
use log::error;

/// Min-max delay power allocation for a DFRC roadside unit.
///
/// Exit status: 0 on success, 2 for config errors, 3 when a slot is
/// infeasible, 1 otherwise. Set DFRC_LOG (error, warn, info, debug) for
/// diagnostics on stderr.
#[derive(Parser)]
#[command(name = "dfrc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Alg. 1 bracket tolerance, seconds.
    #[arg(long)]
    eps_delay: Option<f64>,
    /// Alg. 2 step tolerance, watts.
    #[arg(long)]
    eps_power: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            eps_delay: self.eps_delay,
            eps_power: self.eps_power,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Allocate every slot with one policy.
    Run {
        #[command(flatten)]
        common: Common,
        /// epa, closed_form, alg1, alg2 or oracle.
        #[arg(long, default_value = "alg2")]
        policy: Policy,
    },
    /// Sweep one axis over slot 0.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep spec (TOML).
        #[arg(long)]
        sweep: PathBuf,
        /// Alg. 1 power-boundary CSV; defaults to <out>_boundary.csv.
        #[arg(long)]
        boundary_out: Option<PathBuf>,
    },
    /// Alg. 1 delay bracket per iteration on slot 0.
    Trace {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DFRC_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { common, policy } => cmd_run(
            &common.config,
            *policy,
            common.out.as_deref(),
            &common.overrides(),
        ),
        Command::Sweep {
            common,
            sweep,
            boundary_out,
        } => cmd_sweep(
            &common.config,
            sweep,
            common.out.as_deref(),
            boundary_out.as_deref(),
            &common.overrides(),
        ),
        Command::Trace { common } => {
            cmd_trace(&common.config, common.out.as_deref(), &common.overrides())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("dfrc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
