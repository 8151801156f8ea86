use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};
use polar_euler::config::RunConfig;
use polar_euler::expcli::{self, Outcome};
use polar_euler::Result;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "polar-euler", version, about = "Norm-inflation experiments for 2D Euler on polar grids")]
struct Cli {
    /// TOML run configuration; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (else `output.dir`, `$POLAR_EULER_OUT`, `./out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key.path=value`, applied in order after the config file.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and verify the initial data.
    Build,
    /// Evolve the initial data and record the monitors.
    Evolve,
    /// Repeat a run over the `[sweep]` axis values.
    Sweep,
    /// Evolve separated rescaled pieces and measure their interaction.
    Glue,
    /// Norms of a serialized field.
    Norms { field: PathBuf },
    /// Radial velocity far inside the support of `g(r)cos(Nα)`.
    Decay,
    /// Empirical log-Lipschitz constant of the initial velocity.
    Loglip,
}

fn report<T: Serialize>(r: Result<(T, Outcome)>) -> Result<Outcome> {
    let (summary, outcome) = r?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(outcome)
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p, &cli.overrides)?,
        None => RunConfig::parse_with("", &cli.overrides)?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.validate()?;
    }
    let out = cfg.output_dir(cli.out.as_deref());
    info!("writing to {}", out.display());
    match cli.command {
        Command::Build => report(expcli::cmd_build(&cfg, &out)),
        Command::Evolve => report(expcli::cmd_evolve(&cfg, &out)),
        Command::Sweep => report(expcli::cmd_sweep(&cfg, &out, cli.workers)),
        Command::Glue => report(expcli::cmd_glue(&cfg, &out)),
        Command::Norms { field } => report(expcli::cmd_norms(&cfg, &field, &out)),
        Command::Decay => report(expcli::cmd_decay(&cfg, &out)),
        Command::Loglip => report(expcli::cmd_loglip(&cfg, &out)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            if outcome != Outcome::Success {
                error!("run finished with {outcome:?}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(expcli::error_exit_code(&e) as u8)
        }
    }
}
