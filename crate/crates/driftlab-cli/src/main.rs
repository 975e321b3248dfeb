//! `driftlab`: run kernel drifting-field experiments from a TOML config.
//!
//! Every subcommand works with no config at all (built-in defaults match
//! the library's shipped experiment schedules) and writes its reports into
//! `--out`. Exit codes: 0 all assertions passed, 1 a scientific assertion
//! failed or a numerical error surfaced, 2 the request itself was invalid
//! (bad config, bad grammar, bad file).

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use driftlab::report::fnv1a64;
use driftlab::Error;

mod cmds;
mod runcfg;

use cmds::Ctx;
use runcfg::RunConfig;

#[derive(Parser)]
#[command(name = "driftlab", version, about = "Kernel drifting-field laboratory")]
struct Cli {
    /// TOML run config; `-` reads stdin. Omit to use built-in defaults.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Directory for CSV/JSON reports (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// RNG seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify gradient, elliptic, and spectral identities on sampled measures.
    Identities,
    /// Run the escaping-satellite family and its closed-form bound.
    Satellite,
    /// Run the slowly-varying tilt family on a power-law background.
    Tilt,
    /// Tabulate the drifting field between two measures on a grid.
    Field,
    /// Check an anchor observable along a sequence of measures.
    Anchor,
    /// Integrate particles along the drifting field with diagnostics.
    Simulate,
}

fn read_config(arg: Option<&str>) -> Result<String, Error> {
    match arg {
        None => Ok(String::new()),
        Some("-") => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
        Some(path) => Ok(std::fs::read_to_string(path)?),
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter {
                name: "threads",
                reason: e.to_string(),
            })?;
    }
    let text = read_config(cli.config.as_deref())?;
    let cfg = RunConfig::parse(&text)?;
    std::fs::create_dir_all(&cli.out)?;
    let ctx = Ctx {
        cfg: &cfg,
        out: &cli.out,
        config_hash: format!("{:016x}", fnv1a64(text.as_bytes())),
        seed: cfg.seed(cli.seed),
    };
    match cli.command {
        Command::Identities => cmds::cmd_identities(&ctx),
        Command::Satellite => cmds::cmd_satellite(&ctx),
        Command::Tilt => cmds::cmd_tilt(&ctx),
        Command::Field => cmds::cmd_field(&ctx),
        Command::Anchor => cmds::cmd_anchor(&ctx),
        Command::Simulate => cmds::cmd_simulate(&ctx),
    }
}

/// Bad request vs. bad result: config and parameter problems are usage
/// errors (2); numerical blowups and failed assertions are findings (1).
fn classify(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::Unsupported(_)
        | Error::Io(_) => 2,
        Error::Domain(_) | Error::Overflow(_) | Error::Numerical(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "driftlab: assertions failed (reports written to {})",
                cli.out.display()
            );
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("driftlab: error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}
