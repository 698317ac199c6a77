use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use resistwalk::cli_io::{parse_config_for, run_command, Command};
use resistwalk::Error;

#[derive(Parser)]
#[command(name = "resistwalk", version, about = "Random walks, local times and resistance on graph families")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a family graph and write graph.json.
    Gen(Args),
    /// All-pairs effective resistance.
    Resist(Args),
    /// Exact hitting, return and excursion quantities for one pair.
    Oracle(Args),
    /// Simulate one walk with local times and optionally a cover time.
    Walk(Args),
    /// Run a Monte Carlo or exact experiment.
    Exp(Args),
    /// Check graph, resistance and walk invariants.
    Validate(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config and the environment.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trial fan-out.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: Cli) -> resistwalk::Result<()> {
    let (command, args) = match cli.command {
        Cmd::Gen(a) => (Command::Gen, a),
        Cmd::Resist(a) => (Command::Resist, a),
        Cmd::Oracle(a) => (Command::Oracle, a),
        Cmd::Walk(a) => (Command::Walk, a),
        Cmd::Exp(a) => (Command::Exp, a),
        Cmd::Validate(a) => (Command::Validate, a),
    };
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let mut config = parse_config_for(&text, Some(command))?;
    if args.out.is_some() {
        config.output_dir = args.out;
    }
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Error::Range("--workers must be positive".into()));
        }
        config.workers = Some(w);
    }
    let dir = config.resolved_output_dir();
    let manifest = run_command(&config)?;
    println!("{}: wrote {} file(s) to {}", command, manifest.outputs.len() + 1, dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
