use clap::{Parser, Subcommand};
use dtuq_cli::commands::{describe, run_and_write};
use dtuq_cli::config::{Command, RunConfig, Settings};
use dtuq_cli::error::{CliError, CliResult};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dtuq", version, about = "Decision-theoretic uncertainty experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// GP uncertainty, dispersion and expected score across the input axis
    Fig2(Args),
    /// BALD estimation error against training-set size
    Fig3(Args),
    /// Expected uncertainty reduction for a conjugate model
    Eur(Args),
    /// Pool-based acquisition benchmark with a distractor arm
    ActiveLearning(Args),
    /// Re-run whatever command a config file records
    Run(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON config; flags given here override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores); never changes the output
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    settings: Settings,
}

fn resolve(sub: Sub) -> CliResult<RunConfig> {
    let (command, args) = match sub {
        Sub::Fig2(a) => (Some(Command::Fig2), a),
        Sub::Fig3(a) => (Some(Command::Fig3), a),
        Sub::Eur(a) => (Some(Command::Eur), a),
        Sub::ActiveLearning(a) => (Some(Command::ActiveLearning), a),
        Sub::Run(a) => (None, a),
    };
    let file = match &args.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let command = match command.or(file.command) {
        Some(c) => c,
        None => return Err(CliError::Usage("run needs --config naming a command".into())),
    };
    RunConfig::resolve(command, file.overlay(args.settings), args.out, args.jobs)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli.command).and_then(|cfg| {
        let artifacts = run_and_write(&cfg)?;
        Ok((cfg, artifacts))
    });
    match result {
        Ok((cfg, artifacts)) => {
            if let Some(text) = &artifacts.stdout {
                print!("{text}");
            }
            eprintln!("{}", describe(&cfg, &artifacts));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
