use std::path::PathBuf;
use std::process::ExitCode;

use benney_cli::{run, CliError, Command};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "benney", version, about = "Generate and verify Benney long-wave solutions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample v, u, h on the generation grid.
    Generate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the residual suites and convergence ladders.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check conservation of G along characteristics.
    Transport {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (cmd, config) = match cli.command {
        Cmd::Generate { config } => (Command::Generate, config),
        Cmd::Verify { config } => (Command::Verify, config),
        Cmd::Transport { config } => (Command::Transport, config),
    };
    match run(cmd, &config, &cli.out, cli.quiet) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            CliError::exit_code(&e)
        }
    }
}
