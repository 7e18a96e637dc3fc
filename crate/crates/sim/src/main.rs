use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsgpa::{format_table, load_config, plan, summarize_dir, RunStatus, SimError};

#[derive(Debug, Parser)]
#[command(
    name = "dsgpa",
    version,
    about = "Distributed primal-dual SGD experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute every run in a configuration and write traces.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        jobs: Option<NonZeroUsize>,
    },
    /// Print per-algorithm statistics for a results directory.
    Summarize { dir: PathBuf },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command) -> Result<(), SimError> {
    match command {
        Command::Run { config, out, jobs } => {
            let experiment = plan(load_config(&config)?)?;
            let out = out.or_else(|| experiment.default_output()).ok_or_else(|| {
                SimError::Config("no output directory: pass --out or set `output`".into())
            })?;
            let results = experiment.execute(&out, jobs.map(NonZeroUsize::get))?;
            let diverged = results
                .iter()
                .filter(|r| r.status == RunStatus::Diverged)
                .count();
            println!(
                "{} runs written to {} ({diverged} diverged)",
                results.len(),
                out.display()
            );
        }
        Command::Summarize { dir } => {
            print!("{}", format_table(&summarize_dir(&dir)?));
        }
        Command::Validate { config } => {
            let experiment = plan(load_config(&config)?)?;
            println!(
                "{}: ok ({} runs, n = {}, p = {})",
                config.display(),
                experiment.runs.len(),
                experiment.network.n(),
                experiment.problem.p()
            );
        }
    }
    Ok(())
}
