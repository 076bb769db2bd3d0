use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pagealloc::cli::{self, CliError};

#[derive(Parser)]
#[command(
    name = "pagealloc",
    about = "Single-page allocation benchmark: train and evaluate placement policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured agent; writes checkpoint, log and manifest.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Master seed; overrides the config file and PAGEALLOC_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides out.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate checkpoints against the x-fit baselines on paired seeds.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Checkpoint files; each becomes one session row. Repeatable.
        #[arg(long = "checkpoint")]
        checkpoints: Vec<PathBuf>,
        #[arg(long)]
        rollouts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Only evaluate the first/best/worst-fit baselines.
        #[arg(long)]
        baselines_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate verified adversarial workload scripts.
    GenWorkload {
        /// bf_good or wf_good.
        #[arg(long)]
        mode: String,
        #[arg(long)]
        page_size: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a script under each baseline and report the outcomes.
    Inspect { script: PathBuf },
    /// Train and evaluate at several history lengths; emit a comparison CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated history lengths, e.g. 0,5,10.
        #[arg(long, value_delimiter = ',')]
        history_lens: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train { config, seed, out } => {
            let outcome = cli::cmd_train(&config, seed, out)?;
            println!(
                "trained {} episodes; checkpoint {}",
                outcome.episodes,
                outcome.checkpoint.display()
            );
        }
        Command::Eval {
            config,
            checkpoints,
            rollouts,
            seed,
            baselines_only,
            out,
        } => {
            let (summary, episodes) =
                cli::cmd_eval(&config, &checkpoints, rollouts, seed, baselines_only, out)?;
            println!("summary  {}", summary.display());
            println!("episodes {}", episodes.display());
        }
        Command::GenWorkload {
            mode,
            page_size,
            count,
            seed,
            out,
        } => {
            let seed = seed.unwrap_or_else(cli::default_seed);
            let paths = cli::cmd_gen_workload(&mode, page_size, count, seed, &out)?;
            println!("wrote {} scripts to {}", paths.len(), out.display());
        }
        Command::Inspect { script } => {
            print!("{}", cli::cmd_inspect(&script)?);
        }
        Command::Sweep {
            config,
            history_lens,
            seed,
            out,
        } => {
            let path = cli::cmd_sweep(&config, &history_lens, seed, out)?;
            println!("sweep {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
