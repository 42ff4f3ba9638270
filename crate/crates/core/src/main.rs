use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smab::cli::{cmd_run, cmd_sweep, CommandOptions, CommandOutput};
use smab::config::Overrides;
use smab::output::{summary_rows, summary_table};
use smab::Error;

/// Survival multi-armed bandit experiments.
#[derive(Debug, Parser)]
#[command(name = "smab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the experiment once per ruin-aversion value for every ruin-averse policy.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated lambda values, e.g. `0,1,10,100,1000`.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        lambdas: Vec<f64>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML experiment configuration.
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Preset: 200 runs, 50 bootstrap paths, horizon 500. Other flags override it.
    #[arg(long)]
    smoke: bool,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bootstrap paths per arm and stage, for every policy.
    #[arg(long)]
    paths: Option<usize>,
    /// Exploration coefficient, for every policy.
    #[arg(long)]
    alpha: Option<f64>,
    /// Initial budget.
    #[arg(long)]
    budget: Option<f64>,
    /// Maximum worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Do not report progress.
    #[arg(long)]
    quiet: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            smoke: self.smoke,
            runs: self.runs,
            horizon: self.horizon,
            seed: self.seed,
            paths: self.paths,
            alpha: self.alpha,
            budget: self.budget,
        }
    }
}

fn report_progress(done: usize, total: usize) {
    let step = (total / 20).max(1);
    if done.is_multiple_of(step) || done == total {
        eprintln!("  {done}/{total} runs");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, outcome) = match &cli.command {
        Command::Run { common } => {
            let options = command_options(common);
            (common, cmd_run(&common.config, &common.out, &common.overrides(), &options))
        }
        Command::Sweep { common, lambdas } => {
            let options = command_options(common);
            (common, cmd_sweep(&common.config, lambdas, &common.out, &common.overrides(), &options))
        }
    };
    match outcome {
        Ok(output) => {
            print_summary(&output);
            if !common.quiet {
                eprintln!("wrote {}", common.out.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Usage(_) => ExitCode::from(2),
                Error::Io { .. } => ExitCode::from(1),
            }
        }
    }
}

fn command_options(common: &CommonArgs) -> CommandOptions<'static> {
    CommandOptions {
        threads: common.threads,
        progress: if common.quiet { None } else { Some(&report_progress) },
    }
}

fn print_summary(output: &CommandOutput) {
    let rows = summary_rows(&output.result);
    print!("{}", summary_table(&rows, output.result.horizon));
}
