use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sne_cli::{
    cmd_construct, cmd_devsearch, cmd_dynamics, cmd_rafilter, cmd_verify, CliError, DynamicsOptions, GridOptions,
    Outcome, Verbosity,
};
use sne_core::VariantMode;

/// Stable coalitional outcomes for voting with transfers.
///
/// Reports go to standard output as JSON, a one-line summary to standard
/// error. Set SNE_VERBOSITY to quiet, normal or full.
///
/// Exit codes: 0 ok or nothing found, 1 witness found or unstable, 2 bad
/// input, 3 unsupported rule, 4 inconsistent state, 5 budget exhausted.
#[derive(Parser, Debug)]
#[command(name = "sne", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a stable state for a consensus instance and verify it.
    Construct {
        instance: PathBuf,
        /// Override the rule's default alternative (1-based).
        #[arg(long)]
        default: Option<usize>,
    },
    /// Check whether a state is stable; prints a deviation when it is not.
    Verify { instance: PathBuf, state: PathBuf },
    /// Search a transfer grid for a profitable coalitional deviation.
    Devsearch {
        instance: PathBuf,
        state: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Mode::Standard)]
        mode: Mode,
    },
    /// Reallocation test against each losing alternative.
    Rafilter {
        instance: PathBuf,
        state: PathBuf,
        /// Only test this alternative (1-based).
        #[arg(long)]
        target_alt: Option<usize>,
    },
    /// Apply deviations repeatedly until a fixpoint or a repeated state.
    Dynamics {
        instance: PathBuf,
        /// Start state; defaults to truthful voting without transfers.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Rotate through these transfer schemes instead of searching a grid.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Mode::Standard)]
        mode: Mode,
        #[arg(long, default_value_t = 20)]
        max_steps: usize,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Transfer changes are multiples of 1/DENOMINATOR [default: 2].
    #[arg(long)]
    denominator: Option<u32>,
    /// Largest change in grid steps [default: twice the largest utility].
    #[arg(long)]
    magnitude: Option<u32>,
    /// Largest coalition tried [default: all agents].
    #[arg(long)]
    coalition_cap: Option<usize>,
    /// Column checks before giving up.
    #[arg(long)]
    budget: Option<u64>,
    /// Only look for deviations electing this alternative (1-based).
    #[arg(long)]
    target_alt: Option<usize>,
}

impl From<GridArgs> for GridOptions {
    fn from(g: GridArgs) -> Self {
        GridOptions {
            denominator: g.denominator,
            magnitude: g.magnitude,
            coalition_cap: g.coalition_cap,
            budget: g.budget,
            target_alt: g.target_alt,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Standard,
    Sticky,
    Anonymous,
}

impl From<Mode> for VariantMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Standard => VariantMode::Standard,
            Mode::Sticky => VariantMode::Sticky,
            Mode::Anonymous => VariantMode::Anonymous,
        }
    }
}

fn run(cli: Cli, verbosity: Verbosity) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Construct { instance, default } => cmd_construct(&instance, default),
        Command::Verify { instance, state } => cmd_verify(&instance, &state, verbosity),
        Command::Devsearch {
            instance,
            state,
            grid,
            mode,
        } => cmd_devsearch(&instance, &state, mode.into(), &grid.into()),
        Command::Rafilter {
            instance,
            state,
            target_alt,
        } => cmd_rafilter(&instance, &state, target_alt, verbosity),
        Command::Dynamics {
            instance,
            state,
            candidates,
            grid,
            mode,
            max_steps,
        } => cmd_dynamics(
            &instance,
            &DynamicsOptions {
                start: state.as_deref(),
                candidates: candidates.as_deref(),
                mode: mode.into(),
                max_steps,
                grid: grid.into(),
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbosity = match Verbosity::from_env() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("sne: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match run(cli, verbosity) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
            // a closed pipe is the reader's choice, not an error
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if verbosity != Verbosity::Quiet {
                eprintln!("sne: {}", outcome.summary);
            }
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("sne: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
