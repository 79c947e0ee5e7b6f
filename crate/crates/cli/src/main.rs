//! Command-line front end: mode-set inspection, occupation-number solving,
//! state expansions, Hardy-chain search, the projector-sum inequality, and
//! the bundled end-to-end reproduction report.

mod commands;
mod out;
mod repro;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use modectx::scalar::Radical;

use commands::{CliError, ModeArg, StateKind, StateSpec, StatsArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Backend {
    /// Exact arithmetic over rationals extended by square roots.
    Exact,
    /// Double precision with a 1e-9 zero tolerance.
    Float,
}

#[derive(Parser)]
#[command(
    name = "modectx",
    version,
    about = "Occupation-number contextuality analysis"
)]
struct Cli {
    /// Scalar backend for all computations.
    #[arg(long, global = true, value_enum, default_value = "exact")]
    backend: Backend,
    /// Write the JSON report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the solver; results are identical to sequential.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect mode-set files and the built-in canonical set.
    Modeset {
        #[command(subcommand)]
        action: ModesetAction,
    },
    /// Decide, enumerate, or count non-contextual occupation assignments.
    Solve {
        /// `canonical` or a mode-set JSON file.
        #[arg(long, default_value = "canonical")]
        modeset: String,
        #[arg(long)]
        particles: u32,
        #[arg(long, value_enum)]
        stats: StatsArg,
        #[arg(long, value_enum, default_value = "decide")]
        mode: ModeArg,
    },
    /// Build a product state and report its terms and normalization.
    State {
        #[arg(long, value_enum)]
        kind: StateKind,
        /// Comma-separated mode ids, e.g. `v67,v69`.
        #[arg(long)]
        modes: String,
        /// Particle count for `boson-n`.
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value = "canonical")]
        modeset: String,
    },
    /// Expand a state in one measurement context.
    Expand {
        /// State spec such as `fermion-pair:v67,v69` or `boson-n:v16,3`.
        #[arg(long)]
        state: String,
        #[arg(long)]
        context: String,
        #[arg(long, default_value = "canonical")]
        modeset: String,
    },
    /// Search all trigger outcomes for contradiction chains.
    Hardy {
        #[arg(long)]
        state: String,
        #[arg(long, default_value = "canonical")]
        modeset: String,
    },
    /// Projector-sum inequality report.
    Sic {
        #[arg(long, default_value = "canonical")]
        modeset: String,
        #[arg(long)]
        particles: u32,
        #[arg(long, value_enum)]
        stats: StatsArg,
    },
    /// Run every bundled claim end to end and report pass/fail per claim.
    ReproducePaper,
}

#[derive(Subcommand)]
enum ModesetAction {
    /// Check orthogonality, identity resolution, and membership counts.
    Validate {
        #[arg(long, default_value = "canonical")]
        modeset: String,
    },
    /// Print the built-in 18-mode set in the mode-set JSON format.
    DumpCanonical,
}

fn spec_from_parts(kind: StateKind, modes: &str, n: u32) -> Result<StateSpec, CliError> {
    let text = match kind {
        StateKind::FermionPair => format!("fermion-pair:{modes}"),
        StateKind::BosonPair => format!("boson-pair:{modes}"),
        StateKind::BosonN => format!("boson-n:{modes},{n}"),
    };
    StateSpec::parse(&text)
}

fn run<S: modectx::Scalar>(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Modeset { action } => match action {
            ModesetAction::Validate { modeset } => {
                let valid = commands::cmd_modeset_validate::<S>(modeset, out)?;
                if !valid {
                    return Err(CliError::Domain("mode set failed validation".into()));
                }
                Ok(())
            }
            ModesetAction::DumpCanonical => commands::cmd_modeset_dump_canonical::<S>(out),
        },
        Command::Solve {
            modeset,
            particles,
            stats,
            mode,
        } => commands::cmd_solve::<S>(modeset, *particles, *stats, *mode, cli.jobs.max(1), out),
        Command::State {
            kind,
            modes,
            n,
            modeset,
        } => {
            let spec = spec_from_parts(*kind, modes, *n)?;
            commands::cmd_state::<S>(&spec, modeset, out)
        }
        Command::Expand {
            state,
            context,
            modeset,
        } => {
            let spec = StateSpec::parse(state)?;
            commands::cmd_expand::<S>(&spec, context, modeset, out)
        }
        Command::Hardy { state, modeset } => {
            let spec = StateSpec::parse(state)?;
            commands::cmd_hardy::<S>(&spec, modeset, out)
        }
        Command::Sic {
            modeset,
            particles,
            stats,
        } => commands::cmd_sic::<S>(modeset, *particles, *stats, out),
        Command::ReproducePaper => {
            repro::cmd_reproduce_paper(out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::ReproducePaper) && cli.backend == Backend::Float {
        eprintln!("reproduce-paper runs on the exact backend; drop --backend float");
        return ExitCode::from(2);
    }
    let result = match cli.backend {
        Backend::Exact => run::<Radical>(&cli),
        Backend::Float => run::<f64>(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
