mod commands;
mod error;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "chaoslab",
    version,
    about = "Exact discrete Malliavin calculus and normal approximation bounds on Rademacher sequences"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Emit reports as JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Largest horizon enumerated outcome by outcome.
    #[arg(long, global = true, value_name = "N")]
    cap_enum: Option<usize>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "CHAOSLAB_THREADS", hide = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Input {
    /// Kernel file (JSON).
    pub kernel: PathBuf,

    /// Model file (JSON); defaults to the model embedded in the kernel file,
    /// then to the symmetric model.
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Rescale the kernel to unit variance.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Auto,
    Enumerate,
    Factorized,
    SymmetricFast,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Wasserstein,
    Kolmogorov,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Inhomogeneous,
    Symmetric,
    Product,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Upper,
    Lower,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded identity and inequality suite.
    Verify {
        /// TOML configuration.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate the Wasserstein and Kolmogorov bounds against exact distances.
    Bound {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "both")]
        distance: DistanceArg,
        #[arg(long, value_enum, default_value = "auto")]
        engine: EngineArg,
    },
    /// Build a kernel with fourth moment 3 (or the fixed-influence sequence).
    Counterexample {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_enum, default_value = "upper")]
        branch: BranchArg,
        /// Bisection stopping tolerance on |E[F^4] - 3|.
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        /// Write the kernel file here; otherwise it goes to stdout and the
        /// report to stderr.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Second and fourth moments and influences.
    Moments {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "auto")]
        engine: EngineArg,
    },
    /// Distances to the standard normal law.
    Distance {
        #[command(flatten)]
        input: Input,
        /// Sample count when the horizon is past the enumeration cap.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Hoeffding decomposition and the de Jong-type bound.
    Dejong {
        #[command(flatten)]
        input: Input,
        /// Hypercontractivity constant of the component laws.
        #[arg(long, default_value_t = 1.0)]
        kappa_m: f64,
    },
}

/// Settings shared by every command.
pub struct Global {
    pub seed: Option<u64>,
    pub json: bool,
    pub cap_enum: Option<usize>,
}

/// A finished command: its report and whether every assertion held.
pub struct Finished {
    pub text: String,
    pub ok: bool,
}

fn run(cli: Cli) -> Result<Finished, CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("CHAOSLAB_THREADS: {e}")))?;
    }
    let g = Global {
        seed: cli.seed,
        json: cli.json,
        cap_enum: cli.cap_enum,
    };
    match cli.command {
        Command::Verify { config } => commands::verify(&g, config.as_deref()),
        Command::Bound {
            input,
            distance,
            engine,
        } => commands::bound(&g, &input, distance, engine),
        Command::Counterexample {
            kind,
            m,
            n,
            branch,
            tol,
            out,
        } => commands::counterexample(&g, kind, m, n, branch, tol, out.as_deref()),
        Command::Moments { input, engine } => commands::moments(&g, &input, engine),
        Command::Distance {
            input,
            samples,
            confidence,
        } => commands::distance(&g, &input, samples, confidence),
        Command::Dejong { input, kappa_m } => commands::dejong(&g, &input, kappa_m),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(done) => {
            print!("{}", done.text);
            if done.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
