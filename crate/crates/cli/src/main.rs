//! `somm`: decide litmus-test outcomes under axiomatic memory models.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{EngineKind, RunArgs};

#[derive(Parser, Debug)]
#[command(
    name = "somm",
    version,
    about = "Memory-model simulation by second-order model checking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DumpKind {
    /// Event structure as JSON.
    Json,
    /// Event structure as Graphviz DOT.
    Dot,
    /// Relational structure in the S-expression format.
    Structure,
    /// The model's sentence in the S-expression format (needs --model).
    Sentence,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether the test's outcome is allowed. Exit 0 allowed, 1
    /// forbidden, 2 error or timeout.
    Check {
        /// Litmus file, or - for stdin.
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write the QBF instance (QCIR or QDIMACS) and a JSON sidecar.
    Emit {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Output path; defaults to <test>.<model>.<ext> in the current
        /// directory. The sidecar goes to <output>.json.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the store-buffering family SB(n) and print CSV rows of
    /// n, events, variables, verdict, millis.
    Bench {
        #[arg(long, default_value_t = 2)]
        from: usize,
        #[arg(long, default_value_t = 5)]
        to: usize,
        /// Instances run in parallel.
        #[arg(long, default_value_t = 1, value_parser = config::positive)]
        workers: usize,
        /// Directory for instances when the backend emits.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check the event structure of a test against the structural axioms.
    /// Exit 0 when all hold, 1 on violations, 2 on errors.
    Validate {
        input: PathBuf,
        /// Read an event-structure JSON dump instead of a litmus file.
        #[arg(long)]
        es: bool,
        #[arg(long)]
        machine: bool,
    },
    /// Print intermediate artefacts of the pipeline.
    Dump {
        input: PathBuf,
        #[arg(long = "as", value_enum, default_value = "json")]
        what: DumpKind,
        #[arg(long, short, value_parser = |s: &str| s.parse::<somm_core::models::Model>())]
        model: Option<somm_core::models::Model>,
        #[arg(long)]
        jr_n: Option<usize>,
    },
    /// Decide a QCIR or QDIMACS file with the embedded solver. Exit 10 when
    /// true, 20 when false, 2 on errors.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "cegar")]
        engine: EngineKind,
        /// Time limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { input, run } => commands::check(&input, &run),
        Command::Emit { input, run, out } => commands::emit(&input, &run, out.as_deref()),
        Command::Bench {
            from,
            to,
            workers,
            out_dir,
            run,
        } => commands::bench(from, to, workers, out_dir.as_deref(), &run),
        Command::Validate { input, es, machine } => commands::validate(&input, es, machine),
        Command::Dump {
            input,
            what,
            model,
            jr_n,
        } => commands::dump(&input, what, model, jr_n),
        Command::Solve {
            input,
            engine,
            timeout,
        } => commands::solve(&input, engine, timeout),
    };
    ExitCode::from(code)
}
