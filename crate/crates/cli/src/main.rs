use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod realize;

/// Compile, check and generate Clifford+T circuits.
///
/// Exit codes: 0 success, 1 tolerance exceeded, 2 parse error or bad
/// parameters, 3 contract error, 4 postselection with probability zero,
/// 5 resource budget exceeded.
#[derive(Debug, Parser)]
#[command(name = "cmagic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Plain,
    Postselected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Path {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Cm,
    Pbc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenClass {
    IqpIsing,
    SparseIqp,
    Rcs,
    #[value(alias = "conjugated-clifford")]
    Conjugated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsClass {
    IqpIsing,
    SparseIqp,
    Rcs,
    #[value(alias = "conjugated-clifford")]
    Conjugated,
    /// `H` on every line: uniform outputs.
    Uniform,
    /// No gates: every sample is all zeros.
    Point,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a circuit onto its magic register.
    Compile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Plain)]
        mode: Mode,
        /// Postselected variant: `a` compiles onto the T-count register,
        /// `b` feeds every `|0⟩` line from `|A⟩`.
        #[arg(long, value_enum, default_value_t = Path::A)]
        path: Path,
        #[arg(long, value_enum, default_value_t = Emit::Cm)]
        emit: Emit,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare exact output distributions.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// `compiled`, `self`, or a file holding a circuit or a `pbc` program.
        #[arg(long, default_value = "compiled")]
        against: String,
        /// Classical reconstruction applied to an `--against` circuit file.
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Plain)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Path::A)]
        path: Path,
        /// Largest register simulated densely.
        #[arg(long, default_value_t = 14)]
        budget: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Generate circuit family instances.
    Gen {
        #[arg(long, value_enum)]
        class: GenClass,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Comma separated single-qubit word for the conjugated class.
        #[arg(long, default_value = "T")]
        v_word: String,
        #[arg(long)]
        u_len: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Anticoncentration and T/T† exchange reports for a class.
    Stats {
        #[arg(long, value_enum)]
        class: StatsClass,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value = "T")]
        v_word: String,
        #[arg(long)]
        u_len: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Number of (instance, outcome) pairs.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Outcomes drawn per instance.
        #[arg(long, default_value_t = 10)]
        outcomes: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
