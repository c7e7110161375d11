//! The `gwp` command line: graph files, operator expressions, and reports
//! for the moment, cumulant, freeness and embedding checks.

pub mod commands;
pub mod expr;
pub mod graph_file;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use expr::{parse_element_expr, ExprError};
pub use graph_file::{parse_graph_file, parse_graph_json, GraphFileSpec};
pub use report::{Report, Row};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Compute(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Symbolic,
    Numeric,
    Both,
}

impl Mode {
    pub fn symbolic(self) -> bool {
        self != Mode::Numeric
    }

    pub fn numeric(self) -> bool {
        self != Mode::Symbolic
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Symbolic => "symbolic",
            Mode::Numeric => "numeric",
            Mode::Both => "both",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gwp", version, about = "Moments, cumulants and freeness for graph operator algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Graph file (JSON with "vertices" and "edges").
    #[arg(long)]
    pub graph: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: Mode,
    /// Base vertex; optional on one-vertex graphs.
    #[arg(long)]
    pub vertex: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Rational scale of each generator L_l + L_l*.
    #[arg(long, conflicts_with = "paper_normalization")]
    pub scale: Option<String>,
    /// Scale each generator by 1/sqrt(2).
    #[arg(long)]
    pub paper_normalization: bool,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scale: ScaleArgs,
    /// Operator expression; defaults to the generating operator at --vertex.
    #[arg(long, conflicts_with_all = ["scale", "paper_normalization"])]
    pub expr: Option<String>,
    #[arg(long = "order", visible_alias = "max-order", default_value_t = 8)]
    pub order: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments φ(a^n).
    Moments(SeriesArgs),
    /// Free cumulants k_n(a, ..., a).
    Cumulants(SeriesArgs),
    /// R-transform coefficients.
    Rtransform(SeriesArgs),
    /// Checks tr(T^n) = c_{n/2} N^{n/2} three ways.
    VerifyCatalan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long = "max-order", visible_alias = "order", default_value_t = 10)]
        max_order: usize,
    },
    /// Diagram-distinctness and a mixed-cumulant scan for two words.
    Freeness {
        #[command(flatten)]
        common: Common,
        /// First word: comma-separated edge ids or a vertex id.
        #[arg(long)]
        w1: String,
        #[arg(long)]
        w2: String,
        #[arg(long, default_value_t = 4)]
        scan_order: usize,
        /// Highest order at which degree-two monomials are scanned.
        #[arg(long, default_value_t = gwp_core::freeprob::DEFAULT_MONOMIAL_ORDER)]
        monomial_order: usize,
    },
    /// Operator relations on the truncated Fock space.
    Relations {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        cutoff: usize,
    },
    /// Free group factor embedding at a vertex.
    EmbedCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        generators: usize,
        #[arg(long = "max-order", visible_alias = "order", default_value_t = 8)]
        max_order: usize,
    },
}

pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            };
        }
    };
    let echo = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let json = match &cli.command {
        Command::Moments(a) | Command::Cumulants(a) | Command::Rtransform(a) => a.common.json,
        Command::VerifyCatalan { common, .. }
        | Command::Freeness { common, .. }
        | Command::Relations { common, .. }
        | Command::EmbedCheck { common, .. } => common.json,
    };
    match commands::execute(&cli.command, echo) {
        Ok(report) => Outcome {
            stdout: if json { report.to_json() } else { report.to_table() },
            stderr: String::new(),
            code: if report.all_verified() { 0 } else { 1 },
        },
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: 2,
        },
    }
}
