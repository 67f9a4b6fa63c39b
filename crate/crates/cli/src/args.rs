//! Flag definitions. Every subcommand's arguments double as its config
//! record: field names serialize to the same kebab-case keys as the flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "boundcop",
    version,
    about = "Bound-copula dependence and replicated-queue latency experiments"
)]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Read the command and its parameters from a `key = value` file.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "print_config")]
    pub config: Option<PathBuf>,
    /// Print the parsed command as a config file and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate C(u, v).
    Eval(EvalArgs),
    /// Check boundary conditions and 2-increasingness numerically.
    Validate(ValidateArgs),
    /// Dependence and tail measures.
    Measures(MeasuresArgs),
    /// Mean wait and total service effort over a theta range.
    Tables(TablesArgs),
    /// Discrete-event simulation of the replicated queue.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    /// Copula spec, e.g. `bound(theta=0.5)`.
    pub spec: String,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probes {
    Diagonal,
    None,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ValidateArgs {
    pub spec: String,
    /// Grid resolution.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Seeded random rectangles on top of the grid.
    #[arg(long, default_value_t = 10_000)]
    pub random_count: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Thin rectangles straddling both diagonals.
    #[arg(long, value_enum, default_value_t = Probes::Diagonal)]
    pub probes: Probes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Closed,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasuresFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MeasuresArgs {
    pub spec: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
    pub method: MethodArg,
    /// Quadrature grid; checked against twice this resolution.
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    /// Probe level for the numeric tail coefficients.
    #[arg(long, default_value_t = 1e-8)]
    pub probe: f64,
    #[arg(long, value_enum, default_value_t = MeasuresFormat::Table)]
    pub format: MeasuresFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    ShiftedExp,
    HypoExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    /// Termwise formula with `2u - 1` in place of `max(2u - 1, 0)`.
    Paper,
    /// True piecewise diagonal, integrated numerically.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TablesFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// Rate of each exponential phase
    #[arg(long)]
    pub mu: f64,
    /// Shift of the shifted exponential.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Poisson arrival rate
    #[arg(long)]
    pub lambda: f64,
    /// `start:stop:step`, inclusive, or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Paper)]
    pub variant: VariantArg,
    /// Round half-up to this many decimals.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<u32>,
    #[arg(long, value_enum, default_value_t = TablesFormat::Csv)]
    pub format: TablesFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    /// One server with min-service draws.
    Reduced,
    /// Two servers with cancel-on-finish; theta in {-1, 0, 1}.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// Rate of each exponential phase
    #[arg(long)]
    pub mu: f64,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Poisson arrival rate
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Exact)]
    pub variant: VariantArg,
    /// Arrivals per replication, warm-up included.
    #[arg(long, default_value_t = 100_000)]
    pub arrivals: usize,
    /// Leading arrivals left out of the statistics; default a tenth.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Reduced)]
    pub mode: ModeArg,
    /// Also write one CSV row per replication to this path.
    #[arg(long, value_name = "PATH")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}
