mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ordmms", version, about = "Ordinal maximin-share allocation of indivisible goods")]
pub struct Cli {
    /// Instance JSON file, or the name of a built-in fixture
    #[arg(long = "in", global = true, value_name = "PATH|FIXTURE")]
    pub input: Option<String>,
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximin share of one agent
    Mms(MmsArgs),
    /// Compute an allocation
    Solve(SolveArgs),
    /// Per-agent cover shares and their witness partitions
    Bbfs(BbfsArgs),
    /// Run a simulation campaign and write a CSV report
    Simulate(SimulateArgs),
    /// Exhaustively check the two-agent responsive counterexample
    VerifyResponsive(VerifyArgs),
    /// List the built-in fixtures, or print one as instance JSON
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct MmsArgs {
    #[arg(long, default_value_t = 0)]
    pub agent: usize,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    /// Number of parts; defaults to ⌊(ℓ+½)n⌋
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum, default_value_t = MmsMethod::Exact)]
    pub method: MmsMethod,
    /// Cap on positively valued goods for the exact solver
    #[arg(long, default_value_t = ordinal_mms::mms::DEFAULT_MAX_GOODS)]
    pub max_goods: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MmsMethod {
    Exact,
    Greedy,
    Bounds,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    #[arg(long, value_enum, default_value_t = SolveMethod::Exact)]
    pub method: SolveMethod,
    /// Bin-covering oracle for cover-share
    #[arg(long, value_enum, default_value_t = Oracle::Bidirectional)]
    pub oracle: Oracle,
    #[arg(long, default_value_t = ordinal_mms::mms::DEFAULT_MAX_GOODS)]
    pub max_goods: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    /// Balanced Lone Divider scaled by exact maximin partitions
    Exact,
    /// Balanced Lone Divider scaled by greedy number partitions
    GreedyThresholds,
    /// Bidirectional bag-filling at the agents' shares (ℓ = 1)
    Bbfs,
    /// Balanced Lone Divider scaled by cover shares (ℓ ≥ 2)
    CoverShare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Bidirectional,
    Unidirectional,
}

#[derive(Debug, Args)]
pub struct BbfsArgs {
    /// Number of bags; defaults to n
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum, default_value_t = Oracle::Bidirectional)]
    pub oracle: Oracle,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// uniform:LO:HI or geometric:MEAN
    #[arg(long, default_value = "uniform:1:1000")]
    pub dist: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub ns: Vec<usize>,
    /// Absolute numbers of goods
    #[arg(long, value_delimiter = ',', conflicts_with = "m_per_agent")]
    pub ms: Option<Vec<usize>>,
    /// Numbers of goods as multiples of n
    #[arg(long, value_delimiter = ',')]
    pub m_per_agent: Option<Vec<usize>>,
    #[arg(long)]
    pub max_m: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub ells: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Individual)]
    pub mode: Mode,
    /// Also render one metric as an SVG line chart
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value = "mean")]
    pub metric: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Ordinal,
    Thresholds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Individual,
    Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    pub name: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
