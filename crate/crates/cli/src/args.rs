use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ouro",
    version,
    about = "Verify idempotent (Ouroboros) functions: membership, iteration, unity of derivatives, finite enumeration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Membership and iterated-equation checks on a box.
    Check(CheckArgs),
    /// Ouroboros derivatives and the unity claims.
    Derive(DeriveArgs),
    /// Idempotent maps on {0, ..., m-1}.
    Enumerate(EnumerateArgs),
    /// Print the catalog reference.
    Catalog(CatalogArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dual,
    Fd,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TargetArgs {
    /// Function in the expression DSL, e.g. "clamp(x, 0, 1)".
    #[arg(long, conflicts_with = "catalog")]
    pub expr: Option<String>,
    /// Catalog entry name (see `ouro catalog`).
    #[arg(long)]
    pub catalog: Option<String>,
    /// Arity or dimension of a catalog entry.
    #[arg(long)]
    pub n: Option<usize>,
    /// Weights for weighted_mean, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub w: Option<Vec<f64>>,
    /// Catalog parameter as name=v1,v2,... (repeatable).
    #[arg(long = "params", value_name = "K=V")]
    pub params: Vec<String>,
    /// Interval per dimension as lo:hi (repeatable; one value is reused for every dimension).
    #[arg(long = "box", value_name = "LO:HI", allow_hyphen_values = true)]
    pub boxes: Vec<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PlanArgs {
    /// Number of sample points [default: 256]
    #[arg(long)]
    pub samples: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Absolute tolerance [default: 1e-9]
    #[arg(long)]
    pub atol: Option<f64>,
    /// Relative tolerance [default: 1e-9]
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Deepest self-application checked by the iterated equation [default: 16]
    #[arg(long)]
    pub kmax: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Report format; csv is for `enumerate` only [default: text]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with defaults for any of these flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Add the generation time to JSON reports.
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Evaluate at this point instead of sampling the box.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Skip the membership check that normally runs first.
    #[arg(long)]
    pub skip_membership: bool,
    /// Treat DEGENERATE results as failures.
    #[arg(long)]
    pub strict_degenerate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    /// Domain size.
    #[arg(long)]
    pub m: Option<usize>,
    /// Print only the number of idempotent maps.
    #[arg(long)]
    pub count_only: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CatalogArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}
