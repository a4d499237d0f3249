use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "elo", version, about = "Concentration bounds for Bernoulli sums with real coefficients")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Worker threads for parallel scans; 0 picks the number of cores.
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,

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
    /// Largest point mass over all +-1 coefficient vectors of length n.
    Bound(PointArgs),
    /// Search for coefficient vectors beating the +-1 bound.
    Verify(VerifyArgs),
    /// Convex decomposition of a subset profile into pure profiles.
    Decompose(DecomposeArgs),
    /// Fourier inversion of one point mass, against the exact value.
    FourierCheck(FourierArgs),
    /// Maximizing split with its predicted value.
    Lstar(PointArgs),
    /// Maximizing split for every n in a range.
    Scan(RangeArgs),
    /// Residues of the maximizing split against its limiting ratio.
    ProbePeriodicity(RangeArgs),
}

#[derive(Debug, Args)]
pub struct PArgs {
    /// Probability: `r/s` runs exact arithmetic, a decimal runs MPFR floats.
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,

    /// Treat the decimal `p` as a surrogate for an irrational number.
    #[arg(long)]
    pub irrational: bool,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub n: u32,

    #[command(flatten)]
    pub p: PArgs,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    /// `from:to:step`, inclusive; `from:to` uses step 1.
    #[arg(long)]
    pub range: String,

    #[command(flatten)]
    pub p: PArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    Grid,
    Random,
    HillClimb,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,

    /// Probability, `r/s` or decimal; the bound is evaluated at its exact value.
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,

    #[arg(long, value_enum, default_value_t = StrategyName::Grid)]
    pub strategy: StrategyName,

    /// Grid coefficients, comma separated.
    #[arg(long, default_value = "-3,-2,-1,1,2,3", allow_hyphen_values = true)]
    pub values: String,

    /// Random vectors to draw.
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub low: f64,

    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub high: f64,

    /// Redraw coefficients smaller than this in absolute value.
    #[arg(long, default_value_t = 0.05)]
    pub min_abs: f64,

    /// Round random coefficients to multiples of this step.
    #[arg(long)]
    pub step: Option<f64>,

    /// Largest hill-climb perturbation, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,

    /// Perturbation sizes per coordinate and direction.
    #[arg(long, default_value_t = 4)]
    pub steps: usize,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ProfileSource {
    /// Profile JSON file (`-` for standard input): `{"i": .., "entries": [[k, r_num, r_den, w_num, w_den], ..]}`.
    #[arg(long)]
    pub profile: Option<String>,

    /// Positive reals, comma separated, whose subset-sum profile is decomposed.
    #[arg(long)]
    pub multiset: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: ProfileSource,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[arg(long)]
    pub n: u64,

    /// Imbalance `2 ell - n`; must have the parity of n.
    #[arg(long, allow_hyphen_values = true)]
    pub t: i64,

    #[arg(long, allow_hyphen_values = true)]
    pub x: i64,

    #[command(flatten)]
    pub p: PArgs,

    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    /// Integrand evaluations allowed per integral.
    #[arg(long, default_value_t = elo_core::quad::DEFAULT_MAX_EVALUATIONS)]
    pub max_evaluations: usize,
}
