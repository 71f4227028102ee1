use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "magicflow",
    version,
    about = "Exact Bloch-ball maps of stabilizer-code distillation protocols",
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Output path, or `-` for stdout
    #[arg(long, short, global = true, default_value = "-")]
    pub output: String,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: available cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a protocol's map and export its polynomials
    Map(MapArgs),
    /// Check a code definition for structural errors
    Validate(CodeArgs),
    /// Compare the map with a brute-force trace oracle
    Verify(VerifyArgs),
    /// Find and classify fixed points
    FixedPoints(FixedPointArgs),
    /// Jacobian and eigenvalues at a point
    Jacobian(PointArgs),
    /// Apply the map repeatedly from a starting point
    Iterate(IterateArgs),
    /// Displacement field on a planar grid
    Flow(FlowArgs),
    /// Output infidelity against input infidelity near a target state
    ErrorCurve(ErrorCurveArgs),
    /// Circle polynomial in t = tan(θ/2) and its real roots
    CirclePoly(CirclePolyArgs),
    /// Stable fixed angles of all stage sequences up to a depth
    ConcatSurvey(SurveyArgs),
    /// Box-counting dimension of a point set
    Fractal(FractalArgs),
    /// Raw-state cost of reaching a target error
    Cost(CostArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CodeArgs {
    /// Catalog name or path to a code-definition file
    #[arg(long)]
    pub code: String,
}

#[derive(Args, Debug, Clone)]
pub struct StageArgs {
    /// Catalog name or file, optionally suffixed `@plane`; repeat to compose (first applied first)
    #[arg(long = "code", value_name = "CODE", required = true, num_args = 1)]
    pub codes: Vec<String>,

    /// Analysis plane (z0, y0, x0); omit for the full Bloch ball where allowed
    #[arg(long)]
    pub plane: Option<String>,

    /// Logical output qubit
    #[arg(long, default_value_t = 0)]
    pub output_index: usize,
}

#[derive(Args, Debug)]
pub struct MapArgs {
    #[command(flatten)]
    pub code: CodeArgs,

    /// Restrict to a plane (z0, y0, x0)
    #[arg(long)]
    pub plane: Option<String>,

    /// Logical output qubit for the planar form
    #[arg(long, default_value_t = 0)]
    pub output_index: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub code: CodeArgs,

    /// Number of random points in the ball
    #[arg(long, default_value_t = 100)]
    pub samples: usize,

    /// Largest accepted absolute deviation
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct FixedPointArgs {
    #[command(flatten)]
    pub stages: StageArgs,

    /// Seeds per axis (default: 200 in a plane, 40 in the full ball)
    #[arg(long)]
    pub grid: Option<usize>,

    /// Seed box `lo,hi` applied to every axis; Newton may leave it
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true,
          default_values_t = [-1.0, 1.0])]
    pub bounds: Vec<f64>,

    /// Also estimate the local convergence order toward each point
    #[arg(long)]
    pub order: bool,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[command(flatten)]
    pub stages: StageArgs,

    /// Point coordinates, comma separated (in-plane coordinates with --plane)
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "theta"
    )]
    pub point: Option<Vec<f64>>,

    /// Pure state at this angle on the analysis circle (needs --plane)
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct IterateArgs {
    #[command(flatten)]
    pub at: PointArgs,

    /// Number of applications
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    pub stages: StageArgs,

    /// Nodes per axis
    #[arg(long, default_value_t = 41)]
    pub grid: usize,

    /// Window `u_lo,u_hi,v_lo,v_hi`
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true,
          default_values_t = [-1.0, 1.0, -1.0, 1.0])]
    pub region: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct ErrorCurveArgs {
    #[command(flatten)]
    pub stages: StageArgs,

    /// Target angle on the analysis circle
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,

    /// Smallest input infidelity
    #[arg(long, default_value_t = 1e-4)]
    pub eps_min: f64,

    /// Largest input infidelity
    #[arg(long, default_value_t = 1e-2)]
    pub eps_max: f64,

    /// Logarithmically spaced samples
    #[arg(long, default_value_t = 21)]
    pub points: usize,

    /// Applications of the map per sample
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
}

#[derive(Args, Debug)]
pub struct CirclePolyArgs {
    #[command(flatten)]
    pub stages: StageArgs,

    /// Angle convention, e.g. sin-x-cos-z (default: the plane's own)
    #[arg(long)]
    pub param: Option<String>,

    /// Fixed-point condition: collinear, sin-coordinate or cos-coordinate
    #[arg(long, default_value = "collinear")]
    pub condition: String,
}

#[derive(Args, Debug)]
pub struct SurveyArgs {
    #[command(flatten)]
    pub stages: StageArgs,

    /// Deepest sequence length
    #[arg(long, default_value_t = 12)]
    pub levels: usize,

    /// Angle samples used to bracket roots
    #[arg(long, default_value_t = 20000)]
    pub grid: usize,

    /// Largest number of sequences examined
    #[arg(long, default_value_t = 1 << 14)]
    pub cap: usize,
}

#[derive(Args, Debug)]
pub struct FractalArgs {
    /// File of values: one per line, or CSV with a `theta` column
    #[arg(long, conflicts_with = "code")]
    pub input: Option<PathBuf>,

    /// Survey these bases instead of reading a file
    #[arg(long = "code", value_name = "CODE", num_args = 1)]
    pub code: Vec<String>,

    /// Analysis plane for the survey
    #[arg(long)]
    pub plane: Option<String>,

    /// Survey depth
    #[arg(long, default_value_t = 12)]
    pub levels: usize,

    /// Finest box size is 2^-max_exponent
    #[arg(long, default_value_t = 16)]
    pub max_exponent: u32,

    /// Fixed fit window `j_lo,j_hi` (default: best R²)
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub window: Option<Vec<u32>>,

    /// Shortest automatic fit window
    #[arg(long, default_value_t = 4)]
    pub min_window: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CostKindArg {
    Linear,
    ReedMuller,
    Synthesis,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    /// Cost model
    #[arg(long, value_enum)]
    pub model: CostKindArg,

    /// Input infidelity
    #[arg(long, default_value_t = 1e-2)]
    pub eps_in: f64,

    /// Target infidelity
    #[arg(long)]
    pub eps_tar: f64,

    /// Physical qubits per round (linear model)
    #[arg(long)]
    pub n: Option<usize>,

    /// Output qubits per round (linear model)
    #[arg(long, default_value_t = 1)]
    pub k: usize,

    /// Success probability per round (linear model)
    #[arg(long)]
    pub p_s: Option<f64>,

    /// Linear suppression prefactor (linear model)
    #[arg(long)]
    pub k_prime: Option<f64>,

    /// Constant of the synthesis model
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}
