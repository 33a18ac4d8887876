use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ergodic-se",
    version,
    about = "Spectral-efficiency distributions and averages for Poisson cellular networks"
)]
pub struct Cli {
    /// key=value file supplying flag defaults; flags on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for simulations (default: $ERGODIC_SE_WORKERS, else all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CDF of the local-average SIR
    SirCdf(SirCdfArgs),
    /// CDF of the spectral efficiency, optionally against a PPP simulation
    SeCdf(SeCdfArgs),
    /// Exponential lower tail of the spectral-efficiency CDF
    Coverage(CoverageArgs),
    /// Spatial average of the spectral efficiency, at one eta or over a sweep
    MeanSe(MeanSeArgs),
    /// Lognormal fit to the spectral-efficiency distribution
    Lognormal(LognormalArgs),
    /// s* and the constant-segment level for a range of path-loss exponents
    TableSstar(TableSstarArgs),
    /// Average spectral efficiency for every antenna pair up to a size
    TableMimo(TableMimoArgs),
    /// Monte-Carlo distribution of a per-user quantity
    Simulate(SimulateArgs),
}

impl Command {
    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::SirCdf(a) => a.out.out.as_ref(),
            Command::SeCdf(a) => a.out.out.as_ref(),
            Command::Coverage(a) => a.out.out.as_ref(),
            Command::MeanSe(a) => a.out.out.as_ref(),
            Command::Lognormal(a) => a.out.out.as_ref(),
            Command::TableSstar(a) => a.out.out.as_ref(),
            Command::TableMimo(a) => a.out.out.as_ref(),
            Command::Simulate(a) => a.out.out.as_ref(),
        }
    }
}

pub const SUBCOMMANDS: [&str; 8] = [
    "sir-cdf",
    "se-cdf",
    "coverage",
    "mean-se",
    "lognormal",
    "table-sstar",
    "table-mimo",
    "simulate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Four,
    Three,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimQuantity {
    Rho,
    C,
    CExact,
    CUb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Ppp,
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Third,
    Cell,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// CSV destination; a `.manifest` sidecar is written next to it (stdout if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    /// Path-loss exponent
    #[arg(long, default_value = "4")]
    pub eta: f64,

    /// Branch family of the SIR distribution below theta = 1
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Args)]
pub struct SectorArgs {
    /// Sectors per base station
    #[arg(long = "S", visible_alias = "sectors", default_value = "1")]
    pub sectors: u32,

    /// Antenna front-to-back ratio in dB
    #[arg(long = "q-db", default_value = "20")]
    pub q_db: f64,
}

#[derive(Debug, Args)]
pub struct AntennaArgs {
    #[arg(long, default_value = "1")]
    pub nt: usize,

    #[arg(long, default_value = "1")]
    pub nr: usize,
}

#[derive(Debug, Args)]
pub struct SirCdfArgs {
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub sector: SectorArgs,
    /// Linear-scale SIR grid, min:max:points[:lin|log]
    #[arg(long, default_value = "0.01:100:200:log")]
    pub grid: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SeCdfArgs {
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub sector: SectorArgs,
    #[command(flatten)]
    pub antennas: AntennaArgs,
    /// Exact Rayleigh curve or the fitted approximation (1x1 and 2x2 only)
    #[arg(long, value_enum, default_value = "exact")]
    pub curve: CurveKind,
    /// Spectral-efficiency grid in bits/s/Hz
    #[arg(long, default_value = "0:10:201:lin")]
    pub grid: String,
    /// PPP geometries for the simulated column (0 leaves it empty)
    #[arg(long, default_value = "0")]
    pub geometries: usize,
    #[arg(long, default_value = "1")]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub antennas: AntennaArgs,
    #[arg(long, default_value = "0.05:4:80:lin")]
    pub grid: String,
    /// Outage share for the printed coverage level
    #[arg(long, default_value = "0.05")]
    pub xi: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct MeanSeArgs {
    #[command(flatten)]
    pub path: PathArgs,
    /// Sweep min:max:points instead of a single --eta
    #[arg(long = "eta-range")]
    pub eta_range: Option<String>,
    #[command(flatten)]
    pub sector: SectorArgs,
    #[command(flatten)]
    pub antennas: AntennaArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub curve: CurveKind,
    /// PPP geometries for the simulated exact average (0 skips it)
    #[arg(long, default_value = "0")]
    pub geometries: usize,
    /// Cheap geometries for the analytic part of the simulated average
    #[arg(long, default_value = "100000")]
    pub control: usize,
    #[command(flatten)]
    pub sim: SimBudgetArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct LognormalArgs {
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub sector: SectorArgs,
    #[command(flatten)]
    pub antennas: AntennaArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub curve: CurveKind,
    #[arg(long, default_value = "0:10:201:lin")]
    pub grid: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct TableSstarArgs {
    /// min:max:points
    #[arg(long = "eta-range", default_value = "3:5:11")]
    pub eta_range: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct TableMimoArgs {
    #[arg(long, default_value = "4")]
    pub eta: f64,
    /// Largest antenna count on either side
    #[arg(long = "max-antennas", default_value = "4")]
    pub max_antennas: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Monte-Carlo budget shared by the simulating commands.
#[derive(Debug, Args)]
pub struct SimBudgetArgs {
    /// Base-station density per km^2
    #[arg(long, default_value = "1")]
    pub density: f64,
    #[arg(long, default_value = "1")]
    pub seed: u64,
    /// Fading draws per geometry
    #[arg(long, default_value = "2000")]
    pub fading: usize,
    /// Interference realizations in the mixture density
    #[arg(long, default_value = "512")]
    pub mixture: usize,
    #[arg(long, default_value = "32")]
    pub batches: usize,
    /// Interferers kept, strongest first
    #[arg(long, default_value = "100")]
    pub truncate: usize,
    /// Noise power relative to the transmit power
    #[arg(long, default_value = "0")]
    pub noise: f64,
    /// Abort (exit 4) when a per-geometry standard error exceeds this
    #[arg(long = "se-cap")]
    pub se_cap: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "rho")]
    pub quantity: SimQuantity,
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub sector: SectorArgs,
    #[command(flatten)]
    pub antennas: AntennaArgs,
    #[arg(long, value_enum, default_value = "ppp")]
    pub layout: LayoutArg,
    /// Users in the central third of the disk or in the central lattice cell
    #[arg(long = "user-region", value_enum, default_value = "third")]
    pub user_region: RegionArg,
    #[arg(long = "lattice-target", default_value = "977")]
    pub lattice_target: usize,
    /// Lognormal shadowing standard deviation in dB
    #[arg(long = "sigma-db", default_value = "0")]
    pub sigma_db: f64,
    #[arg(long, default_value = "500")]
    pub geometries: usize,
    #[command(flatten)]
    pub sim: SimBudgetArgs,
    /// Evaluation grid (default depends on the quantity)
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}
