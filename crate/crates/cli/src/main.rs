//! `dish`: availability analysis, bandwidth allocation, simulation and
//! figure reproduction from one command line.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const OUT_DIR_ENV: &str = "DISH_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "dish", version, about = "Cooperation availability in multi-channel MAC networks", arg_required_else_help = true)]
pub struct Cli {
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Comma-separated values with `#` header comments.
    Csv,
    /// One `key = value` line per quantity.
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic p_co at one operating point.
    Analyze(AnalyzeArgs),
    /// Optimal control/data bandwidth ratio for given data-channel counts.
    Bandwidth(BandwidthArgs),
    /// One simulation run from a scenario file.
    Simulate(SimulateArgs),
    /// Analytic and simulated p_co over a parameter grid.
    Sweep(SweepArgs),
    /// Regenerate a figure-equivalent dataset.
    Reproduce(ReproduceArgs),
    /// Neighbour-count coefficients of the random-network geometry.
    Geometry(GeometryArgs),
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    /// Fully connected network; --n is then the node count.
    #[arg(long, conflicts_with = "multi_hop")]
    pub single_hop: bool,
    /// Poisson field of nodes; --n is then nodes per R² (the default).
    #[arg(long)]
    pub multi_hop: bool,
    /// Node density: nodes per R² (multi-hop) or total node count (single-hop).
    #[arg(long, value_name = "DENSITY")]
    pub n: f64,
    /// Packet arrival rate per node, packets/s.
    #[arg(long, value_name = "PKT_PER_S")]
    pub lambda: f64,
    /// Control message size l_c, bytes.
    #[arg(long = "lc", value_name = "BYTES", default_value_t = 34.0)]
    pub control_bytes: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Data packet size L, bytes.
    #[arg(long = "L", value_name = "BYTES", default_value_t = 1000.0)]
    pub data_bytes: f64,
    /// ACK size folded into the data handshake, bytes.
    #[arg(long, value_name = "BYTES", default_value_t = 0.0)]
    pub ack: f64,
    /// Rate of every channel, bits/s.
    #[arg(long, value_name = "BITS_PER_S", default_value_t = 1e6)]
    pub rate: f64,
    /// Data-channel rate, bits/s (overrides --rate).
    #[arg(long, value_name = "BITS_PER_S")]
    pub data_rate: Option<f64>,
    /// Control-channel rate, bits/s (overrides --rate).
    #[arg(long, value_name = "BITS_PER_S")]
    pub control_rate: Option<f64>,
    /// Fixed-point residual tolerance (dimensionless).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Fixed-point iteration cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Weight of the new iterate in the damped update, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
}

#[derive(Debug, Args)]
pub struct BandwidthArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Total bandwidth W shared by all channels, bits/s.
    #[arg(long = "W", value_name = "BITS_PER_S")]
    pub total_bw: f64,
    /// Data-channel counts, comma separated.
    #[arg(long, value_name = "COUNTS", value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
    /// Data packet size L, bytes.
    #[arg(long = "L", value_name = "BYTES", default_value_t = 2000.0)]
    pub data_bytes: f64,
    /// σ grid as min:max:step (dimensionless control/data bandwidth ratio).
    #[arg(long, value_name = "MIN:MAX:STEP", default_value = "0.2:3.0:0.05")]
    pub sweep: String,
    /// Emit the full (σ, p_co) curves instead of the optima.
    #[arg(long)]
    pub curves: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML: [topology], [traffic], [channels], mode, seed, [stop]).
    #[arg(value_name = "SCENARIO")]
    pub scenario: Option<PathBuf>,
    /// Root seed (64-bit); overrides the scenario's.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop after this many data packets are sent network-wide.
    #[arg(long, value_name = "COUNT")]
    pub packets: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Cooperation mode: non-cooperative, ideal-dish or real-dish.
    #[arg(long)]
    pub mode: Option<String>,
    /// Write the event trace (time s, node, event, channel) as CSV to this file.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Swept parameter: lambda (packets/s), n (density) or L (bytes).
    #[arg(long)]
    pub param: String,
    /// Grid values, comma separated or min:max:step, in the parameter's units.
    #[arg(long)]
    pub grid: String,
    /// Cooperation modes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "non-cooperative")]
    pub modes: Vec<String>,
    /// Topologies per grid point.
    #[arg(long, default_value_t = 5)]
    pub replications: usize,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Figure id (fig5a … fig10b) or `all`.
    pub figure: String,
    /// desk: 20,000 packets and 5 topologies; paper: 100,000 packets and 15 topologies.
    #[arg(long, default_value = "desk")]
    pub scale: String,
    /// Directory for <figure>.csv and <figure>.summary.json.
    #[arg(long, value_name = "DIR", env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Root seed (64-bit).
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Data packet sizes, bytes, comma separated (default: the figure's own).
    #[arg(long, value_name = "BYTES", value_delimiter = ',')]
    pub sizes: Option<Vec<f64>>,
    /// Override packets per run.
    #[arg(long, value_name = "COUNT")]
    pub packets: Option<u64>,
    /// Override topologies per grid point.
    #[arg(long, value_name = "COUNT")]
    pub replications: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// Absolute quadrature tolerance (dimensionless area fraction).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_status())
        }
    }
}

