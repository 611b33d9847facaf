use dish_core::bandwidth::{is_unimodal, UNIMODAL_NOISE};
use dish_core::{
    optimize_sigma, sigma_star_table, BandwidthProblem, HopMode, ModelParams, NeighborConstants, SigmaSweep,
};
use dish_sim::{CoopMode, SimConfig, SimMetrics, TopologyKind, TopologySpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Check, FigureDataset};
use crate::error::{ExperimentError, Result};
use crate::stats::{max_relative_deviation, mean_sd, paired_linearity};
use crate::sweep::{analytic_column, analytic_point, run_sweep, Param, Sweep, SweepRuns};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FigureId {
    Fig5a,
    Fig5b,
    Fig5c,
    Fig5d,
    Fig6a,
    Fig6b,
    Fig6c,
    Fig7,
    Fig8,
    Fig9a,
    Fig9b,
    Fig10a,
    Fig10b,
}

impl FigureId {
    pub const ALL: [FigureId; 13] = [
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig5c,
        FigureId::Fig5d,
        FigureId::Fig6a,
        FigureId::Fig6b,
        FigureId::Fig6c,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9a,
        FigureId::Fig9b,
        FigureId::Fig10a,
        FigureId::Fig10b,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig5c => "fig5c",
            FigureId::Fig5d => "fig5d",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
            FigureId::Fig6c => "fig6c",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9a => "fig9a",
            FigureId::Fig9b => "fig9b",
            FigureId::Fig10a => "fig10a",
            FigureId::Fig10b => "fig10b",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            FigureId::Fig5a => "p_co vs packet rate, single-hop, n = 8, with ideal-DISH collision/delay ratios",
            FigureId::Fig5b => "non-cooperative p_co vs node count, single-hop, lambda = 10",
            FigureId::Fig5c => "non-cooperative p_co vs packet rate, multi-hop, n = 10",
            FigureId::Fig5d => "non-cooperative p_co vs density, multi-hop, lambda = 4",
            FigureId::Fig6a => "ideal DISH: p_co and collision/delay ratios vs packet rate, multi-hop, n = 10",
            FigureId::Fig6b => "ideal DISH: p_co and collision/delay ratios vs density, multi-hop, lambda = 4",
            FigureId::Fig6c => "ideal DISH, saturated (lambda = 30): p_co and throughput ratio vs density, multi-hop",
            FigureId::Fig7 => "analytic single-hop p_co over (lambda, n)",
            FigureId::Fig8 => "analytic p_co vs bandwidth ratio sigma per data-channel count",
            FigureId::Fig9a => "real DISH: p_co vs packet rate, multi-hop, n = 10",
            FigureId::Fig9b => "real DISH: p_co vs density, multi-hop, lambda = 4",
            FigureId::Fig10a => "optimal sigma vs data-channel count per density, lambda = 10",
            FigureId::Fig10b => "optimal sigma vs data-channel count per packet rate, n = 6",
        }
    }

    pub fn uses_simulation(self) -> bool {
        !matches!(self, FigureId::Fig7 | FigureId::Fig8 | FigureId::Fig10a | FigureId::Fig10b)
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for FigureId {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|f| f.label() == key)
            .ok_or_else(|| ExperimentError::UnknownFigure(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// 20,000 packets per run, 5 topologies.
    Desk,
    /// 100,000 packets per run, 15 topologies.
    Paper,
}

impl Scale {
    pub fn label(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        }
    }

    pub fn packets(self) -> u64 {
        match self {
            Scale::Desk => 20_000,
            Scale::Paper => 100_000,
        }
    }

    pub fn replications(self) -> usize {
        match self {
            Scale::Desk => 5,
            Scale::Paper => 15,
        }
    }

    /// Deviation bounds (single-hop, multi-hop, real DISH); shorter runs get wider bounds.
    pub fn deviation_bounds(self) -> DeviationBounds {
        match self {
            Scale::Desk => DEFAULT_BOUNDS,
            Scale::Paper => DeviationBounds { single_hop: 0.05, multi_hop: 0.10, real_dish: 0.15 },
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(format!("unknown scale '{other}' (expected desk or paper)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationBounds {
    pub single_hop: f64,
    pub multi_hop: f64,
    pub real_dish: f64,
}

/// Minimum R² accepted for the ratio-vs-p_co fits.
pub const LINEARITY_R2: f64 = 0.9;

/// Optimal σ per data-channel count used as the reference for the σ curves.
pub const REFERENCE_SIGMA_STAR: [(usize, f64); 6] = [(1, 0.55), (3, 0.95), (5, 1.15), (7, 1.35), (9, 1.45), (11, 1.5)];
pub const SIGMA_STAR_TOLERANCE: f64 = 0.05;

/// Single-hop `(λ, n, p_co)` reference points of the doubling experiment.
pub const DOUBLING_ANCHORS: [(f64, f64, f64); 4] =
    [(5.0, 5.0, 0.865), (10.0, 10.0, 0.999), (10.0, 5.0, 0.724), (20.0, 10.0, 0.943)];
pub const ANCHOR_TOLERANCE: f64 = 0.01;

pub const SATURATED_PACKET_RATE: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceOptions {
    pub scale: Scale,
    pub root_seed: u64,
    /// Data packet sizes in bytes; defaults to the figure's own set.
    pub packet_sizes: Option<Vec<f64>>,
    /// Overrides the scale's packet count per run.
    pub packets: Option<u64>,
    /// Overrides the scale's topology count.
    pub replications: Option<usize>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self { scale: Scale::Desk, root_seed: 1, packet_sizes: None, packets: None, replications: None }
    }
}

impl ReproduceOptions {
    fn packets(&self) -> u64 {
        self.packets.unwrap_or(self.scale.packets())
    }

    fn replications(&self) -> usize {
        self.replications.unwrap_or(self.scale.replications())
    }

    fn sizes(&self, default: &[f64]) -> Result<Vec<f64>> {
        let sizes = self.packet_sizes.clone().unwrap_or_else(|| default.to_vec());
        if sizes.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        if sizes.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(ExperimentError::Sweep("packet sizes must be positive".into()));
        }
        Ok(sizes)
    }
}

fn lambda_grid_single_hop() -> Vec<f64> {
    vec![6.0, 8.0, 10.0, 12.0, 14.0]
}

/// The non-cooperative multi-hop network saturates above about 5 pkt/s at
/// n = 10, so the multi-hop grids stay in the stable region.
fn lambda_grid_multi_hop() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 5.0]
}

fn density_grid() -> Vec<f64> {
    vec![6.0, 8.0, 10.0, 12.0, 14.0]
}

/// Packet rate of the multi-hop density sweeps; stable over the whole density grid.
pub const MULTI_HOP_DENSITY_SWEEP_RATE: f64 = 4.0;

const BOTH_SIZES: &[f64] = &[1000.0, 2000.0];
const SMALL_SIZE: &[f64] = &[1000.0];

fn spec_of(figure: FigureId) -> Option<SimFigure> {
    use TopologyKind::{MultiHop, SingleHop};
    let (kind, coop, varying, grid, density, packet_rate, default_sizes, saturated) = match figure {
        FigureId::Fig5a => (SingleHop, Some(CoopMode::IdealDish), Param::PacketRate, lambda_grid_single_hop(), 8.0, 10.0, BOTH_SIZES, false),
        FigureId::Fig5b => (SingleHop, None, Param::Density, density_grid(), 8.0, 10.0, BOTH_SIZES, false),
        FigureId::Fig5c => (MultiHop, None, Param::PacketRate, lambda_grid_multi_hop(), 10.0, 10.0, BOTH_SIZES, false),
        FigureId::Fig5d => (MultiHop, None, Param::Density, density_grid(), 10.0, MULTI_HOP_DENSITY_SWEEP_RATE, BOTH_SIZES, false),
        FigureId::Fig6a => (MultiHop, Some(CoopMode::IdealDish), Param::PacketRate, lambda_grid_multi_hop(), 10.0, 10.0, SMALL_SIZE, false),
        FigureId::Fig6b => (MultiHop, Some(CoopMode::IdealDish), Param::Density, density_grid(), 10.0, MULTI_HOP_DENSITY_SWEEP_RATE, SMALL_SIZE, false),
        FigureId::Fig6c => (MultiHop, Some(CoopMode::IdealDish), Param::Density, density_grid(), 10.0, SATURATED_PACKET_RATE, SMALL_SIZE, true),
        FigureId::Fig9a => (MultiHop, Some(CoopMode::RealDish), Param::PacketRate, lambda_grid_multi_hop(), 10.0, 10.0, SMALL_SIZE, false),
        FigureId::Fig9b => (MultiHop, Some(CoopMode::RealDish), Param::Density, density_grid(), 10.0, MULTI_HOP_DENSITY_SWEEP_RATE, SMALL_SIZE, false),
        _ => return None,
    };
    Some(SimFigure { kind, coop, varying, grid, density, packet_rate, default_sizes, saturated })
}

/// Dataset for `figure`; identical inputs give bit-identical output.
pub fn reproduce(figure: FigureId, opts: &ReproduceOptions) -> Result<FigureDataset> {
    let geom = NeighborConstants::standard();
    let mut ds = match figure {
        FigureId::Fig7 => doubling_surface(opts, &geom)?,
        FigureId::Fig8 => sigma_curves(opts, &geom)?,
        FigureId::Fig10a => sigma_star_figure(figure, opts, &geom, &[(4.0, 10.0), (6.0, 10.0), (8.0, 10.0), (10.0, 10.0)])?,
        FigureId::Fig10b => sigma_star_figure(figure, opts, &geom, &[(6.0, 5.0), (6.0, 10.0), (6.0, 15.0), (6.0, 20.0)])?,
        _ => sim_figure(figure, opts, spec_of(figure).expect("simulation figure"))?,
    };
    ds.meta.insert(0, ("scale".into(), opts.scale.label().into()));
    Ok(ds)
}

fn base_sweep(
    opts: &ReproduceOptions,
    kind: TopologyKind,
    varying: Param,
    grid: Vec<f64>,
    density: f64,
    packet_rate: f64,
    data_bytes: f64,
) -> Sweep {
    let topology = TopologySpec { kind, nodes: density as usize, density, ..TopologySpec::default() };
    let config = SimConfig { packet_rate, data_bytes, stop_after_packets: opts.packets(), ..SimConfig::default() };
    Sweep { varying, grid, topology, config, replications: opts.replications(), root_seed: opts.root_seed }
}

fn describe_sweep(ds: &mut FigureDataset, sweep: &Sweep, runs: Option<&SweepRuns>) {
    ds.push_meta("varying", sweep.varying.label());
    ds.push_meta("packets_per_run", sweep.config.stop_after_packets);
    ds.push_meta("replications", sweep.replications);
    ds.push_meta("root_seed", sweep.root_seed);
    if let Some(r) = runs {
        ds.push_meta("seeds", r.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
    }
    ds.push_meta("topology", serde_json::to_string(&sweep.topology).expect("plain data"));
    ds.push_meta("config", serde_json::to_string(&sweep.config).expect("plain data"));
}

fn stat_column(
    runs: &SweepRuns,
    mode: CoopMode,
    f: impl Fn(&SimMetrics) -> Option<f64> + Copy,
) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    (0..runs.grid.len()).map(|k| mean_sd(runs.values(k, mode, f))).unzip()
}

fn saturated_column(runs: &SweepRuns, mode: CoopMode) -> Vec<Option<f64>> {
    stat_column(runs, mode, |m| Some(if m.saturated { 1.0 } else { 0.0 })).0
}

fn ratio_column(num: &[Option<f64>], den: &[Option<f64>]) -> Vec<Option<f64>> {
    num.iter()
        .zip(den)
        .map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) if *b != 0.0 => Some(a / b),
            _ => None,
        })
        .collect()
}

struct SimFigure {
    kind: TopologyKind,
    coop: Option<CoopMode>,
    varying: Param,
    grid: Vec<f64>,
    density: f64,
    packet_rate: f64,
    default_sizes: &'static [f64],
    /// Throughput under a standing backlog instead of stable-network ratios.
    saturated: bool,
}

fn mode_tag(mode: CoopMode) -> &'static str {
    match mode {
        CoopMode::NonCooperative => "noncoop",
        CoopMode::IdealDish => "ideal",
        CoopMode::RealDish => "real",
    }
}

fn sim_figure(figure: FigureId, opts: &ReproduceOptions, spec: SimFigure) -> Result<FigureDataset> {
    let geom = NeighborConstants::standard();
    let bounds = opts.scale.deviation_bounds();
    let hop_bound = match spec.kind {
        TopologyKind::SingleHop => bounds.single_hop,
        TopologyKind::MultiHop => bounds.multi_hop,
    };
    let base = CoopMode::NonCooperative;
    let modes: Vec<CoopMode> = std::iter::once(base).chain(spec.coop).collect();
    let mut ds = FigureDataset::new(figure.label(), figure.title(), spec.varying.label(), spec.grid.clone());
    for (i, l) in opts.sizes(spec.default_sizes)?.into_iter().enumerate() {
        let mut sweep =
            base_sweep(opts, spec.kind, spec.varying, spec.grid.clone(), spec.density, spec.packet_rate, l);
        if spec.saturated {
            // Throughput is measured under a standing backlog, so never abort.
            sweep.config.max_backlog_per_node = 1e12;
        }
        let analytic = analytic_column(&sweep, &geom)?;
        let runs = run_sweep(&sweep, &modes)?;
        if i == 0 {
            describe_sweep(&mut ds, &sweep, Some(&runs));
        }
        let (p_base, p_base_sd) = stat_column(&runs, base, |m| m.p_co_hat);
        if !spec.saturated {
            ds.checks.push(Check::at_most(
                format!("deviation_noncoop_L{l}"),
                max_relative_deviation(&analytic, &p_base),
                hop_bound,
            ));
        }
        ds.push_column(format!("analytic_L{l}"), analytic.clone())?;
        ds.push_column(format!("p_hat_noncoop_L{l}"), p_base)?;
        ds.push_column(format!("p_hat_noncoop_sd_L{l}"), p_base_sd)?;
        ds.push_column(format!("saturated_noncoop_L{l}"), saturated_column(&runs, base))?;
        let Some(mode) = spec.coop else { continue };
        let tag = mode_tag(mode);

        let (p_coop, p_coop_sd) = stat_column(&runs, mode, |m| m.p_co_hat);
        let (xi_base, _) = stat_column(&runs, base, |m| m.xi);
        let (xi_coop, _) = stat_column(&runs, mode, |m| m.xi);
        let (d_base, _) = stat_column(&runs, base, |m| m.mean_delay);
        let (d_coop, _) = stat_column(&runs, mode, |m| m.mean_delay);
        let (s_base, _) = stat_column(&runs, base, |m| Some(m.throughput));
        let (s_coop, _) = stat_column(&runs, mode, |m| Some(m.throughput));
        let eta_xi = ratio_column(&xi_coop, &xi_base);
        let eta_delta = ratio_column(&d_coop, &d_base);
        let eta_s = ratio_column(&s_base, &s_coop);

        let r2 = |eta: &[Option<f64>]| paired_linearity(&p_coop, eta).ok().and_then(|f| f.r_squared);
        if spec.saturated {
            ds.checks.push(Check::at_least(format!("r2_eta_s_L{l}"), r2(&eta_s), LINEARITY_R2));
        } else {
            let coop_bound = if mode == CoopMode::RealDish { bounds.real_dish } else { hop_bound };
            ds.checks.push(Check::at_most(
                format!("deviation_{tag}_L{l}"),
                max_relative_deviation(&analytic, &p_coop),
                coop_bound,
            ));
            ds.checks.push(Check::at_least(format!("r2_eta_xi_L{l}"), r2(&eta_xi), LINEARITY_R2));
            ds.checks.push(Check::at_least(format!("r2_eta_delta_L{l}"), r2(&eta_delta), LINEARITY_R2));
        }

        ds.push_column(format!("p_hat_{tag}_L{l}"), p_coop)?;
        ds.push_column(format!("p_hat_{tag}_sd_L{l}"), p_coop_sd)?;
        ds.push_column(format!("saturated_{tag}_L{l}"), saturated_column(&runs, mode))?;
        ds.push_column(format!("xi_noncoop_L{l}"), xi_base)?;
        ds.push_column(format!("xi_{tag}_L{l}"), xi_coop)?;
        ds.push_column(format!("delay_noncoop_L{l}"), d_base)?;
        ds.push_column(format!("delay_{tag}_L{l}"), d_coop)?;
        ds.push_column(format!("throughput_noncoop_L{l}"), s_base)?;
        ds.push_column(format!("throughput_{tag}_L{l}"), s_coop)?;
        ds.push_column(format!("eta_xi_L{l}"), eta_xi)?;
        ds.push_column(format!("eta_delta_L{l}"), eta_delta)?;
        ds.push_column(format!("eta_s_L{l}"), eta_s)?;
    }
    Ok(ds)
}

fn doubling_surface(opts: &ReproduceOptions, geom: &NeighborConstants) -> Result<FigureDataset> {
    let l = opts.sizes(&[1000.0])?[0];
    let lambdas = [5.0, 10.0, 15.0, 20.0];
    let grid: Vec<f64> = (5..=20).map(f64::from).collect();
    let cfg = SimConfig { data_bytes: l, ..SimConfig::default() };
    let at = |n: f64, lambda: f64| {
        let params = ModelParams::new(HopMode::SingleHop, n, lambda, cfg.data_time(), cfg.control_time());
        analytic_point(&params, geom)
    };
    let figure = FigureId::Fig7;
    let mut ds = FigureDataset::new(figure.label(), figure.title(), "n", grid.clone());
    ds.push_meta("data_bytes", l);
    ds.push_meta("config", serde_json::to_string(&cfg).expect("plain data"));
    for lambda in lambdas {
        let col = grid.iter().map(|&n| at(n, lambda)).collect::<Result<Vec<_>>>()?;
        ds.push_column(format!("p_co_lambda{lambda}"), col)?;
    }
    for (lambda, n, expected) in DOUBLING_ANCHORS {
        let gap = at(n, lambda)?.map(|p| (p - expected).abs());
        ds.checks.push(Check::at_most(format!("anchor_gap_lambda{lambda}_n{n}"), gap, ANCHOR_TOLERANCE));
    }
    for (from, to) in [((5.0, 5.0), (10.0, 10.0)), ((10.0, 5.0), (20.0, 10.0))] {
        let grows = matches!((at(from.1, from.0)?, at(to.1, to.0)?), (Some(a), Some(b)) if b > a);
        ds.checks.push(Check::holds(
            format!("doubling_increases_lambda{}_n{}", from.0, from.1),
            grows,
        ));
    }
    Ok(ds)
}

fn bandwidth_base(opts: &ReproduceOptions, default_l: f64, n: f64, lambda: f64) -> Result<BandwidthProblem> {
    Ok(BandwidthProblem {
        total_bw: 40e6,
        data_bytes: opts.sizes(&[default_l])?[0],
        control_bytes: 34.0,
        node_density: n,
        packet_rate: lambda,
        hop_mode: HopMode::MultiHop,
    })
}

fn sigma_curves(opts: &ReproduceOptions, geom: &NeighborConstants) -> Result<FigureDataset> {
    let problem = bandwidth_base(opts, 2000.0, 6.0, 20.0)?;
    let sweep = SigmaSweep::default();
    let grid = sweep.grid()?;
    let figure = FigureId::Fig8;
    let mut ds = FigureDataset::new(figure.label(), figure.title(), "sigma", grid.clone());
    ds.push_meta("problem", serde_json::to_string(&problem).expect("plain data"));
    ds.push_meta("sigma_sweep", format!("{}:{}:{}", sweep.min, sweep.max, sweep.step));
    let results = REFERENCE_SIGMA_STAR
        .par_iter()
        .map(|&(m, _)| {
            let col = grid.iter().map(|&s| problem.evaluate(m, s, geom)).collect::<dish_core::error::Result<Vec<_>>>()?;
            let opt = optimize_sigma(&problem, m, &sweep, geom)?;
            Ok((col, opt))
        })
        .collect::<Result<Vec<_>>>()?;
    for (&(m, reference), (col, opt)) in REFERENCE_SIGMA_STAR.iter().zip(results) {
        let values: Vec<f64> = col.iter().flatten().copied().collect();
        ds.checks.push(Check::holds(format!("unimodal_m{m}"), is_unimodal(&values, UNIMODAL_NOISE)));
        ds.checks.push(Check::at_most(
            format!("sigma_star_gap_m{m}"),
            Some((opt.sigma_star - reference).abs()),
            SIGMA_STAR_TOLERANCE,
        ));
        ds.push_meta(format!("sigma_star_m{m}"), format!("{:.4}", opt.sigma_star));
        ds.push_column(format!("p_co_m{m}"), col)?;
    }
    Ok(ds)
}

fn sigma_star_figure(
    figure: FigureId,
    opts: &ReproduceOptions,
    geom: &NeighborConstants,
    scenarios: &[(f64, f64)],
) -> Result<FigureDataset> {
    let base = bandwidth_base(opts, 1000.0, scenarios[0].0, scenarios[0].1)?;
    let sweep = SigmaSweep { min: 0.2, max: 6.0, step: 0.05 };
    let ms: Vec<usize> = (1..=25).collect();
    let table = sigma_star_table(&base, &ms, scenarios, &sweep, geom)?;
    let grid: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let mut ds = FigureDataset::new(figure.label(), figure.title(), "m", grid);
    ds.push_meta("problem", serde_json::to_string(&base).expect("plain data"));
    ds.push_meta("sigma_sweep", format!("{}:{}:{}", sweep.min, sweep.max, sweep.step));
    for (j, (n, lambda)) in scenarios.iter().enumerate() {
        let col = table.column(j);
        ds.checks.push(Check::holds(format!("stable_n{n}_lambda{lambda}"), col.iter().all(Option::is_some)));
        ds.push_column(format!("sigma_star_n{n}_lambda{lambda}"), col)?;
    }
    Ok(ds)
}

/// Generic sweep table: analytic `p_co` plus per-mode estimates and metrics.
pub fn sweep_dataset(sweep: &Sweep, modes: &[CoopMode]) -> Result<FigureDataset> {
    let geom = NeighborConstants::standard();
    let analytic = analytic_column(sweep, &geom)?;
    let runs = run_sweep(sweep, modes)?;
    let mut ds = FigureDataset::new("sweep", format!("sweep over {}", sweep.varying.label()), sweep.varying.label(), sweep.grid.clone());
    describe_sweep(&mut ds, sweep, Some(&runs));
    ds.push_column("analytic", analytic.clone())?;
    for &mode in modes {
        let tag = mode_tag(mode);
        let (p, sd) = stat_column(&runs, mode, |m| m.p_co_hat);
        ds.checks.push(Check::at_most(
            format!("deviation_{tag}"),
            max_relative_deviation(&analytic, &p),
            match (mode, sweep.topology.kind) {
                (CoopMode::RealDish, _) => DEFAULT_BOUNDS.real_dish,
                (_, TopologyKind::SingleHop) => DEFAULT_BOUNDS.single_hop,
                (_, TopologyKind::MultiHop) => DEFAULT_BOUNDS.multi_hop,
            },
        ));
        ds.push_column(format!("p_hat_{tag}"), p)?;
        ds.push_column(format!("p_hat_sd_{tag}"), sd)?;
        ds.push_column(format!("xi_{tag}"), stat_column(&runs, mode, |m| m.xi).0)?;
        ds.push_column(format!("delay_{tag}"), stat_column(&runs, mode, |m| m.mean_delay).0)?;
        ds.push_column(format!("throughput_{tag}"), stat_column(&runs, mode, |m| Some(m.throughput)).0)?;
        ds.push_column(format!("saturated_{tag}"), saturated_column(&runs, mode))?;
    }
    Ok(ds)
}

const DEFAULT_BOUNDS: DeviationBounds = DeviationBounds { single_hop: 0.08, multi_hop: 0.12, real_dish: 0.18 };
