use dish_core::{p_co, HopMode, ModelError, ModelParams, NeighborConstants, SolverOptions};
use dish_sim::{run, split_seed, topology_seed, CoopMode, SimConfig, SimMetrics, Topology, TopologyKind, TopologySpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Param {
    /// Packets per second per node.
    PacketRate,
    /// Node count (single-hop) or nodes per R² (multi-hop).
    Density,
    /// Data packet size in bytes.
    PacketSize,
}

impl Param {
    pub fn label(self) -> &'static str {
        match self {
            Param::PacketRate => "lambda",
            Param::Density => "n",
            Param::PacketSize => "L",
        }
    }
}

impl std::str::FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lambda" | "packet-rate" => Ok(Param::PacketRate),
            "n" | "density" | "nodes" => Ok(Param::Density),
            "L" | "l" | "packet-size" | "data-bytes" => Ok(Param::PacketSize),
            other => Err(format!("unknown sweep parameter '{other}' (expected lambda, n or L)")),
        }
    }
}

/// One parameter varied over a grid, everything else fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub varying: Param,
    pub grid: Vec<f64>,
    pub topology: TopologySpec,
    pub config: SimConfig,
    pub replications: usize,
    pub root_seed: u64,
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(ExperimentError::Sweep("grid values must be finite".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::Sweep("grid must be strictly increasing".into()));
        }
        if self.replications == 0 {
            return Err(ExperimentError::Sweep("at least one replication is required".into()));
        }
        if self.varying == Param::Density
            && self.topology.kind == TopologyKind::SingleHop
            && self.grid.iter().any(|v| v.fract() != 0.0 || *v < 2.0)
        {
            return Err(ExperimentError::Sweep("single-hop node counts must be integers of at least 2".into()));
        }
        Ok(())
    }

    /// Per-replication seeds; replication `r` uses the same topology at every grid point.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replications as u64).map(|r| split_seed(self.root_seed, r)).collect()
    }

    pub fn point(&self, k: usize) -> (TopologySpec, SimConfig) {
        let mut topo = self.topology.clone();
        let mut cfg = self.config.clone();
        let v = self.grid[k];
        match self.varying {
            Param::PacketRate => cfg.packet_rate = v,
            Param::PacketSize => cfg.data_bytes = v,
            Param::Density => match topo.kind {
                TopologyKind::SingleHop => topo.nodes = v as usize,
                TopologyKind::MultiHop => topo.density = v,
            },
        }
        (topo, cfg)
    }

    pub fn model_params(&self, k: usize) -> ModelParams {
        let (topo, cfg) = self.point(k);
        let (hop, density) = match topo.kind {
            TopologyKind::SingleHop => (HopMode::SingleHop, topo.nodes as f64),
            TopologyKind::MultiHop => (HopMode::MultiHop, topo.density),
        };
        ModelParams::new(hop, density, cfg.packet_rate, cfg.data_time(), cfg.control_time())
    }
}

/// Analytic `p_co` per grid point; `None` where the analysis has no stable solution.
pub fn analytic_column(sweep: &Sweep, geom: &NeighborConstants) -> Result<Vec<Option<f64>>> {
    sweep.validate()?;
    (0..sweep.grid.len())
        .map(|k| analytic_point(&sweep.model_params(k), geom))
        .collect()
}

pub fn analytic_point(params: &ModelParams, geom: &NeighborConstants) -> Result<Option<f64>> {
    match p_co(params, geom, &SolverOptions::default()) {
        Ok(r) => Ok(Some(r.p_co)),
        Err(ModelError::Unstable { .. } | ModelError::NoConvergence { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Metrics indexed `[grid point][mode][replication]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRuns {
    pub grid: Vec<f64>,
    pub modes: Vec<CoopMode>,
    pub seeds: Vec<u64>,
    pub runs: Vec<Vec<Vec<SimMetrics>>>,
}

impl SweepRuns {
    pub fn mode_index(&self, mode: CoopMode) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }

    /// `f` applied to every replication of `mode` at grid point `k`.
    pub fn values<'a>(
        &'a self,
        k: usize,
        mode: CoopMode,
        f: impl Fn(&SimMetrics) -> Option<f64> + 'a,
    ) -> impl Iterator<Item = Option<f64>> + 'a {
        let m = self.mode_index(mode).expect("mode was simulated");
        self.runs[k][m].iter().map(f)
    }
}

/// Runs every (grid point, replication) pair under each mode. All modes see
/// the same topology and random stream, so their ratios are paired.
pub fn run_sweep(sweep: &Sweep, modes: &[CoopMode]) -> Result<SweepRuns> {
    sweep.validate()?;
    if modes.is_empty() {
        return Err(ExperimentError::Sweep("no protocol mode selected".into()));
    }
    let seeds = sweep.seeds();
    let jobs: Vec<(usize, usize)> = (0..sweep.grid.len())
        .flat_map(|k| (0..seeds.len()).map(move |r| (k, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(k, r)| {
            let (spec, cfg) = sweep.point(k);
            let topology = Topology::from_spec(&spec, topology_seed(seeds[r]))?;
            modes
                .iter()
                .map(|&mode| {
                    let config = SimConfig { mode, seed: split_seed(seeds[r], 1 + k as u64), trace: false, ..cfg.clone() };
                    Ok(run(&topology, &config)?.metrics)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut runs = vec![vec![Vec::with_capacity(seeds.len()); modes.len()]; sweep.grid.len()];
    for ((k, _), per_mode) in jobs.iter().zip(results) {
        for (m, metrics) in per_mode.into_iter().enumerate() {
            runs[*k][m].push(metrics);
        }
    }
    Ok(SweepRuns { grid: sweep.grid.clone(), modes: modes.to_vec(), seeds, runs })
}
