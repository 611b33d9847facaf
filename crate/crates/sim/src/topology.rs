use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::{TopologyKind, TopologySpec};
use crate::error::{Result, SimError};

pub type NodeId = usize;

pub const MAX_CONNECT_ATTEMPTS: usize = 100;

/// Node placement plus the unit-disk neighbor relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<[f64; 2]>,
    range: f64,
    kind: TopologyKind,
    neighbors: Vec<Vec<NodeId>>,
    adjacency: Vec<Vec<u64>>,
}

impl Topology {
    /// Fully connected network of `n` nodes placed on a circle well inside one range.
    pub fn single_hop(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(SimError::Config(format!("a single-hop network needs at least 2 nodes, got {n}")));
        }
        let range = 250.0;
        let positions = (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                [0.25 * range * a.cos(), 0.25 * range * a.sin()]
            })
            .collect();
        let mut t = Self::from_positions(positions, range);
        t.kind = TopologyKind::SingleHop;
        Ok(t)
    }

    /// Multi-hop topology from explicit positions; neighbors are nodes within `range`.
    pub fn from_positions(positions: Vec<[f64; 2]>, range: f64) -> Self {
        let n = positions.len();
        let words = n.div_ceil(64);
        let mut neighbors = vec![Vec::new(); n];
        let mut adjacency = vec![vec![0u64; words]; n];
        let r2 = range * range;
        for i in 0..n {
            for j in i + 1..n {
                let dx = positions[i][0] - positions[j][0];
                let dy = positions[i][1] - positions[j][1];
                if dx * dx + dy * dy <= r2 {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                    adjacency[i][j / 64] |= 1 << (j % 64);
                    adjacency[j][i / 64] |= 1 << (i % 64);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Self { positions, range, kind: TopologyKind::MultiHop, neighbors, adjacency }
    }

    pub fn from_spec(spec: &TopologySpec, seed: u64) -> Result<Self> {
        match spec.kind {
            TopologyKind::SingleHop => Self::single_hop(spec.nodes),
            TopologyKind::MultiHop => generate_topology(spec.area_m, spec.density, spec.range_m, seed),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[v]
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a][b / 64] >> (b % 64) & 1 == 1
    }

    pub fn mean_degree(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.neighbors.iter().map(Vec::len).sum::<usize>() as f64 / self.len() as f64
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }
}

/// Poisson deployment on a square of side `area_m` with mean `density`
/// nodes per R², redrawn until the unit-disk graph is connected.
pub fn generate_topology(area_m: f64, density: f64, range: f64, seed: u64) -> Result<Topology> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(SimError::Config(format!("density must be positive, got {density}")));
    }
    if !(area_m > 0.0 && range > 0.0) {
        return Err(SimError::Config("area side and range must be positive".into()));
    }
    let mean = density * area_m * area_m / (range * range);
    let count = Poisson::new(mean).map_err(|e| SimError::Config(format!("node count distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_CONNECT_ATTEMPTS {
        let n = count.sample(&mut rng) as usize;
        let positions = (0..n)
            .map(|_| [rng.random::<f64>() * area_m, rng.random::<f64>() * area_m])
            .collect();
        let t = Topology::from_positions(positions, range);
        if n >= 2 && t.is_connected() {
            return Ok(t);
        }
    }
    Err(SimError::Disconnected { density, attempts: MAX_CONNECT_ATTEMPTS })
}
