use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoopMode {
    /// Cooperation is counted but never acted on.
    NonCooperative,
    /// The problem-creating node on the control channel is told for free.
    IdealDish,
    /// PRA/PRB/CFA/CFB handshake; cooperators send INV messages.
    RealDish,
}

impl CoopMode {
    pub fn label(self) -> &'static str {
        match self {
            CoopMode::NonCooperative => "non-cooperative",
            CoopMode::IdealDish => "ideal-dish",
            CoopMode::RealDish => "real-dish",
        }
    }
}

impl std::str::FromStr for CoopMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "non-cooperative" | "noncoop" | "none" => Ok(CoopMode::NonCooperative),
            "ideal-dish" | "ideal" => Ok(CoopMode::IdealDish),
            "real-dish" | "real" => Ok(CoopMode::RealDish),
            other => Err(format!(
                "unknown mode '{other}' (expected non-cooperative, ideal-dish or real-dish)"
            )),
        }
    }
}

/// Protocol and traffic parameters of one run. Sizes in bytes, rates in
/// bits/s, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Fresh packet arrivals per node per second.
    pub packet_rate: f64,
    pub data_bytes: f64,
    pub control_bytes: f64,
    /// Airtime of the ACK; zero folds it into the data transfer.
    pub ack_bytes: f64,
    pub data_rate: f64,
    pub control_rate: f64,
    pub data_channels: usize,
    pub mode: CoopMode,
    /// Run ends once this many data packets have been sent network-wide.
    pub stop_after_packets: u64,
    pub max_sim_time: f64,
    pub seed: u64,
    /// Contention timer is uniform on (0, factor·b).
    pub contention_factor: f64,
    /// Backoff after a failed handshake is exponential with mean factor·b.
    pub backoff_factor: f64,
    /// Deaf-terminal backoff under cooperation: exponential, mean fraction·T_d.
    pub deaf_backoff_fraction: f64,
    /// Leading share of sent packets excluded from delay, collision and throughput.
    pub warmup_fraction: f64,
    /// Run is aborted once the average backlog exceeds this many packets per node.
    pub max_backlog_per_node: f64,
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            packet_rate: 10.0,
            data_bytes: 1000.0,
            control_bytes: 34.0,
            ack_bytes: 0.0,
            data_rate: 1e6,
            control_rate: 1e6,
            data_channels: 5,
            mode: CoopMode::NonCooperative,
            stop_after_packets: 20_000,
            max_sim_time: 1e5,
            seed: 1,
            contention_factor: 10.0,
            backoff_factor: 10.0,
            deaf_backoff_fraction: 0.5,
            warmup_fraction: 0.05,
            max_backlog_per_node: 200.0,
            trace: false,
        }
    }
}

impl SimConfig {
    /// Control-message airtime b.
    pub fn control_time(&self) -> f64 {
        8.0 * self.control_bytes / self.control_rate
    }

    /// Data-channel sojourn T_d (DATA plus ACK).
    pub fn data_time(&self) -> f64 {
        8.0 * (self.data_bytes + self.ack_bytes) / self.data_rate
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("data_bytes", self.data_bytes),
            ("control_bytes", self.control_bytes),
            ("data_rate", self.data_rate),
            ("control_rate", self.control_rate),
            ("max_sim_time", self.max_sim_time),
            ("contention_factor", self.contention_factor),
            ("backoff_factor", self.backoff_factor),
            ("deaf_backoff_fraction", self.deaf_backoff_fraction),
            ("max_backlog_per_node", self.max_backlog_per_node),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.packet_rate >= 0.0 && self.packet_rate.is_finite()) {
            return Err(SimError::Config(format!(
                "packet_rate must be nonnegative, got {}",
                self.packet_rate
            )));
        }
        if !(self.ack_bytes >= 0.0 && self.ack_bytes.is_finite()) {
            return Err(SimError::Config(format!("ack_bytes must be nonnegative, got {}", self.ack_bytes)));
        }
        if self.data_channels == 0 {
            return Err(SimError::Config("at least one data channel is required".into()));
        }
        if self.stop_after_packets == 0 {
            return Err(SimError::Config("stop_after_packets must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(SimError::Config(format!(
                "warmup_fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    SingleHop,
    MultiHop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    /// Node count of a single-hop network.
    pub nodes: usize,
    /// Mean nodes per R² of a multi-hop network.
    pub density: f64,
    /// Side of the square deployment area, meters.
    pub area_m: f64,
    pub range_m: f64,
}

impl Default for TopologySpec {
    fn default() -> Self {
        Self { kind: TopologyKind::MultiHop, nodes: 8, density: 10.0, area_m: 1500.0, range_m: 250.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSpec {
    pub packet_rate: f64,
    pub data_bytes: f64,
    pub control_bytes: f64,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        let d = SimConfig::default();
        Self { packet_rate: d.packet_rate, data_bytes: d.data_bytes, control_bytes: d.control_bytes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSpec {
    pub data_channels: usize,
    pub data_rate: f64,
    pub control_rate: f64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        let d = SimConfig::default();
        Self { data_channels: d.data_channels, data_rate: d.data_rate, control_rate: d.control_rate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopSpec {
    pub packets: u64,
    pub max_sim_time: f64,
}

impl Default for StopSpec {
    fn default() -> Self {
        let d = SimConfig::default();
        Self { packets: d.stop_after_packets, max_sim_time: d.max_sim_time }
    }
}

/// Scenario file layout: topology, traffic, channels, mode, seed, stop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub topology: TopologySpec,
    pub traffic: TrafficSpec,
    pub channels: ChannelSpec,
    pub mode: CoopMode,
    pub seed: u64,
    pub stop: StopSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            topology: TopologySpec::default(),
            traffic: TrafficSpec::default(),
            channels: ChannelSpec::default(),
            mode: CoopMode::NonCooperative,
            seed: 1,
            stop: StopSpec::default(),
        }
    }
}

impl Scenario {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            packet_rate: self.traffic.packet_rate,
            data_bytes: self.traffic.data_bytes,
            control_bytes: self.traffic.control_bytes,
            data_rate: self.channels.data_rate,
            control_rate: self.channels.control_rate,
            data_channels: self.channels.data_channels,
            mode: self.mode,
            stop_after_packets: self.stop.packets,
            max_sim_time: self.stop.max_sim_time,
            seed: self.seed,
            ..SimConfig::default()
        }
    }
}
