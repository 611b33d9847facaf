//! Discrete-event simulator of a control-channel multi-channel MAC with
//! optional DISH cooperation.

pub mod config;
pub mod coop;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod script;
pub mod seed;
pub mod topology;
pub mod trace;

pub use config::{ChannelSpec, CoopMode, Scenario, SimConfig, StopSpec, TopologyKind, TopologySpec, TrafficSpec};
pub use coop::{
    detect_mcc, find_cooperative_nodes, ControlSend, DataVisit, HandshakeId, MccKind, MccProblem, OverheardMessage,
};
pub use engine::{run, ChannelUsageEntry, ProtocolState, SimOutput};
pub use error::SimError;
pub use metrics::{measure_ratios, Ratios, SimMetrics};
pub use seed::{split_seed, topology_seed};
pub use topology::{generate_topology, NodeId, Topology};
pub use trace::{trace_csv, MsgKind, TraceEvent, TraceRecord};
