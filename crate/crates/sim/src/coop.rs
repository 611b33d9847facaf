//! MCC-problem detection and cooperative-node identification.
//!
//! Both are pure functions of the network snapshot at the instant a node
//! finishes sending a control message, so the engine and hand-scripted
//! schedules share one definition.

use serde::{Deserialize, Serialize};

use crate::topology::{NodeId, Topology};

pub type HandshakeId = usize;

/// A node currently parked on a data channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataVisit {
    pub handshake: HandshakeId,
    pub channel: usize,
    pub partner: NodeId,
    pub until: f64,
}

/// A control message successfully received by the log owner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheardMessage {
    pub sender: NodeId,
    pub handshake: HandshakeId,
    pub channel: usize,
    pub time: f64,
    /// The usage information it carried is stale after this instant.
    pub until: f64,
}

/// A control message that has just finished transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSend {
    pub sender: NodeId,
    pub handshake: HandshakeId,
    /// Data channel the sender commits to.
    pub channel: usize,
    /// Addressee of a channel request; `None` for a reply.
    pub target: Option<NodeId>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MccKind {
    ChannelConflict,
    DeafTerminal,
}

impl MccKind {
    pub fn label(self) -> &'static str {
        match self {
            MccKind::ChannelConflict => "channel_conflict",
            MccKind::DeafTerminal => "deaf_terminal",
        }
    }
}

/// Problem created by `y` against `x`, who is busy in handshake `x_handshake`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MccProblem {
    pub kind: MccKind,
    pub x: NodeId,
    pub y: NodeId,
    pub x_handshake: HandshakeId,
    pub x_partner: NodeId,
    pub x_channel: usize,
    pub x_until: f64,
    pub y_handshake: HandshakeId,
    pub time: f64,
}

/// Every (x, y) problem created by `send`. At most one problem per pair:
/// an addressee on a data channel is a deaf terminal even if it also holds
/// the selected channel. Deaf terminals come first, then conflicts in node order.
pub fn detect_mcc(send: &ControlSend, topology: &Topology, occupancy: &[Option<DataVisit>]) -> Vec<MccProblem> {
    let y = send.sender;
    let mut out = Vec::new();
    let problem = |kind, x: NodeId, visit: &DataVisit| MccProblem {
        kind,
        x,
        y,
        x_handshake: visit.handshake,
        x_partner: visit.partner,
        x_channel: visit.channel,
        x_until: visit.until,
        y_handshake: send.handshake,
        time: send.time,
    };
    if let Some(x) = send.target {
        if let Some(visit) = occupancy[x].as_ref().filter(|v| v.until > send.time) {
            out.push(problem(MccKind::DeafTerminal, x, visit));
        }
    }
    for &x in topology.neighbors(y) {
        if Some(x) == send.target && !out.is_empty() {
            continue;
        }
        if let Some(visit) = occupancy[x].as_ref() {
            if visit.channel == send.channel && visit.until > send.time {
                out.push(problem(MccKind::ChannelConflict, x, visit));
            }
        }
    }
    out
}

/// Common neighbors of x and y (other than x, y and x's partner) whose log
/// holds a live message of x's ongoing handshake and y's just-sent message.
pub fn find_cooperative_nodes(
    problem: &MccProblem,
    topology: &Topology,
    logs: &[Vec<OverheardMessage>],
) -> Vec<NodeId> {
    let (x, y) = (problem.x, problem.y);
    topology
        .neighbors(y)
        .iter()
        .copied()
        .filter(|&v| v != x && v != problem.x_partner && topology.adjacent(v, x))
        .filter(|&v| {
            let log = &logs[v];
            let heard_x = log
                .iter()
                .any(|m| m.sender == x && m.handshake == problem.x_handshake && m.until >= problem.time);
            let heard_y = log.iter().any(|m| m.sender == y && m.handshake == problem.y_handshake);
            heard_x && heard_y
        })
        .collect()
}
