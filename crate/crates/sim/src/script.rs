//! Replays a hand-written schedule of control messages and data-channel
//! visits, applying the engine's reception rule, and reports the problems
//! each message creates together with their cooperative sets.

use crate::coop::{
    detect_mcc, find_cooperative_nodes, ControlSend, DataVisit, HandshakeId, MccProblem, OverheardMessage,
};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// A control message on the air during `[start, end]`.
    Send {
        sender: NodeId,
        handshake: HandshakeId,
        channel: usize,
        target: Option<NodeId>,
        start: f64,
        end: f64,
        /// Expiry of the usage information it carries.
        info_until: f64,
    },
    /// `node` sits on a data channel during `[from, until]`.
    Visit {
        node: NodeId,
        handshake: HandshakeId,
        channel: usize,
        partner: NodeId,
        from: f64,
        until: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptOutcome {
    /// Message index (in schedule order) with the receivers that decoded it.
    pub receptions: Vec<(usize, Vec<NodeId>)>,
    pub problems: Vec<(usize, MccProblem, Vec<NodeId>)>,
}

fn overlaps(a0: f64, a1: f64, b0: f64, b1: f64) -> bool {
    a0 < b1 && b0 < a1
}

/// `v` decodes message `k` iff it is a neighbor of the sender, stays on the
/// control channel, stays silent, and hears no other neighbor for the whole airtime.
pub fn decodes(topology: &Topology, steps: &[Step], k: usize, v: NodeId) -> bool {
    let Step::Send { sender, start, end, .. } = steps[k] else {
        return false;
    };
    if v == sender || !topology.adjacent(sender, v) {
        return false;
    }
    steps.iter().enumerate().all(|(j, s)| match *s {
        Step::Send { sender: o, start: s0, end: s1, .. } if j != k => {
            !(overlaps(start, end, s0, s1) && (o == v || topology.adjacent(o, v)))
        }
        Step::Visit { node, from, until, .. } if node == v => until <= start || from >= end,
        _ => true,
    })
}

pub fn replay(topology: &Topology, steps: &[Step]) -> ScriptOutcome {
    let n = topology.len();
    let mut order: Vec<usize> = (0..steps.len()).filter(|&k| matches!(steps[k], Step::Send { .. })).collect();
    order.sort_by(|&a, &b| {
        let end = |k: usize| match steps[k] {
            Step::Send { end, .. } => end,
            _ => unreachable!(),
        };
        end(a).total_cmp(&end(b)).then(a.cmp(&b))
    });
    let mut logs: Vec<Vec<OverheardMessage>> = vec![Vec::new(); n];
    let mut out = ScriptOutcome { receptions: Vec::new(), problems: Vec::new() };
    for k in order {
        let Step::Send { sender, handshake, channel, target, end, info_until, .. } = steps[k] else {
            unreachable!()
        };
        let receivers: Vec<NodeId> = (0..n).filter(|&v| decodes(topology, steps, k, v)).collect();
        for &v in &receivers {
            logs[v].push(OverheardMessage { sender, handshake, channel, time: end, until: info_until });
        }
        let occupancy: Vec<Option<DataVisit>> = (0..n)
            .map(|v| {
                steps.iter().find_map(|s| match *s {
                    Step::Visit { node, handshake, channel, partner, from, until }
                        if node == v && from <= end && end < until =>
                    {
                        Some(DataVisit { handshake, channel, partner, until })
                    }
                    _ => None,
                })
            })
            .collect();
        let send = ControlSend { sender, handshake, channel, target, time: end };
        for p in detect_mcc(&send, topology, &occupancy) {
            let coop = find_cooperative_nodes(&p, topology, &logs);
            out.problems.push((k, p, coop));
        }
        out.receptions.push((k, receivers));
    }
    out
}
