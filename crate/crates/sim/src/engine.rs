//! Event-driven protocol engine.
//!
//! Control-channel physics: a node decodes a message only if it was on the
//! control channel, silent, and hearing nothing else for the whole airtime.
//! No capture, no propagation delay, no switching delay.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::config::{CoopMode, SimConfig};
use crate::coop::{
    detect_mcc, find_cooperative_nodes, ControlSend, DataVisit, HandshakeId, MccKind, MccProblem,
    OverheardMessage,
};
use crate::error::Result;
use crate::metrics::SimMetrics;
use crate::topology::{NodeId, Topology};
use crate::trace::{MsgKind, TraceEvent, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolState {
    Idle,
    /// Contention timer running.
    Contending,
    /// Every data channel is booked; waiting for the earliest release.
    AllBusyWait,
    /// Own control message on the air.
    Transmitting,
    /// Waiting for the partner's next handshake message.
    AwaitReply,
    Backoff,
    OnData,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelUsageEntry {
    pub ta: NodeId,
    pub ra: NodeId,
    pub channel: usize,
    pub until: f64,
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    arrival: f64,
    dest: NodeId,
}

#[derive(Debug, Clone, Copy)]
struct Await {
    setup: HandshakeId,
    expect: MsgKind,
    since: f64,
}

/// What a node learned while waiting: a clean INV gives the reason, a
/// corrupted reception does not.
#[derive(Debug, Clone, Copy)]
struct Informed {
    time: f64,
    notice: Option<InvNotice>,
}

#[derive(Debug, Clone, Copy)]
struct InvNotice {
    kind: MccKind,
    entry: ChannelUsageEntry,
}

#[derive(Debug, Clone)]
struct Node {
    state: ProtocolState,
    gen: u64,
    waiting: Option<Await>,
    transmitting: Option<u64>,
    rx: Option<(u64, bool)>,
    nav_until: f64,
    queue: VecDeque<Packet>,
    table: Vec<ChannelUsageEntry>,
    informed: Option<Informed>,
    data: Option<usize>,
    control_since: f64,
    control_time: f64,
}

impl Node {
    fn new() -> Self {
        Self {
            state: ProtocolState::Idle,
            gen: 0,
            waiting: None,
            transmitting: None,
            rx: None,
            nav_until: 0.0,
            queue: VecDeque::new(),
            table: Vec::new(),
            informed: None,
            data: None,
            control_since: 0.0,
            control_time: 0.0,
        }
    }

    fn can_answer(&self) -> bool {
        self.transmitting.is_none()
            && matches!(
                self.state,
                ProtocolState::Idle | ProtocolState::Contending | ProtocolState::AllBusyWait | ProtocolState::Backoff
            )
    }
}

#[derive(Debug, Clone, Copy)]
struct Setup {
    tx: NodeId,
    rx: NodeId,
    channel: usize,
}

#[derive(Debug, Clone, Copy)]
struct ControlTx {
    id: u64,
    sender: NodeId,
    kind: MsgKind,
    setup: HandshakeId,
    notice: Option<InvNotice>,
    target: NodeId,
}

#[derive(Debug, Clone, Copy)]
struct DataTransfer {
    tx: NodeId,
    rx: NodeId,
    end: f64,
    collided: bool,
    warm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    TxEnd(u64),
    DataHandshakeEnd { node: NodeId, gen: u64 },
    NavExpiry { node: NodeId },
    TimerExpiry { node: NodeId, gen: u64 },
    PacketArrival { node: NodeId },
}

impl EventKind {
    fn priority(self) -> (u8, NodeId) {
        match self {
            EventKind::TxEnd(_) => (0, 0),
            EventKind::DataHandshakeEnd { node, .. } => (1, node),
            EventKind::NavExpiry { node } => (2, node),
            EventKind::TimerExpiry { node, .. } => (3, node),
            EventKind::PacketArrival { node } => (4, node),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.kind.priority().cmp(&other.kind.priority()))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

/// Result of one run: metrics and, if requested, the event log.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub metrics: SimMetrics,
    pub trace: Option<Vec<TraceRecord>>,
}

/// Runs one replication on `topology` until the configured packet count
/// has been sent, the time limit passes, or the backlog runs away.
pub fn run(topology: &Topology, config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let mut engine = Engine::new(topology, config);
    engine.execute();
    Ok(engine.finish())
}

#[derive(Debug, Default)]
struct Counters {
    arrived: u64,
    sent: u64,
    delivered: u64,
    backlog: u64,
    mcc_conflict: u64,
    mcc_deaf: u64,
    mcc_with_coop: u64,
    data_handshakes: u64,
    data_collisions: u64,
    delay_sum: f64,
    delay_count: u64,
    warm_bits: f64,
    warm_start: Option<f64>,
    control_msgs: u64,
    inv_msgs: u64,
    failed_handshakes: u64,
}

struct Engine<'a> {
    topo: &'a Topology,
    cfg: SimConfig,
    b: f64,
    td: f64,
    rng: ChaCha8Rng,
    arrival_gap: Option<Exp<f64>>,
    now: f64,
    seq: u64,
    events: BinaryHeap<Reverse<Scheduled>>,
    nodes: Vec<Node>,
    occupancy: Vec<Option<DataVisit>>,
    logs: Vec<Vec<OverheardMessage>>,
    active: Vec<ControlTx>,
    next_tx: u64,
    setups: Vec<Setup>,
    transfers: Vec<DataTransfer>,
    on_channel: Vec<Vec<usize>>,
    warm_after: u64,
    counters: Counters,
    stopped: bool,
    aborted: bool,
    trace: Option<Vec<TraceRecord>>,
}

impl<'a> Engine<'a> {
    fn new(topo: &'a Topology, cfg: &SimConfig) -> Self {
        let n = topo.len();
        let arrival_gap = (cfg.packet_rate > 0.0).then(|| Exp::new(cfg.packet_rate).expect("positive rate"));
        let warm_after = (cfg.warmup_fraction * cfg.stop_after_packets as f64).ceil() as u64;
        let mut e = Self {
            topo,
            cfg: cfg.clone(),
            b: cfg.control_time(),
            td: cfg.data_time(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            arrival_gap,
            now: 0.0,
            seq: 0,
            events: BinaryHeap::new(),
            nodes: vec![Node::new(); n],
            occupancy: vec![None; n],
            logs: vec![Vec::new(); n],
            active: Vec::new(),
            next_tx: 0,
            setups: Vec::new(),
            transfers: Vec::new(),
            on_channel: vec![Vec::new(); cfg.data_channels + 1],
            warm_after,
            counters: Counters::default(),
            stopped: false,
            aborted: false,
            trace: cfg.trace.then(Vec::new),
        };
        for v in 0..n {
            if !topo.neighbors(v).is_empty() {
                e.schedule_arrival(v);
            }
        }
        e
    }

    fn execute(&mut self) {
        let backlog_limit = (self.cfg.max_backlog_per_node * self.topo.len() as f64) as u64;
        while let Some(Reverse(ev)) = self.events.pop() {
            if ev.time > self.cfg.max_sim_time {
                self.now = self.cfg.max_sim_time;
                break;
            }
            self.now = ev.time;
            match ev.kind {
                EventKind::TxEnd(id) => self.on_tx_end(id),
                EventKind::DataHandshakeEnd { node, gen } => self.on_data_end(node, gen),
                EventKind::NavExpiry { node } => {
                    if self.now >= self.nodes[node].nav_until {
                        self.poke(node);
                    }
                }
                EventKind::TimerExpiry { node, gen } => self.on_timer(node, gen),
                EventKind::PacketArrival { node } => self.on_arrival(node),
            }
            if self.counters.backlog > backlog_limit {
                self.aborted = true;
                break;
            }
            if self.stopped {
                break;
            }
        }
    }

    // ---- scheduling helpers ----

    fn push(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Reverse(Scheduled { time, seq: self.seq, kind }));
    }

    fn schedule_arrival(&mut self, v: NodeId) {
        if let Some(gap) = self.arrival_gap {
            let t = self.now + gap.sample(&mut self.rng);
            self.push(t, EventKind::PacketArrival { node: v });
        }
    }

    fn set_timer(&mut self, v: NodeId, at: f64) {
        self.nodes[v].gen += 1;
        let gen = self.nodes[v].gen;
        self.push(at, EventKind::TimerExpiry { node: v, gen });
    }

    fn cancel_timer(&mut self, v: NodeId) {
        self.nodes[v].gen += 1;
    }

    fn exp(&mut self, mean: f64) -> f64 {
        Exp::new(1.0 / mean).expect("positive mean").sample(&mut self.rng)
    }

    fn log(&mut self, node: NodeId, event: TraceEvent, channel: usize) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceRecord { time: self.now, node, event, channel });
        }
    }

    // ---- sensing ----

    fn on_control(&self, v: NodeId) -> bool {
        self.occupancy[v].is_none()
    }

    fn carrier_busy(&self, v: NodeId) -> bool {
        self.active.iter().any(|t| t.sender != v && self.topo.adjacent(t.sender, v))
    }

    fn channel_free(&self, v: NodeId) -> bool {
        self.now >= self.nodes[v].nav_until && !self.carrier_busy(v)
    }

    fn set_nav(&mut self, v: NodeId, until: f64) {
        if until > self.nodes[v].nav_until {
            self.nodes[v].nav_until = until;
            self.push(until, EventKind::NavExpiry { node: v });
        }
    }

    fn idle_and_free(&self, v: NodeId) -> bool {
        let n = &self.nodes[v];
        self.on_control(v) && n.state == ProtocolState::Idle && n.transmitting.is_none() && self.channel_free(v)
    }

    // ---- queue procedures ----

    fn on_arrival(&mut self, v: NodeId) {
        let ns = self.topo.neighbors(v);
        let dest = ns[self.rng.random_range(0..ns.len())];
        self.nodes[v].queue.push_back(Packet { arrival: self.now, dest });
        self.counters.arrived += 1;
        self.counters.backlog += 1;
        self.log(v, TraceEvent::Arrival, 0);
        self.schedule_arrival(v);
        if self.idle_and_free(v) && self.nodes[v].queue.len() == 1 {
            self.attempt_rts(v);
        }
    }

    /// CHECK-QUEUE, run whenever "channel free and node idle" may have become true.
    fn poke(&mut self, v: NodeId) {
        if self.idle_and_free(v) {
            self.check_queue(v);
        }
    }

    fn check_queue(&mut self, v: NodeId) {
        if self.nodes[v].queue.is_empty() {
            self.nodes[v].state = ProtocolState::Idle;
            return;
        }
        let wait = self.rng.random::<f64>() * self.cfg.contention_factor * self.b;
        self.nodes[v].state = ProtocolState::Contending;
        self.set_timer(v, self.now + wait);
    }

    fn attempt_rts(&mut self, v: NodeId) {
        let now = self.now;
        self.nodes[v].table.retain(|e| e.until > now);
        let m = self.cfg.data_channels;
        let table = &self.nodes[v].table;
        let free: Vec<usize> = (1..=m).filter(|ch| !table.iter().any(|e| e.channel == *ch)).collect();
        if free.is_empty() {
            let release = table.iter().map(|e| e.until).fold(f64::INFINITY, f64::min);
            self.nodes[v].state = ProtocolState::AllBusyWait;
            self.set_timer(v, release);
            return;
        }
        let channel = free[self.rng.random_range(0..free.len())];
        let dest = self.nodes[v].queue.front().expect("attempt with empty queue").dest;
        let setup = self.setups.len();
        self.setups.push(Setup { tx: v, rx: dest, channel });
        let kind = if self.cfg.mode == CoopMode::RealDish { MsgKind::Pra } else { MsgKind::Rts };
        self.start_tx(v, kind, setup, dest, None);
    }

    fn on_timer(&mut self, v: NodeId, gen: u64) {
        if gen != self.nodes[v].gen {
            return;
        }
        match self.nodes[v].state {
            ProtocolState::Contending => self.attempt_rts(v),
            ProtocolState::AllBusyWait => self.check_queue(v),
            ProtocolState::AwaitReply => self.reply_timeout(v),
            ProtocolState::Backoff => {
                self.nodes[v].state = ProtocolState::Idle;
                self.poke(v);
            }
            _ => {}
        }
    }

    fn backoff(&mut self, v: NodeId, mean: f64) {
        let d = self.exp(mean);
        self.nodes[v].state = ProtocolState::Backoff;
        self.nodes[v].waiting = None;
        self.set_timer(v, self.now + d);
        self.log(v, TraceEvent::Backoff, 0);
    }

    fn reply_timeout(&mut self, v: NodeId) {
        let since = self.nodes[v].waiting.take().map_or(self.now, |w| w.since);
        let informed = self.nodes[v].informed.take().filter(|i| i.time >= since);
        self.counters.failed_handshakes += 1;
        let short = self.cfg.backoff_factor * self.b;
        let mean = match informed.and_then(|i| i.notice) {
            Some(InvNotice { kind: MccKind::DeafTerminal, .. }) => self.cfg.deaf_backoff_fraction * self.td,
            Some(InvNotice { kind: MccKind::ChannelConflict, entry }) => {
                self.nodes[v].table.push(entry);
                short
            }
            None => short,
        };
        self.backoff(v, mean);
    }

    // ---- control channel ----

    fn airtime(&self, kind: MsgKind) -> f64 {
        match kind {
            MsgKind::Rts | MsgKind::Cts => self.b,
            _ => 0.5 * self.b,
        }
    }

    fn start_tx(&mut self, s: NodeId, kind: MsgKind, setup: HandshakeId, target: NodeId, notice: Option<InvNotice>) {
        let id = self.next_tx;
        self.next_tx += 1;
        self.cancel_timer(s);
        {
            let n = &mut self.nodes[s];
            n.transmitting = Some(id);
            n.rx = None;
            n.state = ProtocolState::Transmitting;
            n.waiting = None;
        }
        let topo = self.topo;
        for &v in topo.neighbors(s) {
            if !self.on_control(v) || self.nodes[v].transmitting.is_some() {
                continue;
            }
            let heard_other = self.carrier_busy(v);
            match self.nodes[v].rx.as_mut() {
                Some((_, clean)) => *clean = false,
                None if !heard_other => self.nodes[v].rx = Some((id, true)),
                None => {}
            }
            if matches!(self.nodes[v].state, ProtocolState::Contending | ProtocolState::AllBusyWait) {
                // PASSIVE: the timer dies, the node listens
                self.nodes[v].state = ProtocolState::Idle;
                self.cancel_timer(v);
            }
        }
        self.active.push(ControlTx { id, sender: s, kind, setup, notice, target });
        let end = self.now + self.airtime(kind);
        self.push(end, EventKind::TxEnd(id));
        self.counters.control_msgs += 1;
        if kind == MsgKind::Inv {
            self.counters.inv_msgs += 1;
        }
        self.log(s, TraceEvent::TxStart(kind), 0);
    }

    fn on_tx_end(&mut self, id: u64) {
        let pos = self.active.iter().position(|t| t.id == id).expect("unknown transmission");
        let tx = self.active.swap_remove(pos);
        let s = tx.sender;
        self.nodes[s].transmitting = None;
        self.log(s, TraceEvent::TxEnd(tx.kind), 0);
        let topo = self.topo;
        let mut receivers = Vec::new();
        for &v in topo.neighbors(s) {
            if let Some((rid, clean)) = self.nodes[v].rx {
                if rid == id {
                    self.nodes[v].rx = None;
                    if clean {
                        receivers.push(v);
                        self.log(v, TraceEvent::Received(tx.kind), 0);
                    } else {
                        self.garbled(v);
                    }
                }
            }
        }
        match tx.kind {
            MsgKind::Rts | MsgKind::Pra => self.end_request(&tx, &receivers),
            MsgKind::Cts => self.end_cts(&tx, &receivers),
            MsgKind::Prb => self.end_prb(&tx, &receivers),
            MsgKind::Cfa => self.end_cfa(&tx, &receivers),
            MsgKind::Cfb => self.end_cfb(&tx, &receivers),
            MsgKind::Inv => self.end_inv(&tx, &receivers),
        }
        for &v in topo.neighbors(s) {
            self.poke(v);
        }
        self.poke(s);
    }

    fn garbled(&mut self, v: NodeId) {
        let keep = self.nodes[v].informed.is_some_and(|i| i.time == self.now && i.notice.is_some());
        if !keep {
            self.nodes[v].informed = Some(Informed { time: self.now, notice: None });
        }
    }

    /// Records the usage information of a setup message at its receivers.
    fn overhear(&mut self, tx: &ControlTx, receivers: &[NodeId], remaining: f64, nav: f64) {
        let s = self.setups[tx.setup];
        let until = self.now + remaining + self.td;
        for &v in receivers {
            self.logs[v].push(OverheardMessage {
                sender: tx.sender,
                handshake: tx.setup,
                channel: s.channel,
                time: self.now,
                until,
            });
            if self.logs[v].len() > 64 {
                let now = self.now;
                self.logs[v].retain(|m| m.until >= now);
            }
        }
        for &v in receivers {
            if v == tx.target {
                continue;
            }
            self.nodes[v].table.push(ChannelUsageEntry { ta: s.tx, ra: s.rx, channel: s.channel, until });
            if nav > 0.0 {
                self.set_nav(v, self.now + nav);
            }
        }
    }

    fn forget(&mut self, tx: &ControlTx, receivers: &[NodeId]) {
        for &v in receivers {
            self.logs[v].retain(|m| !(m.sender == tx.sender && m.handshake == tx.setup));
        }
    }

    /// Counts the problems a finished setup message created and returns
    /// them with their cooperative sets.
    fn problems(&mut self, tx: &ControlTx, target: Option<NodeId>) -> Vec<(MccProblem, Vec<NodeId>)> {
        let send = ControlSend {
            sender: tx.sender,
            handshake: tx.setup,
            channel: self.setups[tx.setup].channel,
            target,
            time: self.now,
        };
        let found = detect_mcc(&send, self.topo, &self.occupancy);
        let mut out = Vec::with_capacity(found.len());
        for p in found {
            let coop = find_cooperative_nodes(&p, self.topo, &self.logs);
            match p.kind {
                MccKind::ChannelConflict => self.counters.mcc_conflict += 1,
                MccKind::DeafTerminal => self.counters.mcc_deaf += 1,
            }
            if !coop.is_empty() {
                self.counters.mcc_with_coop += 1;
            }
            self.log(p.y, TraceEvent::Mcc { kind: p.kind, cooperators: coop.len() }, p.x_channel);
            out.push((p, coop));
        }
        out
    }

    /// Ideal cooperation: `y` learns of the problem at no airtime cost.
    fn ideal_abort(&mut self, y: NodeId, problems: &[(MccProblem, Vec<NodeId>)]) {
        let mut deaf = false;
        for (p, _) in problems.iter().filter(|(_, c)| !c.is_empty()) {
            match p.kind {
                MccKind::DeafTerminal => deaf = true,
                MccKind::ChannelConflict => self.nodes[y].table.push(ChannelUsageEntry {
                    ta: p.x,
                    ra: p.x_partner,
                    channel: p.x_channel,
                    until: p.x_until,
                }),
            }
        }
        let mean = if deaf { self.cfg.deaf_backoff_fraction * self.td } else { self.cfg.backoff_factor * self.b };
        self.backoff(y, mean);
    }

    /// Cooperators that sense the channel idle right now, each with the
    /// notice it would send. Decided before any reply goes on the air.
    fn inv_senders(&self, problems: &[(MccProblem, Vec<NodeId>)]) -> Vec<(NodeId, InvNotice)> {
        let mut out: Vec<(NodeId, InvNotice)> = Vec::new();
        for (p, coop) in problems {
            for &v in coop {
                if out.iter().any(|(u, _)| *u == v) {
                    continue;
                }
                if self.on_control(v) && self.nodes[v].can_answer() && !self.carrier_busy(v) {
                    let entry = ChannelUsageEntry { ta: p.x, ra: p.x_partner, channel: p.x_channel, until: p.x_until };
                    out.push((v, InvNotice { kind: p.kind, entry }));
                }
            }
        }
        out
    }

    fn await_reply(&mut self, v: NodeId, setup: HandshakeId, expect: MsgKind) {
        let d = self.airtime(expect);
        self.nodes[v].state = ProtocolState::AwaitReply;
        self.set_timer(v, self.now + d);
        self.nodes[v].waiting = Some(Await { setup, expect, since: self.now });
    }

    fn awaiting(&self, v: NodeId, setup: HandshakeId, expect: MsgKind) -> bool {
        self.nodes[v].state == ProtocolState::AwaitReply
            && self.nodes[v].waiting.is_some_and(|w| w.setup == setup && w.expect == expect)
    }

    /// McRTS or PRA from y to z has finished.
    fn end_request(&mut self, tx: &ControlTx, receivers: &[NodeId]) {
        let (y, z) = (tx.sender, tx.target);
        let real = tx.kind == MsgKind::Pra;
        let (remaining, reply) = if real { (1.5 * self.b, MsgKind::Prb) } else { (self.b, MsgKind::Cts) };
        self.overhear(tx, receivers, remaining, remaining);
        let problems = self.problems(tx, Some(z));
        if self.cfg.mode == CoopMode::IdealDish && problems.iter().any(|(_, c)| !c.is_empty()) {
            self.forget(tx, receivers);
            self.ideal_abort(y, &problems);
            return;
        }
        let invs = if real { self.inv_senders(&problems) } else { Vec::new() };
        if receivers.contains(&z) && self.nodes[z].can_answer() {
            self.start_tx(z, reply, tx.setup, y, None);
        }
        self.await_reply(y, tx.setup, reply);
        for (v, notice) in invs {
            if self.nodes[v].transmitting.is_none() {
                self.start_tx(v, MsgKind::Inv, tx.setup, y, Some(notice));
            }
        }
    }

    /// McCTS from z back to the transmitter has finished.
    fn end_cts(&mut self, tx: &ControlTx, receivers: &[NodeId]) {
        let z = tx.sender;
        let s = self.setups[tx.setup];
        self.overhear(tx, receivers, 0.0, 0.0);
        let problems = self.problems(tx, None);
        if self.cfg.mode == CoopMode::IdealDish && problems.iter().any(|(_, c)| !c.is_empty()) {
            self.forget(tx, receivers);
            self.ideal_abort(z, &problems);
            return;
        }
        self.commit(tx.setup, z, s.tx, receivers.contains(&s.tx) && self.awaiting(s.tx, tx.setup, MsgKind::Cts));
    }

    fn end_prb(&mut self, tx: &ControlTx, receivers: &[NodeId]) {
        let (z, y) = (tx.sender, tx.target);
        self.overhear(tx, receivers, self.b, self.b);
        let problems = self.problems(tx, None);
        let invs = self.inv_senders(&problems);
        if receivers.contains(&y) && self.awaiting(y, tx.setup, MsgKind::Prb) {
            self.start_tx(y, MsgKind::Cfa, tx.setup, z, None);
        }
        self.await_reply(z, tx.setup, MsgKind::Cfa);
        for (v, notice) in invs {
            if self.nodes[v].transmitting.is_none() {
                self.start_tx(v, MsgKind::Inv, tx.setup, z, Some(notice));
            }
        }
    }

    fn end_cfa(&mut self, tx: &ControlTx, receivers: &[NodeId]) {
        let (y, z) = (tx.sender, tx.target);
        self.overhear(tx, receivers, 0.5 * self.b, 0.5 * self.b);
        if receivers.contains(&z) && self.awaiting(z, tx.setup, MsgKind::Cfa) {
            self.start_tx(z, MsgKind::Cfb, tx.setup, y, None);
        }
        self.await_reply(y, tx.setup, MsgKind::Cfb);
    }

    fn end_cfb(&mut self, tx: &ControlTx, receivers: &[NodeId]) {
        let (z, y) = (tx.sender, tx.target);
        self.overhear(tx, receivers, 0.0, 0.0);
        self.commit(tx.setup, z, y, receivers.contains(&y) && self.awaiting(y, tx.setup, MsgKind::Cfb));
    }

    fn end_inv(&mut self, tx: &ControlTx, receivers: &[NodeId]) {
        self.nodes[tx.sender].state = ProtocolState::Idle;
        if receivers.contains(&tx.target) {
            self.nodes[tx.target].informed = Some(Informed { time: self.now, notice: tx.notice });
        }
    }

    // ---- data channels ----

    /// The receiver always switches; the transmitter only if it heard the reply.
    fn commit(&mut self, setup: HandshakeId, receiver: NodeId, transmitter: NodeId, transmitter_ready: bool) {
        let until = self.now + self.td;
        self.switch_to_data(receiver, setup, until, transmitter);
        if transmitter_ready {
            self.switch_to_data(transmitter, setup, until, receiver);
            self.start_transfer(setup, until);
        }
    }

    fn switch_to_data(&mut self, v: NodeId, setup: HandshakeId, until: f64, partner: NodeId) {
        let channel = self.setups[setup].channel;
        self.cancel_timer(v);
        let gen = self.nodes[v].gen;
        let now = self.now;
        let n = &mut self.nodes[v];
        n.state = ProtocolState::OnData;
        n.waiting = None;
        n.rx = None;
        n.control_time += now - n.control_since;
        self.occupancy[v] = Some(DataVisit { handshake: setup, channel, partner, until });
        self.push(until, EventKind::DataHandshakeEnd { node: v, gen });
        self.log(v, TraceEvent::ToData, channel);
    }

    fn start_transfer(&mut self, setup: HandshakeId, end: f64) {
        let s = self.setups[setup];
        self.counters.sent += 1;
        let warm = self.counters.sent > self.warm_after;
        if warm && self.counters.warm_start.is_none() {
            self.counters.warm_start = Some(self.now);
        }
        let now = self.now;
        let topo = self.topo;
        // DATA is hit by another transmitter near its receiver; with a
        // nonzero ACK, the ACK is hit by another receiver near its transmitter.
        let ack = self.cfg.ack_bytes > 0.0;
        let hits = |from_tx: NodeId, from_rx: NodeId, to_tx: NodeId, to_rx: NodeId| {
            topo.adjacent(from_tx, to_rx) || (ack && topo.adjacent(from_rx, to_tx))
        };
        let mut collided = false;
        self.on_channel[s.channel].retain(|&k| self.transfers[k].end > now);
        for &k in &self.on_channel[s.channel] {
            let o = self.transfers[k];
            if hits(s.tx, s.rx, o.tx, o.rx) {
                self.transfers[k].collided = true;
            }
            if hits(o.tx, o.rx, s.tx, s.rx) {
                collided = true;
            }
        }
        let k = self.transfers.len();
        self.transfers.push(DataTransfer { tx: s.tx, rx: s.rx, end, collided, warm });
        self.on_channel[s.channel].push(k);
        self.nodes[s.tx].data = Some(k);
        if self.counters.sent >= self.cfg.stop_after_packets {
            self.stopped = true;
        }
    }

    fn on_data_end(&mut self, v: NodeId, gen: u64) {
        if gen != self.nodes[v].gen {
            return;
        }
        let visit = self.occupancy[v].take().expect("data end without a visit");
        self.nodes[v].control_since = self.now;
        if let Some(k) = self.nodes[v].data.take() {
            let t = self.transfers[k];
            debug_assert_eq!(t.tx, v);
            if t.warm {
                self.counters.data_handshakes += 1;
                if t.collided {
                    self.counters.data_collisions += 1;
                }
            }
            if !t.collided {
                let p = self.nodes[v].queue.pop_front().expect("delivered packet missing");
                self.counters.delivered += 1;
                self.counters.backlog -= 1;
                if t.warm {
                    self.counters.delay_sum += self.now - p.arrival;
                    self.counters.delay_count += 1;
                    self.counters.warm_bits += 8.0 * self.cfg.data_bytes;
                }
            }
            self.log(v, TraceEvent::DataDone { collided: t.collided }, visit.channel);
        }
        self.nodes[v].state = ProtocolState::Idle;
        self.log(v, TraceEvent::ToControl, 0);
        self.poke(v);
    }

    fn finish(self) -> SimOutput {
        let c = &self.counters;
        let now = self.now;
        let n = self.topo.len();
        let in_flight = self.nodes.iter().filter(|v| v.data.is_some()).count() as u64;
        let queued: u64 = self.nodes.iter().map(|v| v.queue.len() as u64).sum();
        let control_time: f64 = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, v)| v.control_time + if self.occupancy[k].is_none() { now - v.control_since } else { 0.0 })
            .sum();
        let created = c.mcc_conflict + c.mcc_deaf;
        let span = c.warm_start.map_or(0.0, |t| now - t);
        let saturated = self.aborted || (queued > 2 * n as u64 && queued as f64 > 0.1 * c.arrived as f64);
        let metrics = SimMetrics {
            mode: self.cfg.mode,
            nodes: n,
            mcc_conflict: c.mcc_conflict,
            mcc_deaf: c.mcc_deaf,
            mcc_with_coop: c.mcc_with_coop,
            p_co_hat: (created > 0).then(|| c.mcc_with_coop as f64 / created as f64),
            packets_arrived: c.arrived,
            packets_sent: c.sent,
            packets_delivered: c.delivered,
            packets_queued: queued - in_flight,
            packets_in_flight: in_flight,
            data_handshakes: c.data_handshakes,
            data_collisions: c.data_collisions,
            xi: (c.data_handshakes > 0).then(|| c.data_collisions as f64 / c.data_handshakes as f64),
            mean_delay: (c.delay_count > 0).then(|| c.delay_sum / c.delay_count as f64),
            throughput: if span > 0.0 { c.warm_bits / span } else { 0.0 },
            control_msgs: c.control_msgs,
            inv_msgs: c.inv_msgs,
            failed_handshakes: c.failed_handshakes,
            control_fraction: if now > 0.0 && n > 0 { control_time / (n as f64 * now) } else { 1.0 },
            sim_time: now,
            saturated,
            aborted: self.aborted,
        };
        SimOutput { metrics, trace: self.trace }
    }
}
