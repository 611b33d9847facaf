use std::fmt;

use crate::coop::MccKind;
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MsgKind {
    Rts,
    Cts,
    Pra,
    Prb,
    Cfa,
    Cfb,
    Inv,
}

impl MsgKind {
    pub fn label(self) -> &'static str {
        match self {
            MsgKind::Rts => "mcrts",
            MsgKind::Cts => "mccts",
            MsgKind::Pra => "pra",
            MsgKind::Prb => "prb",
            MsgKind::Cfa => "cfa",
            MsgKind::Cfb => "cfb",
            MsgKind::Inv => "inv",
        }
    }

    /// Messages of the channel-setup handshake (everything except INV).
    pub fn is_setup(self) -> bool {
        self != MsgKind::Inv
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceEvent {
    Arrival,
    TxStart(MsgKind),
    TxEnd(MsgKind),
    Received(MsgKind),
    Mcc { kind: MccKind, cooperators: usize },
    ToData,
    ToControl,
    Backoff,
    DataDone { collided: bool },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Arrival => write!(f, "arrival"),
            TraceEvent::TxStart(k) => write!(f, "tx_start:{}", k.label()),
            TraceEvent::TxEnd(k) => write!(f, "tx_end:{}", k.label()),
            TraceEvent::Received(k) => write!(f, "rx:{}", k.label()),
            TraceEvent::Mcc { kind, cooperators } => write!(f, "mcc:{}:{cooperators}", kind.label()),
            TraceEvent::ToData => write!(f, "to_data"),
            TraceEvent::ToControl => write!(f, "to_control"),
            TraceEvent::Backoff => write!(f, "backoff"),
            TraceEvent::DataDone { collided } => {
                write!(f, "{}", if *collided { "data_collided" } else { "data_ok" })
            }
        }
    }
}

/// One line of the event log. Channel 0 is the control channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub node: NodeId,
    pub event: TraceEvent,
    pub channel: usize,
}

pub const TRACE_HEADER: &str = "time,node,event,channel";

pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(32 * records.len() + 32);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!("{:.9},{},{},{}\n", r.time, r.node, r.event, r.channel));
    }
    out
}
