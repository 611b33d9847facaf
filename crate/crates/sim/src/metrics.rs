use serde::Serialize;

use crate::config::CoopMode;

/// Outcome of one run. Optional fields are absent when their denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    pub mode: CoopMode,
    pub nodes: usize,
    pub mcc_conflict: u64,
    pub mcc_deaf: u64,
    pub mcc_with_coop: u64,
    pub p_co_hat: Option<f64>,
    pub packets_arrived: u64,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    /// Waiting in queues, excluding packets whose data transfer is under way.
    pub packets_queued: u64,
    pub packets_in_flight: u64,
    /// Completed post-warm-up data handshakes and how many of them collided.
    pub data_handshakes: u64,
    pub data_collisions: u64,
    pub xi: Option<f64>,
    /// Seconds from arrival to acknowledged delivery, post warm-up.
    pub mean_delay: Option<f64>,
    /// Delivered payload bits per second, network aggregate, post warm-up.
    pub throughput: f64,
    pub control_msgs: u64,
    pub inv_msgs: u64,
    pub failed_handshakes: u64,
    /// Share of node-time spent on the control channel.
    pub control_fraction: f64,
    pub sim_time: f64,
    pub saturated: bool,
    pub aborted: bool,
}

impl SimMetrics {
    pub fn mcc_created(&self) -> u64 {
        self.mcc_conflict + self.mcc_deaf
    }

    pub const CSV_COLUMNS: [&'static str; 25] = [
        "mode",
        "nodes",
        "mcc_conflict",
        "mcc_deaf",
        "mcc_created",
        "mcc_with_coop",
        "p_co_hat",
        "packets_arrived",
        "packets_sent",
        "packets_delivered",
        "packets_queued",
        "packets_in_flight",
        "data_handshakes",
        "data_collisions",
        "xi",
        "mean_delay_s",
        "throughput_bps",
        "control_msgs",
        "inv_msgs",
        "failed_handshakes",
        "control_fraction",
        "sim_time_s",
        "saturated",
        "aborted",
        "mcc_per_packet",
    ];

    pub fn csv_header() -> String {
        Self::CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let per_packet = if self.packets_sent > 0 {
            (self.mcc_created() as f64 / self.packets_sent as f64).to_string()
        } else {
            String::new()
        };
        [
            self.mode.label().to_string(),
            self.nodes.to_string(),
            self.mcc_conflict.to_string(),
            self.mcc_deaf.to_string(),
            self.mcc_created().to_string(),
            self.mcc_with_coop.to_string(),
            opt(self.p_co_hat),
            self.packets_arrived.to_string(),
            self.packets_sent.to_string(),
            self.packets_delivered.to_string(),
            self.packets_queued.to_string(),
            self.packets_in_flight.to_string(),
            self.data_handshakes.to_string(),
            self.data_collisions.to_string(),
            opt(self.xi),
            opt(self.mean_delay),
            self.throughput.to_string(),
            self.control_msgs.to_string(),
            self.inv_msgs.to_string(),
            self.failed_handshakes.to_string(),
            self.control_fraction.to_string(),
            self.sim_time.to_string(),
            self.saturated.to_string(),
            self.aborted.to_string(),
            per_packet,
        ]
        .join(",")
    }
}

/// Cooperative-over-baseline ratios; throughput is inverted so it stays in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratios {
    pub eta_xi: Option<f64>,
    pub eta_delta: Option<f64>,
    pub eta_s: Option<f64>,
}

fn ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    match (num, den) {
        (Some(n), Some(d)) if d != 0.0 => Some(n / d),
        _ => None,
    }
}

pub fn measure_ratios(base: &SimMetrics, coop: &SimMetrics) -> Ratios {
    Ratios {
        eta_xi: ratio(coop.xi, base.xi),
        eta_delta: ratio(coop.mean_delay, base.mean_delay),
        eta_s: ratio(Some(base.throughput), Some(coop.throughput)),
    }
}
