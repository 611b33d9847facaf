//! The `p_co` pipeline.
//!
//! Control-channel statistics are the solution of a small coupled system:
//! the fraction of time on the control channel depends on how many
//! handshakes a node takes part in, which depends on how often overhearing
//! and McCTS reception succeed, which in turn depends on the control-message
//! rate. [`solve_fixed_point`] resolves that system; [`p_co`] then chains the
//! conditional on-channel probability and the neighbour-count coefficients
//! into the probability that an MCC problem has at least one cooperative node.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::geometry::NeighborConstants;

/// Heuristic neighbour count needed for a connected random network is `5.18·ln N`.
pub const CONNECTIVITY_FACTOR: f64 = 5.18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopMode {
    /// Every node hears every other node; density is the total node count.
    SingleHop,
    /// Poisson field of nodes; density is nodes per `R²`.
    MultiHop,
}

impl std::fmt::Display for HopMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HopMode::SingleHop => "single-hop",
            HopMode::MultiHop => "multi-hop",
        })
    }
}

/// Inputs to the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Nodes per `R²` (multi-hop) or total node count (single-hop).
    pub node_density: f64,
    /// Data packets per second per node, retransmissions included.
    pub packet_rate: f64,
    /// Duration of a data-channel handshake `T_d`, seconds.
    pub data_time: f64,
    /// Airtime of one control message `b`, seconds.
    pub control_time: f64,
    pub hop_mode: HopMode,
}

impl ModelParams {
    pub fn new(
        hop_mode: HopMode,
        node_density: f64,
        packet_rate: f64,
        data_time: f64,
        control_time: f64,
    ) -> Self {
        Self {
            node_density,
            packet_rate,
            data_time,
            control_time,
            hop_mode,
        }
    }

    /// Builds timings from frame sizes in bytes and channel rates in bits/s.
    pub fn from_frames(
        hop_mode: HopMode,
        node_density: f64,
        packet_rate: f64,
        data_bytes: f64,
        control_bytes: f64,
        data_rate: f64,
        control_rate: f64,
    ) -> Self {
        Self::new(
            hop_mode,
            node_density,
            packet_rate,
            8.0 * data_bytes / data_rate,
            8.0 * control_bytes / control_rate,
        )
    }

    /// Adds the airtime of an ACK frame to the data handshake.
    pub fn with_ack(mut self, ack_bytes: f64, data_rate: f64) -> Self {
        self.data_time += 8.0 * ack_bytes / data_rate;
        self
    }

    /// Offered load `λ·T_d`.
    pub fn load(&self) -> f64 {
        self.packet_rate * self.data_time
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::Domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("node density", self.node_density)?;
        positive("packet rate", self.packet_rate)?;
        positive("data handshake time", self.data_time)?;
        positive("control message time", self.control_time)?;
        if 2.0 * self.control_time >= self.data_time {
            return Err(ModelError::Domain(format!(
                "control message time {} must be well below the data handshake time {}",
                self.control_time, self.data_time
            )));
        }
        Ok(())
    }

    /// Soft violations of the model's assumptions.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.control_time >= self.data_time / 10.0 {
            out.push(format!(
                "control time b={:.3e}s is not much smaller than T_d={:.3e}s (b/T_d={:.3})",
                self.control_time,
                self.data_time,
                self.control_time / self.data_time
            ));
        }
        out
    }

    /// Warns when a multi-hop density is unlikely to yield a connected network of `total_nodes`.
    pub fn connectivity_warning(&self, total_nodes: usize) -> Option<String> {
        if self.hop_mode != HopMode::MultiHop || total_nodes < 2 {
            return None;
        }
        let degree = std::f64::consts::PI * self.node_density;
        let needed = CONNECTIVITY_FACTOR * (total_nodes as f64).ln();
        (degree < needed).then(|| {
            format!(
                "mean degree {degree:.1} is below {needed:.1} (= {CONNECTIVITY_FACTOR}·ln {total_nodes}); \
                 the network may be disconnected"
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Bound on the max component residual; rates are scaled by `T_d`.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight given to the new iterate in `x ← (1-α)x + α·F(x)`.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.5,
        }
    }
}

/// Control-channel statistics at a solution of the coupled equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointState {
    pub p_ctrl: f64,
    pub p_oh: f64,
    pub p_succ: f64,
    pub lambda_c: f64,
    pub lambda_rts: f64,
    pub lambda_cts: f64,
    pub p_ni_oh: f64,
    pub p_ni_cts: f64,
    pub iterations: usize,
}

/// Everything the `p_co` chain produces for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoopReport {
    pub p_ctrl_star: f64,
    pub weight: f64,
    pub lambda_w: f64,
    pub p_co_xy_star: f64,
    pub p_co: f64,
    pub state: FixedPointState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// `1 + λT_d(λT_d − 6)`; single-hop only.
    pub discriminant: Option<f64>,
    pub p_ctrl: Option<f64>,
    pub detail: String,
}

/// Closed-form single-hop solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleHopClosedForm {
    pub p_ctrl: f64,
    pub lambda_c: f64,
    pub lambda_w: f64,
}

/// `(1 − e^{−z})/z`, with its limit 1 at `z = 0`.
pub(crate) fn phi(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - z / 2.0 + z * z / 6.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// `1 − φ(z)` without cancellation for small `z`.
fn one_minus_phi(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        z / 2.0 - z * z / 6.0 + z * z * z / 24.0 - z * z * z * z / 120.0
    } else {
        1.0 - phi(z)
    }
}

/// `φ(a) − φ(a + d)`, expanded in powers of `a` and `d` when both are small.
fn phi_drop(a: f64, d: f64) -> f64 {
    if (a + d).abs() < 1e-3 {
        let s = a + d;
        d * (0.5 - (2.0 * a + d) / 6.0 + (s * s + s * a + a * a) / 24.0
            - (s * s * s + s * s * a + s * a * a + a * a * a) / 120.0)
    } else {
        phi(a) - phi(a + d)
    }
}

/// `g(x) = (1 − e^{−x·T_d})/x`, which tends to `T_d` as `x → 0`.
pub fn g(x: f64, data_time: f64) -> f64 {
    data_time * phi(x * data_time)
}

/// Probability that a node on a data channel at `t₁` stays out of the control
/// channel's way during `[t₁, t₁ + Δt]`.
///
/// The node returns at a time uniform over the remaining handshake and then
/// transmits as a Poisson source of rate `lambda_c`.
pub fn switch_noninterference(delta_t: f64, lambda_c: f64, data_time: f64) -> Result<f64> {
    if !(delta_t >= 0.0) {
        return Err(ModelError::Domain(format!("window must be non-negative, got {delta_t}")));
    }
    if !(data_time > 0.0) {
        return Err(ModelError::Domain(format!("T_d must be positive, got {data_time}")));
    }
    if delta_t >= data_time {
        return Err(ModelError::Domain(format!(
            "window {delta_t} must be shorter than the data handshake {data_time}"
        )));
    }
    if !(lambda_c >= 0.0) {
        return Err(ModelError::Domain(format!("rate must be non-negative, got {lambda_c}")));
    }
    let frac = delta_t / data_time;
    Ok(1.0 - frac * (1.0 - phi(lambda_c * delta_t)))
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{name} must be in [0, 1], got {p}")))
    }
}

/// Probability that a neighbour of an overhearing node, hidden from the
/// sender, stays quiet through the `2b` vulnerable window.
pub fn p_ni_oh(p_ctrl: f64, lambda_c: f64, control_time: f64, data_time: f64) -> Result<f64> {
    check_probability("p_ctrl", p_ctrl)?;
    let window = 2.0 * control_time;
    let silent = (-lambda_c * window).exp();
    let away = switch_noninterference(window, lambda_c, data_time)?;
    Ok(p_ctrl * silent + (1.0 - p_ctrl) * away)
}

/// Probability that a neighbour of a transmitter, hidden from its receiver,
/// stays quiet while the McCTS comes back (window `b`, McRTS already shields
/// on-channel neighbours).
pub fn p_ni_cts(p_ctrl: f64, lambda_c: f64, control_time: f64, data_time: f64) -> Result<f64> {
    check_probability("p_ctrl", p_ctrl)?;
    if !(lambda_c >= 0.0) {
        return Err(ModelError::Domain(format!("rate must be non-negative, got {lambda_c}")));
    }
    if !(data_time > 0.0) || !(control_time >= 0.0) || 2.0 * control_time >= data_time {
        return Err(ModelError::Domain(format!(
            "need 0 ≤ 2b < T_d, got b={control_time}, T_d={data_time}"
        )));
    }
    let r = control_time / data_time;
    let z = lambda_c * control_time;
    let bracket = 1.0 + r - r * phi(z) - (-z).exp();
    Ok((1.0 - p_ctrl) * (1.0 - r * bracket) + p_ctrl)
}

/// Closed-form single-hop `p_ctrl`, `λ_c` and `λ_w`; `None` past the stability limit.
pub fn single_hop_closed_form(packet_rate: f64, data_time: f64) -> Option<SingleHopClosedForm> {
    let x = packet_rate * data_time;
    let disc = 1.0 + x * (x - 6.0);
    if disc < 0.0 || x <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    Some(SingleHopClosedForm {
        p_ctrl: 0.5 * (1.0 - x + root),
        lambda_c: 0.5 * ((1.0 - root) / (packet_rate * data_time * data_time) - 3.0 / data_time),
        lambda_w: (1.0 - root) / data_time - packet_rate,
    })
}

/// Iterate in dimensionless form: rates are multiplied by `T_d`.
#[derive(Debug, Clone, Copy)]
struct Iterate {
    p_ctrl: f64,
    p_oh: f64,
    p_succ: f64,
    load_c: f64,
    load_cts: f64,
}

impl Iterate {
    fn residual(&self, other: &Iterate) -> f64 {
        [
            self.p_ctrl - other.p_ctrl,
            self.p_oh - other.p_oh,
            self.p_succ - other.p_succ,
            self.load_c - other.load_c,
            self.load_cts - other.load_cts,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    }

    fn blend(&self, next: &Iterate, alpha: f64) -> Iterate {
        let mix = |a: f64, b: f64| (1.0 - alpha) * a + alpha * b;
        Iterate {
            p_ctrl: mix(self.p_ctrl, next.p_ctrl),
            p_oh: mix(self.p_oh, next.p_oh),
            p_succ: mix(self.p_succ, next.p_succ),
            load_c: mix(self.load_c, next.load_c),
            load_cts: mix(self.load_cts, next.load_cts),
        }
    }
}

struct FixedPointMap {
    load: f64,
    hidden: f64,
    single_hop: bool,
    control_time: f64,
    data_time: f64,
}

impl FixedPointMap {
    fn interference(&self, p_ctrl: f64, lambda_c: f64) -> Result<(f64, f64)> {
        if self.single_hop {
            return Ok((1.0, 1.0));
        }
        let p = p_ctrl.clamp(0.0, 1.0);
        Ok((
            p_ni_oh(p, lambda_c, self.control_time, self.data_time)?,
            p_ni_cts(p, lambda_c, self.control_time, self.data_time)?,
        ))
    }

    fn apply(&self, x: &Iterate) -> Result<(Iterate, f64, f64)> {
        let lambda_c = x.load_c / self.data_time;
        let (ni_oh, ni_cts) = self.interference(x.p_ctrl, lambda_c)?;
        let p_oh = x.p_ctrl * (-self.hidden * (1.0 - ni_oh)).exp();
        let p_succ = p_oh * (-self.hidden * (1.0 - ni_cts)).exp();
        let denom = x.p_ctrl * p_succ;
        let load_c = self.load * (1.0 + p_oh) / denom;
        let load_cts = self.load * p_oh / denom;
        let next = Iterate {
            p_ctrl: 1.0 - self.load - load_cts,
            p_oh,
            p_succ,
            load_c,
            load_cts,
        };
        Ok((next, ni_oh, ni_cts))
    }

    fn state(&self, x: &Iterate, iterations: usize) -> Result<FixedPointState> {
        let lambda_probe = x.load_c / self.data_time;
        let (ni_oh, ni_cts) = self.interference(x.p_ctrl, lambda_probe)?;
        let p_oh = x.p_ctrl * (-self.hidden * (1.0 - ni_oh)).exp();
        let p_succ = p_oh * (-self.hidden * (1.0 - ni_cts)).exp();
        let lambda = self.load / self.data_time;
        let lambda_rts = lambda / (x.p_ctrl * p_succ);
        let lambda_cts = lambda * p_oh / (x.p_ctrl * p_succ);
        Ok(FixedPointState {
            p_ctrl: x.p_ctrl,
            p_oh,
            p_succ,
            lambda_c: lambda_rts + lambda_cts,
            lambda_rts,
            lambda_cts,
            p_ni_oh: ni_oh,
            p_ni_cts: ni_cts,
            iterations,
        })
    }

    fn unstable(&self, reason: String, x: &Iterate, iterations: usize) -> ModelError {
        let last = FixedPointState {
            p_ctrl: x.p_ctrl,
            p_oh: x.p_oh,
            p_succ: x.p_succ,
            lambda_c: x.load_c / self.data_time,
            lambda_rts: (x.load_c - x.load_cts) / self.data_time,
            lambda_cts: x.load_cts / self.data_time,
            p_ni_oh: f64::NAN,
            p_ni_cts: f64::NAN,
            iterations,
        };
        ModelError::Unstable {
            reason,
            last: Some(Box::new(last)),
        }
    }
}

/// Solves the coupled control-channel equations by damped Picard iteration.
pub fn solve_fixed_point(
    params: &ModelParams,
    geom: &NeighborConstants,
    opts: &SolverOptions,
) -> Result<FixedPointState> {
    params.validate()?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(ModelError::Domain(format!("damping must be in (0, 1], got {}", opts.damping)));
    }
    let load = params.load();
    let map = FixedPointMap {
        load,
        hidden: geom.excl_given_neighbor * params.node_density,
        single_hop: params.hop_mode == HopMode::SingleHop,
        control_time: params.control_time,
        data_time: params.data_time,
    };

    let p0 = (1.0 - 2.0 * load).max(0.05);
    let mut x = Iterate {
        p_ctrl: p0,
        p_oh: p0,
        p_succ: p0,
        load_c: load * (1.0 + p0) / (p0 * p0),
        load_cts: load,
    };
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let (next, _, _) = map.apply(&x)?;
        if !(next.p_ctrl > 0.0) {
            return Err(map.unstable(
                format!("p_ctrl driven to {:.4} (load λT_d = {load:.4})", next.p_ctrl),
                &x,
                iter,
            ));
        }
        if !(next.p_succ > 1e-12) {
            return Err(map.unstable(
                format!("handshake success probability collapsed to {:.3e}", next.p_succ),
                &x,
                iter,
            ));
        }
        // a node cannot spend more than all of its control-channel time transmitting
        let airtime_share = next.load_c * params.control_time / params.data_time;
        if !(airtime_share < 1.0) {
            return Err(map.unstable(
                format!("control channel saturated: λ_c·b = {airtime_share:.3}"),
                &x,
                iter,
            ));
        }
        residual = x.residual(&next);
        if residual < opts.tol {
            return map.state(&x, iter);
        }
        x = x.blend(&next, opts.damping);
    }
    Err(ModelError::NoConvergence {
        iterations: opts.max_iter,
        residual,
        last: Box::new(map.state(&x, opts.max_iter)?),
    })
}

/// Decides whether the offered load admits a stable operating point.
pub fn stability_check(params: &ModelParams, geom: &NeighborConstants) -> StabilityVerdict {
    let load = params.load();
    if params.packet_rate == 0.0 {
        return StabilityVerdict {
            stable: true,
            discriminant: (params.hop_mode == HopMode::SingleHop).then_some(1.0),
            p_ctrl: Some(1.0),
            detail: "idle network: no traffic, p_ctrl = 1".into(),
        };
    }
    match params.hop_mode {
        HopMode::SingleHop => {
            let disc = 1.0 + load * (load - 6.0);
            if disc < 0.0 {
                return StabilityVerdict {
                    stable: false,
                    discriminant: Some(disc),
                    p_ctrl: None,
                    detail: format!("negative discriminant {disc:.4} at λT_d = {load:.4}"),
                };
            }
            let p = 0.5 * (1.0 - load + disc.sqrt());
            let stable = p > 0.0 && p < 1.0 && load < 1.0;
            StabilityVerdict {
                stable,
                discriminant: Some(disc),
                p_ctrl: Some(p),
                detail: if stable {
                    format!("stable at λT_d = {load:.4}")
                } else {
                    format!("p_ctrl = {p:.4} outside (0, 1)")
                },
            }
        }
        HopMode::MultiHop => match solve_fixed_point(params, geom, &SolverOptions::default()) {
            Ok(s) => StabilityVerdict {
                stable: s.p_ctrl > 0.0 && s.p_ctrl < 1.0,
                discriminant: None,
                p_ctrl: Some(s.p_ctrl),
                detail: format!("fixed point found after {} iterations", s.iterations),
            },
            Err(e) => StabilityVerdict {
                stable: false,
                discriminant: None,
                p_ctrl: None,
                detail: e.to_string(),
            },
        },
    }
}

/// Weight of the "missed while on the control channel" branch.
pub fn missed_weight(state: &FixedPointState, hop_mode: HopMode) -> f64 {
    if hop_mode == HopMode::SingleHop || 1.0 - state.p_oh < 1e-15 {
        return 0.0;
    }
    ((state.p_ctrl - state.p_oh) / (1.0 - state.p_oh)).clamp(0.0, 1.0)
}

/// Rate at which a node on the control channel leaves for a data channel.
pub fn departure_rate(state: &FixedPointState) -> f64 {
    state.lambda_rts * state.p_succ + state.lambda_cts
}

/// Probability that a node which has just overheard `x` is still on the
/// control channel when `y` speaks.
pub fn p_ctrl_star(state: &FixedPointState, data_time: f64, hop_mode: HopMode) -> Result<f64> {
    let w = missed_weight(state, hop_mode);
    let zc = state.lambda_c * data_time;
    let zw = departure_rate(state) * data_time;
    let num = w * zc * phi(zc + zw) + (1.0 - w) * phi_drop(zw, zc);
    let den = w * zc * phi(zc) + (1.0 - w) * one_minus_phi(zc);
    if den < 1e-12 {
        return Err(ModelError::Numeric(format!(
            "p_ctrl* normaliser {den:.3e} is too small to divide by"
        )));
    }
    let v = num / den;
    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
        return Err(ModelError::Numeric(format!("p_ctrl* = {v} outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Runs the full chain and returns the cooperation availability.
pub fn p_co(params: &ModelParams, geom: &NeighborConstants, opts: &SolverOptions) -> Result<CoopReport> {
    if params.hop_mode == HopMode::SingleHop {
        let n = params.node_density;
        if (n - n.round()).abs() > 1e-9 || n < 4.0 {
            return Err(ModelError::Domain(format!(
                "single-hop analysis needs an integer node count ≥ 4, got {n}"
            )));
        }
    }
    let state = solve_fixed_point(params, geom, opts)?;
    let star = p_ctrl_star(&state, params.data_time, params.hop_mode)?;
    let weight = missed_weight(&state, params.hop_mode);
    let lambda_w = departure_rate(&state);
    let (xy_star, p) = match params.hop_mode {
        HopMode::SingleHop => {
            let xy = state.p_ctrl * star;
            let k = params.node_density.round() - 4.0;
            (xy, 1.0 - (1.0 - xy).powf(k))
        }
        HopMode::MultiHop => {
            let n = params.node_density;
            let xy = state.p_ctrl
                * star
                * (-2.0 * geom.excl_given_common * n * (1.0 - state.p_ni_oh)).exp();
            (xy, -(-geom.common * n * xy).exp_m1())
        }
    };
    Ok(CoopReport {
        p_ctrl_star: star,
        weight,
        lambda_w,
        p_co_xy_star: xy_star,
        p_co: p,
        state,
    })
}
