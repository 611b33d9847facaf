use dish_sim::{MsgKind, TraceEvent, TraceRecord};
use serde::Serialize;

use crate::error::{ExperimentError, Result};

/// Differences below this are treated as a constant series.
const SPREAD_EPS: f64 = 1e-12;

/// Stephens' 5% critical value for the modified KS statistic when the
/// exponential mean is estimated from the sample.
const KS_EXP_CRITICAL_5PCT: f64 = 1.094;

pub const MIN_KS_SAMPLES: usize = 20;

/// Mean and sample standard deviation of the present values.
pub fn mean_sd(values: impl IntoIterator<Item = Option<f64>>) -> (Option<f64>, Option<f64>) {
    let xs: Vec<f64> = values.into_iter().flatten().collect();
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.len() > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), sd)
}

/// Largest `|sim − analytic| / analytic` over cells where both are present.
pub fn max_relative_deviation(analytic: &[Option<f64>], sim: &[Option<f64>]) -> Option<f64> {
    analytic
        .iter()
        .zip(sim)
        .filter_map(|(a, s)| match (a, s) {
            (Some(a), Some(s)) if *a > 0.0 => Some((s - a).abs() / a),
            _ => None,
        })
        .reduce(f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `None` when the response is constant and R² is undefined.
    pub r_squared: Option<f64>,
    pub constant_response: bool,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linearity_report(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(ExperimentError::Insufficient(format!(
            "x has {} points but y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(ExperimentError::Insufficient(format!(
            "a linear fit needs at least 3 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(ExperimentError::Insufficient("fit input contains non-finite values".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= SPREAD_EPS * SPREAD_EPS * n {
        return Err(ExperimentError::Insufficient("the regressor is constant; slope is undefined".into()));
    }
    if syy <= SPREAD_EPS * SPREAD_EPS * n {
        return Ok(LinearFit { points: x.len(), slope: 0.0, intercept: my, r_squared: None, constant_response: true });
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        points: x.len(),
        slope,
        intercept: my - slope * mx,
        r_squared: Some((sxy * sxy / (sxx * syy)).min(1.0)),
        constant_response: false,
    })
}

/// Fit over the rows where both series are present.
pub fn paired_linearity(x: &[Option<f64>], y: &[Option<f64>]) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    linearity_report(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsReport {
    pub samples: usize,
    pub mean_gap: f64,
    /// Kolmogorov–Smirnov distance to the exponential with the sample mean.
    pub statistic: f64,
    /// Asymptotic Kolmogorov p-value, which ignores that the mean was estimated
    /// and is therefore conservative.
    pub p_value: f64,
    /// Stephens' modified statistic for an exponential with estimated mean.
    pub modified_statistic: f64,
    pub passes_5pct: bool,
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of positive gaps against an exponential law with matched mean.
pub fn ks_exponential(gaps: &[f64]) -> Result<KsReport> {
    if gaps.len() < MIN_KS_SAMPLES {
        return Err(ExperimentError::Insufficient(format!(
            "need at least {MIN_KS_SAMPLES} gaps, got {}",
            gaps.len()
        )));
    }
    if gaps.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(ExperimentError::Insufficient("gaps must be finite and nonnegative".into()));
    }
    let mut xs = gaps.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return Err(ExperimentError::Insufficient("every gap is zero".into()));
    }
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = -(-x / mean).exp_m1();
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    let p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * statistic);
    let modified_statistic = (statistic - 0.2 / n) * (sn + 0.26 + 0.5 / sn);
    Ok(KsReport {
        samples: xs.len(),
        mean_gap: mean,
        statistic,
        p_value,
        modified_statistic,
        passes_5pct: modified_statistic <= KS_EXP_CRITICAL_5PCT,
    })
}

/// Per-node gaps between successive channel-setup transmissions, measured in
/// time spent on the control channel only.
pub fn control_send_gaps(trace: &[TraceRecord], nodes: usize) -> Vec<f64> {
    let mut on_control = vec![true; nodes];
    let mut last_time = vec![0.0; nodes];
    let mut elapsed = vec![0.0; nodes];
    let mut seen = vec![false; nodes];
    let mut gaps = Vec::new();
    for r in trace {
        let v = r.node;
        if v >= nodes {
            continue;
        }
        if on_control[v] {
            elapsed[v] += r.time - last_time[v];
        }
        last_time[v] = r.time;
        match r.event {
            TraceEvent::ToData => on_control[v] = false,
            TraceEvent::ToControl => on_control[v] = true,
            TraceEvent::TxStart(k) if k.is_setup() && first_of_exchange(k) => {
                if seen[v] {
                    gaps.push(elapsed[v]);
                }
                seen[v] = true;
                elapsed[v] = 0.0;
            }
            _ => {}
        }
    }
    gaps
}

/// The aggregated stream counts one message per request or reply.
fn first_of_exchange(k: MsgKind) -> bool {
    matches!(k, MsgKind::Rts | MsgKind::Cts | MsgKind::Pra | MsgKind::Prb)
}

/// KS check of the Poisson assumption on a run's control-message stream.
pub fn poissonness_check(trace: &[TraceRecord], nodes: usize) -> Result<KsReport> {
    let gaps = control_send_gaps(trace, nodes);
    if gaps.len() < MIN_KS_SAMPLES {
        return Err(ExperimentError::Insufficient(format!(
            "trace yields {} control-message gaps; at least {MIN_KS_SAMPLES} are needed",
            gaps.len()
        )));
    }
    ks_exponential(&gaps)
}
