//! Splitting a fixed bandwidth between one control channel and `m` equal
//! data channels, and searching the ratio `σ = w_c / w_d` that maximises
//! `p_co`.
//!
//! Units: bandwidths in bits/s, frame sizes in bytes, times in seconds.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{p_co, HopMode, ModelParams, SolverOptions};
use crate::error::{ModelError, Result};
use crate::geometry::NeighborConstants;

/// Curves whose spread is below this are reported as flat.
pub const FLAT_CURVE_SPREAD: f64 = 1e-12;

/// Noise band used by [`is_unimodal`] in the default checks.
pub const UNIMODAL_NOISE: f64 = 1e-6;

const GOLDEN_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationScheme {
    pub data_channels: usize,
    pub sigma: f64,
    pub control_bw: f64,
    pub data_bw: f64,
    pub control_time: f64,
    pub data_time: f64,
}

impl AllocationScheme {
    /// `σ` recovered from the timings: `T_d·l_c / (b·L)`.
    pub fn recovered_sigma(&self, data_bytes: f64, control_bytes: f64) -> f64 {
        self.data_time * control_bytes / (self.control_time * data_bytes)
    }

    pub fn total_bw(&self) -> f64 {
        self.control_bw + self.data_channels as f64 * self.data_bw
    }
}

/// Derives per-channel bandwidths and frame airtimes for scheme `(m, σ)`.
pub fn derive_timings(
    total_bw: f64,
    data_channels: usize,
    sigma: f64,
    data_bytes: f64,
    control_bytes: f64,
) -> Result<AllocationScheme> {
    if !(total_bw > 0.0) || !total_bw.is_finite() {
        return Err(ModelError::Domain(format!("total bandwidth must be positive, got {total_bw}")));
    }
    if data_channels == 0 {
        return Err(ModelError::Domain("need at least one data channel".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(ModelError::Domain(format!("σ must be positive, got {sigma}")));
    }
    if !(data_bytes > 0.0) || !(control_bytes > 0.0) {
        return Err(ModelError::Domain("frame sizes must be positive".into()));
    }
    let data_bw = total_bw / (sigma + data_channels as f64);
    let control_bw = sigma * data_bw;
    Ok(AllocationScheme {
        data_channels,
        sigma,
        control_bw,
        data_bw,
        control_time: 8.0 * control_bytes / control_bw,
        data_time: 8.0 * data_bytes / data_bw,
    })
}

/// Fixed inputs of a bandwidth study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthProblem {
    pub total_bw: f64,
    pub data_bytes: f64,
    pub control_bytes: f64,
    pub node_density: f64,
    pub packet_rate: f64,
    pub hop_mode: HopMode,
}

impl BandwidthProblem {
    pub fn params(&self, scheme: &AllocationScheme) -> ModelParams {
        ModelParams::new(
            self.hop_mode,
            self.node_density,
            self.packet_rate,
            scheme.data_time,
            scheme.control_time,
        )
    }

    /// `p_co` at `(m, σ)`, or `None` where the analysis has no stable solution.
    pub fn evaluate(&self, data_channels: usize, sigma: f64, geom: &NeighborConstants) -> Result<Option<f64>> {
        let scheme = derive_timings(self.total_bw, data_channels, sigma, self.data_bytes, self.control_bytes)?;
        let params = self.params(&scheme);
        if params.validate().is_err() {
            return Ok(None);
        }
        match p_co(&params, geom, &SolverOptions::default()) {
            Ok(r) => Ok(Some(r.p_co)),
            Err(ModelError::Unstable { .. } | ModelError::NoConvergence { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaSweep {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for SigmaSweep {
    fn default() -> Self {
        Self {
            min: 0.2,
            max: 3.0,
            step: 0.05,
        }
    }
}

impl SigmaSweep {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0) || !(self.max >= self.min) || !(self.step > 0.0) {
            return Err(ModelError::Domain(format!(
                "invalid σ sweep {}:{}:{}",
                self.min, self.max, self.step
            )));
        }
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| self.min + k as f64 * self.step).collect())
    }

    /// Parses `min:max:step`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || ModelError::Domain(format!("σ sweep must look like min:max:step, got {spec:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let sweep = Self {
            min: num(parts[0])?,
            max: num(parts[1])?,
            step: num(parts[2])?,
        };
        sweep.grid()?;
        Ok(sweep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub data_channels: usize,
    pub sigma_star: f64,
    pub p_co_max: f64,
    /// `(σ, p_co)` samples in increasing `σ`; `None` marks an unstable point.
    pub curve: Vec<(f64, Option<f64>)>,
    pub flat: bool,
}

impl OptimizationResult {
    pub fn stable_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.curve.iter().filter_map(|&(s, p)| p.map(|p| (s, p)))
    }
}

/// True if, once the curve has fallen more than `2·noise` below its running
/// maximum, it never rises more than `noise` above its subsequent minimum.
pub fn is_unimodal(values: &[f64], noise: f64) -> bool {
    let mut best = f64::NEG_INFINITY;
    let mut floor: Option<f64> = None;
    for &v in values {
        match floor {
            Some(lowest) => {
                if v > lowest + noise {
                    return false;
                }
                floor = Some(lowest.min(v));
            }
            None if v >= best => best = v,
            None if v < best - 2.0 * noise => floor = Some(v),
            None => {}
        }
    }
    true
}

fn golden_section<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid search over `σ` followed by one golden-section pass around the best sample.
pub fn optimize_sigma(
    problem: &BandwidthProblem,
    data_channels: usize,
    sweep: &SigmaSweep,
    geom: &NeighborConstants,
) -> Result<OptimizationResult> {
    let grid = sweep.grid()?;
    let values = grid
        .par_iter()
        .map(|&s| problem.evaluate(data_channels, s, geom))
        .collect::<Result<Vec<_>>>()?;
    let mut curve: Vec<(f64, Option<f64>)> = grid.iter().copied().zip(values).collect();

    let stable: Vec<(usize, f64)> = curve
        .iter()
        .enumerate()
        .filter_map(|(k, &(_, p))| p.map(|p| (k, p)))
        .collect();
    if stable.is_empty() {
        return Err(ModelError::Unstable {
            reason: format!(
                "every σ in [{}, {}] is unstable for m = {data_channels}",
                sweep.min, sweep.max
            ),
            last: None,
        });
    }
    let (lo_v, hi_v) = stable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, p)| (lo.min(p), hi.max(p)));
    if hi_v - lo_v < FLAT_CURVE_SPREAD {
        let mid = stable[stable.len() / 2];
        return Ok(OptimizationResult {
            data_channels,
            sigma_star: curve[mid.0].0,
            p_co_max: hi_v,
            curve,
            flat: true,
        });
    }
    let (best_idx, best_p) = stable
        .iter()
        .copied()
        .fold((usize::MAX, f64::NEG_INFINITY), |acc, (k, p)| if p > acc.1 { (k, p) } else { acc });

    let lo = if best_idx > 0 && curve[best_idx - 1].1.is_some() {
        curve[best_idx - 1].0
    } else {
        curve[best_idx].0
    };
    let hi = if best_idx + 1 < curve.len() && curve[best_idx + 1].1.is_some() {
        curve[best_idx + 1].0
    } else {
        curve[best_idx].0
    };
    let objective = |s: f64| {
        problem
            .evaluate(data_channels, s, geom)
            .ok()
            .flatten()
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (mut sigma_star, mut p_max) = (curve[best_idx].0, best_p);
    if hi > lo {
        let (s, v) = golden_section(objective, lo, hi, GOLDEN_TOL);
        if v > p_max {
            sigma_star = s;
            p_max = v;
            let at = curve.partition_point(|&(x, _)| x < s);
            curve.insert(at, (s, Some(v)));
        }
    }
    Ok(OptimizationResult {
        data_channels,
        sigma_star,
        p_co_max: p_max,
        curve,
        flat: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaStarTable {
    pub data_channels: Vec<usize>,
    /// `(n, λ)` per column.
    pub scenarios: Vec<(f64, f64)>,
    /// `cells[row = m index][column = scenario index]`; `None` where no σ was stable.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl SigmaStarTable {
    pub fn column(&self, scenario: usize) -> Vec<Option<f64>> {
        self.cells.iter().map(|row| row[scenario]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m");
        for (n, l) in &self.scenarios {
            out.push_str(&format!(",sigma_star_n{n}_lambda{l}"));
        }
        out.push('\n');
        for (m, row) in self.data_channels.iter().zip(&self.cells) {
            out.push_str(&m.to_string());
            for cell in row {
                out.push(',');
                if let Some(v) = cell {
                    out.push_str(&format!("{v:.4}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `σ*` for every `(m, scenario)` pair; unstable combinations are left empty.
pub fn sigma_star_table(
    base: &BandwidthProblem,
    data_channels: &[usize],
    scenarios: &[(f64, f64)],
    sweep: &SigmaSweep,
    geom: &NeighborConstants,
) -> Result<SigmaStarTable> {
    if data_channels.is_empty() || scenarios.is_empty() {
        return Err(ModelError::Domain("σ* table needs at least one m and one scenario".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..data_channels.len())
        .flat_map(|i| (0..scenarios.len()).map(move |j| (i, j)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (n, lambda) = scenarios[j];
            let problem = BandwidthProblem {
                node_density: n,
                packet_rate: lambda,
                ..*base
            };
            match optimize_sigma(&problem, data_channels[i], sweep, geom) {
                Ok(r) => Ok(Some(r.sigma_star)),
                Err(ModelError::Unstable { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = results.chunks(scenarios.len()).map(|c| c.to_vec()).collect();
    Ok(SigmaStarTable {
        data_channels: data_channels.to_vec(),
        scenarios: scenarios.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_split() {
        let s = derive_timings(40e6, 1, 1.0, 100.0, 100.0).unwrap();
        assert!((s.control_bw - 20e6).abs() < 1e-6);
        assert!((s.data_bw - 20e6).abs() < 1e-6);
        assert!((s.control_time - s.data_time).abs() < 1e-18);
    }

    #[test]
    fn five_channel_split() {
        let s = derive_timings(40e6, 5, 1.15, 2000.0, 34.0).unwrap();
        let wd = 40e6 / 6.15;
        assert!((s.data_bw - wd).abs() < 1e-6);
        assert!((s.data_time - 16000.0 / wd).abs() < 1e-15);
        assert!((s.control_time - 272.0 / (1.15 * wd)).abs() < 1e-15);
        assert!((s.total_bw() - 40e6).abs() / 40e6 < 1e-9);
        assert!((s.recovered_sigma(2000.0, 34.0) - 1.15).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_schemes() {
        assert!(derive_timings(0.0, 1, 1.0, 1.0, 1.0).is_err());
        assert!(derive_timings(1e6, 0, 1.0, 1.0, 1.0).is_err());
        assert!(derive_timings(1e6, 1, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sweep_parsing() {
        let s = SigmaSweep::parse("0.2:3.0:0.05").unwrap();
        let g = s.grid().unwrap();
        assert_eq!(g.len(), 57);
        assert!((g[56] - 3.0).abs() < 1e-12);
        assert!(SigmaSweep::parse("1:2").is_err());
        assert!(SigmaSweep::parse("2:1:0.1").is_err());
        assert!(SigmaSweep::parse("a:b:c").is_err());
    }

    #[test]
    fn unimodality_detector() {
        assert!(is_unimodal(&[0.1, 0.5, 0.9, 0.7, 0.2], 1e-6));
        assert!(is_unimodal(&[0.1, 0.2, 0.3], 1e-6));
        assert!(!is_unimodal(&[0.1, 0.9, 0.5, 0.8], 1e-6));
        // wiggles inside the noise band are tolerated
        assert!(is_unimodal(&[0.5, 0.9, 0.9 - 1e-7, 0.9, 0.4], 1e-6));
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_section(|x| -(x - 0.37) * (x - 0.37), 0.0, 1.0, 1e-6);
        assert!((x - 0.37).abs() < 1e-5);
        assert!(v <= 0.0);
    }

    #[test]
    fn flat_curve_reports_midpoint() {
        let problem = BandwidthProblem {
            total_bw: 40e6,
            data_bytes: 2000.0,
            control_bytes: 34.0,
            node_density: 6.0,
            packet_rate: 1e-9,
            hop_mode: HopMode::MultiHop,
        };
        let sweep = SigmaSweep::default();
        let geom = NeighborConstants::standard();
        let r = optimize_sigma(&problem, 3, &sweep, &geom).unwrap();
        assert!(r.flat);
        let g = sweep.grid().unwrap();
        assert!((r.sigma_star - g[g.len() / 2]).abs() < 1e-12);
        // idle limit: every common neighbour is on the control channel
        let idle = 1.0 - (-geom.common * problem.node_density).exp();
        assert!((r.p_co_max - idle).abs() < 1e-6, "{}", r.p_co_max);
    }
}
