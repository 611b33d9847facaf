//! Two-disk intersection geometry and the neighbour-count coefficients.
//!
//! All three coefficients are expectations of areas over uniformly placed
//! nodes, expressed as multiples of `R²` so that multiplying by the node
//! density `n` (nodes per `R²`) gives an expected neighbour count.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::quadrature::{adaptive_simpson, MonotoneCubic};

/// Outer grid size for the nested integral behind [`NeighborConstants::excl_given_common`].
pub const COMMON_GRID_POINTS: usize = 2048;

/// Default quadrature tolerance for [`NeighborConstants::standard`].
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;

/// Two equal disks of radius `radius` whose centres are `separation` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPair {
    separation: f64,
    radius: f64,
}

impl DiskPair {
    pub fn new(separation: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(ModelError::Domain(format!("radius must be positive, got {radius}")));
        }
        if !(separation >= 0.0) {
            return Err(ModelError::Domain(format!(
                "separation must be non-negative, got {separation}"
            )));
        }
        if separation > 2.0 * radius {
            return Err(ModelError::Domain(format!(
                "separation {separation} exceeds twice the radius {radius}"
            )));
        }
        Ok(Self { separation, radius })
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// True when the two centres are within communication range of each other.
    pub fn are_neighbors(&self) -> bool {
        self.separation <= self.radius
    }
}

/// Area of the lens shared by the two disks.
pub fn lens_area(pair: DiskPair) -> f64 {
    let r = pair.radius;
    let g = pair.separation;
    let half = g / (2.0 * r);
    let area = 2.0 * r * r * half.min(1.0).acos() - g * (r * r - g * g / 4.0).max(0.0).sqrt();
    area.max(0.0)
}

/// Part of one disk not covered by the other.
pub fn crescent_area(pair: DiskPair) -> f64 {
    PI * pair.radius * pair.radius - lens_area(pair)
}

/// `E[p^K]` for `K ~ Poisson(mean_count)`, i.e. `exp(-(1-p)·mean_count)`.
pub fn poisson_power_expectation(p: f64, mean_count: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ModelError::Domain(format!("probability must be in [0, 1], got {p}")));
    }
    if !(mean_count >= 0.0) || !mean_count.is_finite() {
        return Err(ModelError::Domain(format!(
            "mean count must be finite and non-negative, got {mean_count}"
        )));
    }
    Ok((-(1.0 - p) * mean_count).exp())
}

/// Expected neighbour-set sizes as coefficients of the density `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeighborConstants {
    /// `E[K_{v\i} | v ∈ N_i] / n`: neighbours of `v` that are not neighbours of `i`.
    pub excl_given_neighbor: f64,
    /// `E[K_{v\i} | v ∈ N_ij] / n`: the same count when `v` is a common neighbour of `i` and `j`.
    pub excl_given_common: f64,
    /// `E[K_ij] / n`: common neighbours of two neighbouring nodes.
    pub common: f64,
}

impl NeighborConstants {
    /// Coefficients computed once per process at [`DEFAULT_QUADRATURE_TOL`].
    pub fn standard() -> NeighborConstants {
        static CACHE: OnceLock<NeighborConstants> = OnceLock::new();
        *CACHE.get_or_init(|| {
            neighbor_constants(DEFAULT_QUADRATURE_TOL)
                .expect("neighbour constants converge at the default tolerance")
        })
    }

    /// All-zero coefficients: no hidden interferers and no common neighbours.
    pub fn zero() -> NeighborConstants {
        NeighborConstants {
            excl_given_neighbor: 0.0,
            excl_given_common: 0.0,
            common: 0.0,
        }
    }
}

fn unit_pair(sep: f64) -> DiskPair {
    DiskPair {
        separation: sep.clamp(0.0, 2.0),
        radius: 1.0,
    }
}

/// Mean crescent area over a neighbour drawn uniformly from a unit disk
/// (distance pdf `2r`).
fn excl_given_neighbor(tol: f64) -> Result<f64> {
    adaptive_simpson(|r| crescent_area(unit_pair(r)) * 2.0 * r, 0.0, 1.0, tol)
}

/// `E[A_{v\i} | v ∈ N_{i\j}]` for `‖ij‖ = r` on unit disks.
fn excl_given_outside(r: f64, tol: f64) -> Result<f64> {
    let denom = crescent_area(unit_pair(r));
    let integrand = |r2: f64| {
        if r2 <= 0.0 {
            return 0.0;
        }
        let cos_theta = ((r2 * r2 + r * r - 1.0) / (2.0 * r2 * r)).clamp(-1.0, 1.0);
        2.0 * r2 * crescent_area(unit_pair(r2)) / denom * (PI - cos_theta.acos())
    };
    adaptive_simpson(integrand, 1.0 - r, 1.0, tol)
}

/// Mean of `A_{v\i}` over `v` uniform in the lens of `i` and `j` at `‖ij‖ = r`.
fn lens_conditional(r: f64, overall: f64, tol: f64) -> Result<f64> {
    if r <= 0.0 {
        return Ok(overall);
    }
    let share = lens_area(unit_pair(r)) / PI;
    let outside = excl_given_outside(r, tol)?;
    Ok(overall / share - (1.0 / share - 1.0) * outside)
}

/// Evaluates the three neighbour-count coefficients by adaptive quadrature.
pub fn neighbor_constants(quadrature_tol: f64) -> Result<NeighborConstants> {
    if !(quadrature_tol > 0.0) {
        return Err(ModelError::Domain(format!(
            "quadrature tolerance must be positive, got {quadrature_tol}"
        )));
    }
    let a = excl_given_neighbor(quadrature_tol)?;

    let last = (COMMON_GRID_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..COMMON_GRID_POINTS).map(|k| k as f64 / last).collect();
    let ys = xs
        .par_iter()
        .map(|&r| lens_conditional(r, a, quadrature_tol))
        .collect::<Result<Vec<f64>>>()?;
    let m = MonotoneCubic::new(xs, ys)?;
    let b = adaptive_simpson(|r| m.eval(r) * 2.0 * r, 0.0, 1.0, quadrature_tol)?;

    Ok(NeighborConstants {
        excl_given_neighbor: a,
        excl_given_common: b,
        common: PI - a,
    })
}
