//! Sampling oracles for the geometric constants and non-interference probabilities.

use std::f64::consts::PI;

use dish_core::analytic::switch_noninterference;
use dish_core::{lens_area, p_ni_cts, p_ni_oh, DiskPair, NeighborConstants};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

const TD: f64 = 8e-3;
const B: f64 = 0.272e-3;

struct Estimate {
    mean: f64,
    stderr: f64,
}

fn estimate(samples: impl Iterator<Item = f64>) -> Estimate {
    let (mut n, mut sum, mut sq) = (0.0, 0.0, 0.0);
    for x in samples {
        n += 1.0;
        sum += x;
        sq += x * x;
    }
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0);
    Estimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

fn in_unit_disk(rng: &mut impl Rng) -> (f64, f64) {
    let r = rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    (r * t.cos(), r * t.sin())
}

fn lens(sep: f64) -> f64 {
    lens_area(DiskPair::new(sep.min(2.0), 1.0).unwrap())
}

fn assert_within_3_sigma(label: &str, est: &Estimate, value: f64) {
    let z = (est.mean - value).abs() / est.stderr;
    assert!(
        z < 3.0,
        "{label}: sampled {:.5} ± {:.5}, quadrature {value:.5} ({z:.1}σ)",
        est.mean,
        est.stderr
    );
}

#[test]
fn lens_area_matches_point_sampling() {
    // points uniform in the bounding square of the first disk
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000_000;
    let hits = (0..n)
        .filter(|_| {
            let x = 2.0 * rng.random::<f64>() - 1.0;
            let y = 2.0 * rng.random::<f64>() - 1.0;
            x * x + y * y <= 1.0 && (x - 0.5) * (x - 0.5) + y * y <= 1.0
        })
        .count();
    let sampled = 4.0 * hits as f64 / n as f64;
    assert!((sampled - lens(0.5)).abs() < 1.5e-3, "{sampled}");
    assert!((lens(0.5) - 2.15211).abs() < 1e-5);
}

#[test]
fn hidden_neighbour_coefficient_matches_sampling() {
    // i at the origin, v uniform in i's disk, u uniform in v's disk: π·Pr[u outside i's disk]
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let est = estimate((0..2_000_000).map(|_| {
        let (vx, vy) = in_unit_disk(&mut rng);
        let (ux, uy) = in_unit_disk(&mut rng);
        let (px, py) = (vx + ux, vy + uy);
        if px * px + py * py > 1.0 {
            PI
        } else {
            0.0
        }
    }));
    assert_within_3_sigma("E[K_v\\i | v in N_i]", &est, NeighborConstants::standard().excl_given_neighbor);
}

#[test]
fn common_neighbour_coefficient_matches_sampling() {
    // i at the origin, j uniform in i's disk, u uniform in i's disk: π·Pr[u inside j's disk]
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let est = estimate((0..2_000_000).map(|_| {
        let (jx, jy) = in_unit_disk(&mut rng);
        let (ux, uy) = in_unit_disk(&mut rng);
        if (ux - jx).powi(2) + (uy - jy).powi(2) <= 1.0 {
            PI
        } else {
            0.0
        }
    }));
    assert_within_3_sigma("E[K_ij]", &est, NeighborConstants::standard().common);
}

#[test]
fn hidden_neighbour_given_common_matches_sampling() {
    // j uniform in i's disk; v uniform in i's disk, kept only inside the lens of i and j and
    // reweighted by π / A_s(‖ij‖) so every j counts equally; then u uniform in v's disk.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let est = estimate((0..4_000_000).map(|_| {
        let (jx, jy) = in_unit_disk(&mut rng);
        let (vx, vy) = in_unit_disk(&mut rng);
        if (vx - jx).powi(2) + (vy - jy).powi(2) > 1.0 {
            return 0.0;
        }
        let weight = PI / lens((jx * jx + jy * jy).sqrt());
        let (ux, uy) = in_unit_disk(&mut rng);
        let (px, py) = (vx + ux, vy + uy);
        if px * px + py * py > 1.0 {
            PI * weight
        } else {
            0.0
        }
    }));
    assert_within_3_sigma("E[K_v\\i | v in N_ij]", &est, NeighborConstants::standard().excl_given_common);
}

/// Node on a data channel at the window start returns uniformly within `T_d`,
/// then its first transmission follows an exponential gap.
fn sample_switch_window(rng: &mut impl Rng, gap: &Exp<f64>, window: f64) -> bool {
    let back = TD * rng.random::<f64>();
    back > window || gap.sample(rng) > window - back
}

#[test]
fn switch_window_probability_matches_sampling() {
    let delta_t = TD / 2.0;
    let lambda_c = 1.0 / delta_t;
    let gap = Exp::new(lambda_c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let est = estimate((0..2_000_000).map(|_| sample_switch_window(&mut rng, &gap, delta_t) as u8 as f64));
    let value = switch_noninterference(delta_t, lambda_c, TD).unwrap();
    assert!((value - (0.5 + (1.0 - (-1f64).exp()) / 2.0)).abs() < 1e-12);
    assert_within_3_sigma("switch window", &est, value);
}

#[test]
fn overhearing_noninterference_matches_event_sampling() {
    let (p_ctrl, lambda_c) = (0.8, 50.0);
    let gap = Exp::new(lambda_c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let est = estimate((0..4_000_000).map(|_| {
        let ok = if rng.random::<f64>() < p_ctrl {
            // on the control channel: no transmission may start in [s_i − b, s_i + b]
            gap.sample(&mut rng) > 2.0 * B
        } else {
            sample_switch_window(&mut rng, &gap, 2.0 * B)
        };
        ok as u8 as f64
    }));
    let value = p_ni_oh(p_ctrl, lambda_c, B, TD).unwrap();
    assert!((est.mean - value).abs() < 1e-3, "{} vs {value}", est.mean);
    assert_within_3_sigma("p_ni_oh", &est, value);
}

#[test]
fn mccts_noninterference_matches_event_sampling() {
    let (p_ctrl, lambda_c) = (0.8, 50.0);
    let gap = Exp::new(lambda_c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let est = estimate((0..4_000_000).map(|_| {
        if rng.random::<f64>() < p_ctrl {
            // heard the McRTS, so it defers through the McCTS
            return 1.0;
        }
        // return time measured from s_j − b
        let back = TD * rng.random::<f64>();
        let ok = if back < B {
            // suppressed by the McRTS until s_j, then exposed for b
            gap.sample(&mut rng) > B
        } else if back < 2.0 * B {
            gap.sample(&mut rng) > 2.0 * B - back
        } else {
            true
        };
        ok as u8 as f64
    }));
    // The closed form reapplies the whole switch-window probability to a node already known to return
    // inside [s_j, s_j + b], an O((b/T_d)²) excess over this event model.
    let value = p_ni_cts(p_ctrl, lambda_c, B, TD).unwrap();
    assert!((est.mean - value).abs() < 1e-3, "{} vs {value}", est.mean);
}
