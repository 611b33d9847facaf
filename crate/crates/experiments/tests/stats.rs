use dish_experiments::{
    control_send_gaps, ks_exponential, linearity_report, paired_linearity, poissonness_check, ExperimentError,
};
use dish_sim::{run, SimConfig, Topology};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

#[test]
fn collinear_input_has_unit_r2() {
    let x = [0.1, 0.4, 0.5, 0.9];
    let y: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v).collect();
    let fit = linearity_report(&x, &y).unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-12);
    assert!((fit.intercept - 1.0).abs() < 1e-12);
    assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn constant_response_is_flagged() {
    let fit = linearity_report(&[0.1, 0.2, 0.3], &[0.5, 0.5, 0.5]).unwrap();
    assert_eq!(fit.slope, 0.0);
    assert_eq!(fit.r_squared, None);
    assert!(fit.constant_response);
}

#[test]
fn too_few_points_is_an_error() {
    let err = linearity_report(&[0.1, 0.2], &[1.0, 2.0]).unwrap_err();
    assert!(matches!(err, ExperimentError::Insufficient(_)));
    assert!(linearity_report(&[0.5; 4], &[1.0, 2.0, 3.0, 4.0]).is_err());
}

#[test]
fn paired_fit_skips_missing_rows() {
    let x = [Some(0.1), None, Some(0.2), Some(0.3), Some(0.4)];
    let y = [Some(1.0), Some(9.0), Some(2.0), None, Some(4.0)];
    let fit = paired_linearity(&x, &y).unwrap();
    assert_eq!(fit.points, 3);
    assert!((fit.slope - 10.0).abs() < 1e-9);
}

#[test]
fn exponential_gaps_pass_ks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let exp = Exp::new(40.0).unwrap();
    let gaps: Vec<f64> = (0..2000).map(|_| exp.sample(&mut rng)).collect();
    let r = ks_exponential(&gaps).unwrap();
    assert!(r.passes_5pct, "{r:?}");
    assert!(r.p_value > 0.05);
    assert!((r.mean_gap - 0.025).abs() < 0.002);
}

#[test]
fn deterministic_gaps_fail_ks() {
    let r = ks_exponential(&vec![0.01; 500]).unwrap();
    assert!(!r.passes_5pct);
    assert!(r.statistic > 0.3);
    assert!(r.p_value < 1e-6);
}

#[test]
fn ks_needs_enough_samples() {
    assert!(matches!(ks_exponential(&[0.1; 5]), Err(ExperimentError::Insufficient(_))));
    assert!(matches!(poissonness_check(&[], 3), Err(ExperimentError::Insufficient(_))));
}

#[test]
fn control_stream_of_a_single_hop_run() {
    let topo = Topology::single_hop(8).unwrap();
    let cfg = SimConfig { packet_rate: 10.0, stop_after_packets: 4000, trace: true, ..SimConfig::default() };
    let out = run(&topo, &cfg).unwrap();
    let trace = out.trace.unwrap();
    let gaps = control_send_gaps(&trace, 8);
    assert!(gaps.len() > 1000);
    assert!(gaps.iter().all(|g| *g >= 0.0));
    let r = poissonness_check(&trace, 8).unwrap();
    assert_eq!(r.samples, gaps.len());
    assert!(r.statistic > 0.0 && r.statistic < 1.0);
    // Messages come at about 2λ per node while on the control channel.
    assert!(r.mean_gap > 0.02 && r.mean_gap < 0.1, "{r:?}");
}

proptest! {
    #[test]
    fn linear_data_is_recovered(
        slope in -5.0..5.0f64,
        intercept in -2.0..2.0f64,
        xs in prop::collection::btree_set(0i32..1000, 3..30),
    ) {
        prop_assume!(slope.abs() > 1e-3);
        let x: Vec<f64> = xs.into_iter().map(|v| v as f64 / 1000.0).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + intercept).collect();
        let fit = linearity_report(&x, &y).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-6 * (1.0 + slope.abs()));
        prop_assert!((fit.intercept - intercept).abs() < 1e-6 * (1.0 + intercept.abs() + slope.abs()));
        prop_assert!(fit.r_squared.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn r2_is_a_fraction(pairs in prop::collection::vec((0.0..1.0f64, -1.0..1.0f64), 3..40)) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Ok(fit) = linearity_report(&x, &y) {
            if let Some(r2) = fit.r_squared {
                prop_assert!((0.0..=1.0).contains(&r2));
            }
        }
    }

    #[test]
    fn ks_statistic_is_a_distance(gaps in prop::collection::vec(0.001..10.0f64, 20..200)) {
        let r = ks_exponential(&gaps).unwrap();
        prop_assert!(r.statistic > 0.0 && r.statistic <= 1.0);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }
}
