use dish_sim::{generate_topology, split_seed, SimError, Topology, TopologyKind};
use proptest::prelude::*;

#[test]
fn node_count_matches_poisson_mean() {
    // 1500² / 250² = 36 range-squares, density 10 → mean 360 nodes
    let seeds = 40;
    let total: usize = (0..seeds).map(|s| generate_topology(1500.0, 10.0, 250.0, split_seed(11, s)).unwrap().len()).sum();
    let mean = total as f64 / seeds as f64;
    assert!((mean - 360.0).abs() / 360.0 < 0.05, "mean node count {mean}");
}

#[test]
fn generation_is_deterministic_and_connected() {
    let a = generate_topology(1500.0, 8.0, 250.0, 42).unwrap();
    let b = generate_topology(1500.0, 8.0, 250.0, 42).unwrap();
    let c = generate_topology(1500.0, 8.0, 250.0, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.positions(), c.positions());
    assert!(a.is_connected());
    assert_eq!(a.kind(), TopologyKind::MultiHop);
    // mean degree of a Poisson field is π·n, lower near the border
    let d = a.mean_degree();
    assert!(d > 0.6 * std::f64::consts::PI * 8.0 && d < std::f64::consts::PI * 8.0, "mean degree {d}");
}

#[test]
fn sparse_field_reports_disconnection() {
    let e = generate_topology(1500.0, 0.05, 250.0, 1).unwrap_err();
    assert!(matches!(e, SimError::Disconnected { attempts: 100, .. }));
    assert!(e.to_string().contains("higher density"));
    assert!(generate_topology(1500.0, 0.0, 250.0, 1).is_err());
}

#[test]
fn single_hop_is_a_complete_graph() {
    let t = Topology::single_hop(8).unwrap();
    assert_eq!(t.len(), 8);
    for v in 0..8 {
        assert_eq!(t.neighbors(v).len(), 7);
    }
    assert!(Topology::single_hop(1).is_err());
}

proptest! {
    #[test]
    fn adjacency_is_the_unit_disk_relation(pts in prop::collection::vec((0.0f64..1000.0, 0.0f64..1000.0), 2..40)) {
        let positions: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let t = Topology::from_positions(positions.clone(), 250.0);
        for i in 0..positions.len() {
            for j in 0..positions.len() {
                let d = ((positions[i][0] - positions[j][0]).powi(2) + (positions[i][1] - positions[j][1]).powi(2)).sqrt();
                let expect = i != j && d <= 250.0;
                prop_assert_eq!(t.adjacent(i, j), expect);
                prop_assert_eq!(t.adjacent(i, j), t.adjacent(j, i));
                prop_assert_eq!(t.neighbors(i).contains(&j), expect);
            }
        }
    }
}
