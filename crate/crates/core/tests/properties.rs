//! Property-based invariants across the public surface.

use proptest::prelude::*;

use ntnscp_core::closedform::{end_to_end_scp, moment_match, ScpModel};
use ntnscp_core::model::{Hop, Layer, Route, Scenario};
use ntnscp_core::specfun::{marcum_q1, regularized_lower_gamma};

fn test_layer(eve_density: f64) -> Layer {
    Layer {
        id: "l".into(),
        alpha: 2.9,
        eve_density,
        tx_power: 1.0,
        noise_power: 1e-6,
        k_db_mean: 7.0,
        k_db_var: 4.0,
        link_distance_range: (1e3, 50e3),
    }
}

fn hop(distance: f64, k_factor: f64) -> Hop {
    Hop {
        layer_id: "l".into(),
        distance,
        k_factor,
    }
}

proptest! {
    #[test]
    fn marcum_is_a_probability(a in 0.0..30.0f64, b in 0.0..30.0f64) {
        let v = marcum_q1(a, b).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn marcum_monotone_in_threshold(a in 0.0..20.0f64, b in 0.0..20.0f64, db in 0.0..5.0f64) {
        let lo = marcum_q1(a, b).unwrap();
        let hi = marcum_q1(a, b + db).unwrap();
        prop_assert!(hi <= lo + 1e-10);
    }

    #[test]
    fn lower_gamma_monotone(shape in 0.1..30.0f64, x in 0.0..50.0f64, dx in 0.0..10.0f64) {
        let lo = regularized_lower_gamma(shape, x).unwrap();
        let hi = regularized_lower_gamma(shape, x + dx).unwrap();
        prop_assert!(hi + 1e-13 >= lo);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn surrogate_mean_equals_hop_count(
        ks in prop::collection::vec(0.0..40.0f64, 1..8)
    ) {
        let hops: Vec<Hop> = ks.iter().map(|&k| hop(10e3, k)).collect();
        let s = moment_match(&hops).unwrap();
        let count = hops.len() as f64;
        prop_assert!((s.shape * s.scale - count).abs() < 1e-10 * count);
        prop_assert!(s.shape > 0.0 && s.scale > 0.0);
    }

    #[test]
    fn exponent_linear_in_density(
        ks in prop::collection::vec(0.01..30.0f64, 1..5),
        ds in prop::collection::vec(2e3..40e3f64, 1..5),
        scale in 1.5..20.0f64,
    ) {
        let hops: Vec<Hop> = ks.iter().zip(&ds).map(|(&k, &d)| hop(d, k)).collect();
        if hops.is_empty() {
            return Ok(());
        }
        let route = Route { hops };
        for model in ScpModel::ALL {
            let base = Scenario {
                layers: vec![test_layer(1e-11)],
                route: route.clone(),
                seed: 0,
            };
            let scaled = Scenario {
                layers: vec![test_layer(1e-11 * scale)],
                route: route.clone(),
                seed: 0,
            };
            let e1 = -end_to_end_scp(model, &base).unwrap().ln();
            let e2 = -end_to_end_scp(model, &scaled).unwrap().ln();
            prop_assert!(
                (e2 - scale * e1).abs() <= 1e-9 * e2.abs().max(1e-12),
                "{:?}: {} vs {}", model, e2, scale * e1
            );
        }
    }

    #[test]
    fn route_grouping_partitions_hops(
        picks in prop::collection::vec(0usize..3, 1..10),
    ) {
        let layers = vec![
            Layer { id: "a".into(), ..test_layer(0.0) },
            Layer { id: "b".into(), ..test_layer(0.0) },
            Layer { id: "c".into(), ..test_layer(0.0) },
        ];
        let names = ["a", "b", "c"];
        let hops: Vec<Hop> = picks
            .iter()
            .map(|&i| Hop { layer_id: names[i].into(), distance: 5e3, k_factor: 1.0 })
            .collect();
        let scenario = Scenario {
            layers,
            route: Route { hops: hops.clone() },
            seed: 0,
        };
        let total: usize = scenario.hops_by_layer().iter().map(|(_, h)| h.len()).sum();
        prop_assert_eq!(total, hops.len());
    }
}
