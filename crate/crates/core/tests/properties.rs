use proptest::prelude::*;

use uamsim::daa::{predict_pair, DaaConfig, FlightProfile4D, VehicleKind, Waypoint};
use uamsim::fmcw::{estimate_range_doppler, synthesize_beat, ChirpConfig, TargetEcho, Window};
use uamsim::graph::{arc_cost, AirspaceGraph, Arc, CostComponents, CostWeights, GraphDocument, NodeId};
use uamsim::link::{
    effective_cell_range, multi_link_availability, propagation_delay, range_factor, LinkTechnology, Platform,
};
use uamsim::route::constraints::{degrees_are_one, is_single_cycle, satisfies_flow_conservation, tour_indicators};
use uamsim::route::oracle::shortest_path_oracle;
use uamsim::route::{atsp_exact, atsp_heuristic, shortest_path, CostMatrix, PathQuery};

fn components() -> impl Strategy<Value = CostComponents> {
    (0.0..50.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..10.0f64).prop_map(|(d, n, r, t)| CostComponents {
        distance_km: d,
        nav_unreliability: n,
        collision_risk: r,
        threat_exposure: t,
    })
}

fn weights() -> impl Strategy<Value = CostWeights> {
    (0.1..5.0f64, 0.0..5.0f64, 0.0..5.0f64, 0.0..5.0f64)
        .prop_map(|(d, n, r, t)| CostWeights::new(d, n, r, t).unwrap())
}

/// Random simple digraph on `2..=max_n` nodes with positions.
fn graph(max_n: usize) -> impl Strategy<Value = AirspaceGraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((prop::bool::weighted(0.45), components()), n * n).prop_map(move |cells| {
            let arcs: Vec<Arc> = cells
                .into_iter()
                .enumerate()
                .filter(|(k, (on, _))| *on && k / n != k % n)
                .map(|(k, (_, c))| Arc::new(k / n, k % n, c))
                .collect();
            let positions = (0..n).map(|i| Some([i as f64 * 100.0, 0.5 * i as f64, 300.0])).collect();
            AirspaceGraph::with_positions(n, arcs, positions).unwrap()
        })
    })
}

fn complete_matrix(max_n: usize) -> impl Strategy<Value = CostMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.0..100.0f64, n * n).prop_map(move |v| {
            let mut m = CostMatrix::new(n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        m.set(i, j, v[i * n + j]);
                    }
                }
            }
            m
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sums_equal_arc_count(g in graph(9)) {
        let out: usize = g.nodes().map(|v| g.out_arcs(v).unwrap().count()).sum();
        let inc: usize = g.nodes().map(|v| g.in_arcs(v).unwrap().count()).sum();
        prop_assert_eq!(out, g.arcs().len());
        prop_assert_eq!(inc, g.arcs().len());
    }

    #[test]
    fn arc_cost_monotone(c in components(), w in weights(), field in 0usize..4, bump in 0.0..1.0f64) {
        let base = Arc::new(0, 1, c);
        let mut more = c;
        match field {
            0 => more.distance_km += bump,
            1 => more.nav_unreliability = (more.nav_unreliability + bump).min(1.0),
            2 => more.collision_risk = (more.collision_risk + bump).min(1.0),
            _ => more.threat_exposure += bump,
        }
        prop_assert!(arc_cost(&Arc::new(0, 1, more), &w) >= arc_cost(&base, &w));
    }

    #[test]
    fn graph_json_round_trip(g in graph(8)) {
        let text = serde_json::to_string(&g.to_document()).unwrap();
        let back = serde_json::from_str::<GraphDocument>(&text).unwrap().build().unwrap();
        prop_assert_eq!(back.node_count(), g.node_count());
        prop_assert_eq!(back.arcs(), g.arcs());
        for (a, b) in back.arcs().iter().zip(g.arcs()) {
            prop_assert_eq!(a.cost.distance_km.to_bits(), b.cost.distance_km.to_bits());
            prop_assert_eq!(a.cost.threat_exposure.to_bits(), b.cost.threat_exposure.to_bits());
        }
    }

    #[test]
    fn shortest_path_matches_oracle(g in graph(7), w in weights(), s in 0usize..7, d in 0usize..7) {
        let n = g.node_count();
        let (s, d) = (s % n, d % n);
        prop_assume!(s != d);
        let q = PathQuery::new(s, d, w);
        match (shortest_path(&g, &q), shortest_path_oracle(&g, &q)) {
            (Ok(p), Ok(o)) => {
                prop_assert!((p.total_cost - o.total_cost).abs() <= 1e-9 * (1.0 + o.total_cost));
                prop_assert!(satisfies_flow_conservation(&g, NodeId(s), NodeId(d), &p));
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "solver {:?} vs oracle {:?}", a, b),
        }
    }

    #[test]
    fn path_cost_scales_with_weights(g in graph(7), w in weights(), lambda in 0.01..100.0f64) {
        let d = g.node_count() - 1;
        let [wd, wn, wr, wt] = w.as_array();
        let scaled = CostWeights::new(wd * lambda, wn * lambda, wr * lambda, wt * lambda).unwrap();
        let base = shortest_path(&g, &PathQuery::new(0, d, w));
        let big = shortest_path(&g, &PathQuery::new(0, d, scaled));
        match (base, big) {
            (Ok(a), Ok(b)) => {
                prop_assert!((b.total_cost - lambda * a.total_cost).abs() <= 1e-9 * (1.0 + b.total_cost));
                // The path chosen under scaled weights is also optimal under the originals.
                let c: f64 = b.arcs.iter().map(|&(i, j)| arc_cost(g.arc(i, j).unwrap(), &w)).sum();
                prop_assert!((c - a.total_cost).abs() <= 1e-9 * (1.0 + c));
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn tours_are_single_cycles_and_heuristic_is_admissible(m in complete_matrix(8), seed in any::<u64>()) {
        let exact = atsp_exact(&m, 0).unwrap();
        let heur = atsp_heuristic(&m, 0, seed).unwrap();
        for t in [&exact, &heur] {
            let x = tour_indicators(m.size(), t);
            prop_assert!(degrees_are_one(&x));
            prop_assert!(is_single_cycle(&x));
            prop_assert_eq!(t.order[0], 0);
        }
        prop_assert!(heur.total_cost >= exact.total_cost - 1e-9);
    }

    #[test]
    fn tour_cost_scales(m in complete_matrix(7), lambda in 0.01..100.0f64) {
        let a = atsp_exact(&m, 0).unwrap();
        let b = atsp_exact(&m.scaled(lambda), 0).unwrap();
        prop_assert!((b.total_cost - lambda * a.total_cost).abs() <= 1e-9 * (1.0 + b.total_cost));
        prop_assert!((m.tour_cost(&b.order) - a.total_cost).abs() <= 1e-9 * (1.0 + a.total_cost));
    }

    #[test]
    fn range_factor_monotone(a in 0.0..40.0f64, step in 0.01..10.0f64, base in 1.0..500.0f64) {
        prop_assert!(range_factor(a + step) > range_factor(a));
        let tech = |backoff_db| LinkTechnology {
            name: "t".into(),
            base_cell_range_km: base,
            backoff_db,
            data_rate_kbps: 100.0,
            platform: Platform::Terrestrial,
            per_link_availability: 0.99,
        };
        prop_assert!(effective_cell_range(&tech(a + step)) < effective_cell_range(&tech(a)));
    }

    #[test]
    fn adding_a_link_never_hurts(links in prop::collection::vec(0.01..0.999f64, 1..5), extra in 0.01..0.999f64) {
        let before = multi_link_availability(&links).unwrap().availability;
        let mut more = links.clone();
        more.push(extra);
        let after = multi_link_availability(&more).unwrap().availability;
        prop_assert!(after >= before);
        let best = links.iter().cloned().fold(0.0, f64::max);
        prop_assert!(before >= best - 1e-15);
    }

    #[test]
    fn delay_is_linear(d in 0.001..50_000.0f64) {
        for p in Platform::ALL {
            let one = propagation_delay(p, Some(d)).unwrap();
            prop_assert_eq!(propagation_delay(p, Some(2.0 * d)).unwrap(), 2.0 * one);
        }
    }

    #[test]
    fn conflicts_stay_inside_lookahead(
        angle in 0.3..std::f64::consts::PI,
        offset in -400.0..400.0f64,
        tick in 0u32..6,
    ) {
        let cfg = DaaConfig::new(500.0).unwrap();
        let now = tick as f64 * cfg.detection_period_s;
        let line = |id: &str, a: f64, off: f64| {
            let (c, s) = (a.cos(), a.sin());
            let p0 = [-30_000.0 * c - off * s, -30_000.0 * s + off * c, 300.0];
            let p1 = [30_000.0 * c - off * s, 30_000.0 * s + off * c, 300.0];
            FlightProfile4D::new(id, VehicleKind::Uas, vec![Waypoint::at(p0, 0.0), Waypoint::at(p1, 1200.0)]).unwrap()
        };
        let a = line("a", 0.0, offset);
        let b = line("b", angle, 0.0);
        if let Some(e) = predict_pair(&a, &b, &cfg, now, cfg.threshold(0.0)) {
            prop_assert_eq!(e.detected_at, now);
            prop_assert!(e.predicted_time >= now && e.predicted_time - now <= cfg.lookahead_s);
            prop_assert!(e.loss_of_separation_time <= e.predicted_time);
            prop_assert!(e.min_distance_m < e.threshold_m);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fmcw_peaks_ignore_amplitude_scale(k in prop_oneof![1e-3..1.0f64, 1.0..1e3f64], seed in any::<u64>()) {
        let cfg = ChirpConfig {
            bandwidth_hz: 150e6,
            chirp_duration_s: 1e-3,
            carrier_hz: 2.4e9,
            sample_rate_hz: 1e6,
            num_chirps: 64,
        };
        let targets = [TargetEcho::new(100.0, 15.0, 1.0), TargetEcho::new(250.0, -15.0, 1.0)];
        let beat = synthesize_beat(&cfg, &targets, 0.1, seed).unwrap();
        let cells = |m| {
            estimate_range_doppler(&m, &cfg, Window::Hann)
                .unwrap()
                .into_iter()
                .map(|d| (d.range_bin, d.doppler_bin))
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(cells(beat.scaled(k)), cells(beat));
    }
}
