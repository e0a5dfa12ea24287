use std::path::PathBuf;

use uamsim::daa::ResolutionStage;
use uamsim::graph::NodeId;
use uamsim::route::RouteError;
use uamsim::sim::{
    build_profile, plan_missions, report_json, run, verdicts, write_timeseries_csv, ConflictOutcome, MissionMode,
    MissionSpec, PlannedMission, Requirements, ScenarioConfig, SimError, VerdictStatus,
};
use uamsim::route::SolverChoice;

fn shipped(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"));
    ScenarioConfig::load(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn line_scenario(json_missions: &str, extra: &str) -> ScenarioConfig {
    let text = format!(
        r#"{{
          "version": 1,
          "graph": {{
            "nodes": [
              {{"id": 0, "x": 0, "y": 0, "z": 100}},
              {{"id": 1, "x": 1000, "y": 0, "z": 100}},
              {{"id": 2, "x": 1000, "y": 2000, "z": 100}}
            ],
            "arcs": [
              {{"from": 0, "to": 1, "distance_km": 1}},
              {{"from": 1, "to": 2, "distance_km": 2}},
              {{"from": 2, "to": 0, "distance_km": 2.236}}
            ]
          }},
          "missions": {json_missions},
          "daa": {{"separation_min_m": 500}},
          "sim": {{"duration_s": 600, "master_seed": 3}}
          {extra}
        }}"#
    );
    ScenarioConfig::from_json(&text).unwrap()
}

#[test]
fn shipped_scenarios_validate_and_run() {
    for name in ["taxi", "delivery", "crossing"] {
        let s = shipped(name);
        let out = run(&s).unwrap();
        let c = &out.metrics.conflicts;
        assert!(c.reconciles(), "{name}");
        assert!(c.resolved() <= c.detected);
        for l in &out.metrics.links {
            let a = l.achieved_availability.unwrap();
            assert!((0.0..=1.0).contains(&a));
        }
        assert!(out.metrics.vehicles.iter().all(|v| v.completed), "{name}");
    }
}

#[test]
fn crossing_has_one_conflict_resolved_by_speed_reduction() {
    let s = shipped("crossing");
    let m = run(&s).unwrap().metrics;
    let c = &m.conflicts;
    assert_eq!(c.detected, 1);
    assert_eq!(c.resolved_by_stage.speed_reduction, 1);
    let e = &c.events[0];
    assert_eq!(e.pair, ("ga-1".to_string(), "uas-1".to_string()));
    assert_eq!(e.outcome, ConflictOutcome::Resolved);
    assert_eq!(e.stage, Some(ResolutionStage::SpeedReduction));
    // Both reach the origin at t = 600; first visible from the t = 120 tick.
    assert_eq!(e.detected_at, 120.0);
    assert!(e.predicted_time - e.detected_at <= 480.0);
    assert!((e.predicted_time - 600.0).abs() <= 2.0);
    assert_eq!(m.separation.violations, 0);
    assert!(m.separation.min_distance_m.unwrap() >= 500.0);
    // The maneuvering UAS arrives later than planned; the manned aircraft does not.
    let uas = m.vehicles.iter().find(|v| v.vehicle_id == "uas-1").unwrap();
    let ga = m.vehicles.iter().find(|v| v.vehicle_id == "ga-1").unwrap();
    assert!(uas.completion_time_s > 1200.0);
    assert_eq!(ga.completion_time_s, 1200.0);
}

#[test]
fn same_seed_same_bytes_and_seed_keeps_routes() {
    let s = shipped("crossing");
    let a = run(&s).unwrap();
    let b = run(&s).unwrap();
    let ra = report_json(s.name.as_deref(), &a.metrics, &verdicts(&a.metrics, &s.requirements));
    let rb = report_json(s.name.as_deref(), &b.metrics, &verdicts(&b.metrics, &s.requirements));
    assert_eq!(ra, rb);
    assert_eq!(a.timeseries, b.timeseries);

    let mut other = shipped("delivery");
    let base = run(&other).unwrap().metrics;
    other.sim.master_seed += 1;
    let changed = run(&other).unwrap();
    for (x, y) in base.vehicles.iter().zip(&changed.metrics.vehicles) {
        assert_eq!(x.route, y.route);
        assert_eq!(x.route_cost, y.route_cost);
    }
    assert_ne!(base.links, changed.metrics.links);
}

#[test]
fn lone_vehicle_with_perfect_link() {
    let s = line_scenario(
        r#"[{"vehicle_id": "solo", "mode": "taxi", "depot": 0, "targets": [2], "speed_mps": 10}]"#,
        r#", "links": {
            "technologies": [{"name": "t", "base_cell_range_km": 50, "data_rate_kbps": 10,
                              "platform": "terrestrial", "per_link_availability": 0.9}],
            "assignments": {"solo": ["t"]},
            "channel": {"k_factor": 1e6, "shadowing_db": 0, "fade_margin_db": 60, "blockage_probability": 0},
            "calibrated_availability": false
        }"#,
    );
    let m = run(&s).unwrap().metrics;
    assert_eq!(m.conflicts.detected, 0);
    assert_eq!(m.c2[0].achieved_availability, Some(1.0));
    assert_eq!(m.links[0].outage_s, 0.0);
    assert_eq!(m.separation.min_distance_m, None);
    // 0 → 1 → 2 is 1000 m + 2000 m at 10 m/s.
    assert_eq!(m.vehicles[0].completion_time_s, 300.0);
    assert_eq!(m.vehicles[0].route, vec![0, 1, 2]);
}

#[test]
fn profile_kinematics() {
    let s = line_scenario(
        r#"[{"vehicle_id": "a", "mode": "taxi", "depot": 0, "targets": [1], "speed_mps": 10, "departure_s": 5},
            {"vehicle_id": "b", "mode": "delivery", "depot": 0, "targets": [1, 2], "speed_mps": 20},
            {"vehicle_id": "c", "mode": "taxi", "depot": 2, "targets": [2], "speed_mps": 20}]"#,
        "",
    );
    let graph = s.graph.build().unwrap();
    let plans = plan_missions(&graph, &s.missions, SolverChoice::Auto).unwrap();
    let a = build_profile(&graph, &plans[0]).unwrap();
    assert_eq!(a.end_time(), 105.0);
    let b = build_profile(&graph, &plans[1]).unwrap();
    let total: f64 = b
        .waypoints()
        .windows(2)
        .map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt() / 20.0)
        .sum();
    assert!((b.end_time() - total).abs() < 1e-9);
    assert_eq!(plans[1].route.first(), plans[1].route.last());
    let c = build_profile(&graph, &plans[2]).unwrap();
    assert_eq!(c.waypoints().len(), 1);
}

#[test]
fn missing_position_is_reported() {
    let mut s = line_scenario(
        r#"[{"vehicle_id": "a", "mode": "taxi", "depot": 0, "targets": [1], "speed_mps": 10}]"#,
        "",
    );
    s.graph.nodes[1].x = None;
    assert!(matches!(run(&s), Err(SimError::MissingPosition { node: NodeId(1) })));
}

#[test]
fn planning_errors_name_the_vehicle() {
    let s = line_scenario(
        r#"[{"vehicle_id": "a", "mode": "taxi", "depot": 0, "targets": [1], "speed_mps": 10}]"#,
        "",
    );
    let mut broken = s.clone();
    broken.graph.arcs.retain(|a| a.from != 0);
    match run(&broken) {
        Err(SimError::Planning { vehicle, source }) => {
            assert_eq!(vehicle, "a");
            assert!(matches!(source, RouteError::NoPath { .. }));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn validation_locates_problems() {
    let mut s = line_scenario(
        r#"[{"vehicle_id": "a", "mode": "taxi", "depot": 0, "targets": [1, 2], "speed_mps": 10},
            {"vehicle_id": "a", "mode": "delivery", "depot": 9, "targets": [1], "speed_mps": 0}]"#,
        "",
    );
    s.graph.arcs[1].to = 7;
    s.daa.config.detection_period_s = 90.5;
    let locations: Vec<String> = s.validate().into_iter().map(|v| v.location).collect();
    for expected in [
        "/graph/arcs/1",
        "/missions/0/targets",
        "/missions/1/vehicle_id",
        "/missions/1/depot",
        "/missions/1/speed_mps",
        "/daa/detection_period_s",
    ] {
        assert!(locations.iter().any(|l| l == expected), "{expected} missing from {locations:?}");
    }
    assert!(matches!(run(&s), Err(SimError::Invalid(_))));
}

#[test]
fn link_section_cross_references() {
    let s = line_scenario(
        r#"[{"vehicle_id": "a", "mode": "taxi", "depot": 0, "targets": [1], "speed_mps": 10}]"#,
        r#", "links": {
            "technologies": [{"name": "t", "base_cell_range_km": 50, "data_rate_kbps": 10,
                              "platform": "geo", "per_link_availability": 0.99}],
            "assignments": {"ghost": ["t"], "a": ["t", "nope"]},
            "channel": {"k_factor": 0, "shadowing_db": 30, "fade_margin_db": 10}
        }"#,
    );
    let v = s.validate();
    let locations: Vec<&str> = v.iter().map(|v| v.location.as_str()).collect();
    assert!(locations.contains(&"/links/assignments/ghost"));
    assert!(locations.contains(&"/links/assignments/a/1"));
    // Rayleigh with a 10 dB margin cannot reach 0.99.
    assert!(locations.contains(&"/links/technologies/0"));
}

#[test]
fn unknown_fields_and_truncation_fail_to_parse() {
    assert!(matches!(ScenarioConfig::from_json("{\"version\": 1"), Err(SimError::Parse(_))));
    let text = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/crossing.json"),
    )
    .unwrap();
    let with_typo = text.replacen("\"missions\"", "\"mission\": [], \"missions\"", 1);
    assert!(matches!(ScenarioConfig::from_json(&with_typo), Err(SimError::Parse(_))));
}

#[test]
fn verdict_examples() {
    let s = shipped("crossing");
    let mut m = run(&s).unwrap().metrics;
    m.c2.truncate(1);
    m.c2[0].design_availability = 0.9999;
    m.c2_rate_kbps = Some(250.0);
    let v = verdicts(&m, &Requirements::default());
    let design = v.iter().find(|v| v.requirement == "c2_availability_design/uas-1").unwrap();
    assert_eq!(design.status, VerdictStatus::Fail);
    assert!((design.margin.unwrap() + 9e-5).abs() < 1e-12);
    let rate = v.iter().find(|v| v.requirement == "c2_rate").unwrap();
    assert_eq!(rate.status, VerdictStatus::Pass);
    m.c2_rate_kbps = Some(300.0);
    let v = verdicts(&m, &Requirements::default());
    assert_eq!(v.iter().find(|v| v.requirement == "c2_rate").unwrap().status, VerdictStatus::Fail);

    let mut no_links = s.clone();
    no_links.links = None;
    let m = run(&no_links).unwrap().metrics;
    let v = verdicts(&m, &Requirements::default());
    for name in ["c2_availability", "c2_rate"] {
        assert_eq!(
            v.iter().find(|v| v.requirement == name).unwrap().status,
            VerdictStatus::NotEvaluated
        );
    }
}

#[test]
fn report_keys_are_sorted_and_versioned() {
    let s = shipped("crossing");
    let m = run(&s).unwrap().metrics;
    let text = report_json(s.name.as_deref(), &m, &verdicts(&m, &s.requirements));
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    assert_eq!(top, ["metrics", "scenario", "schema_version", "verdicts"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn timeseries_csv_layout() {
    let s = shipped("crossing");
    let out = run(&s).unwrap();
    let mut buf = Vec::new();
    write_timeseries_csv(&out.timeseries, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,vehicle_id,x,y,z,c2_available,links");
    let first = lines.next().unwrap();
    assert!(first.starts_with("0.0,ga-1,"), "{first}");
    // Steps are exact multiples of the time step.
    let ts: Vec<f64> = out.timeseries.iter().map(|r| r.t).collect();
    assert!(ts.iter().all(|t| t.fract() == 0.0));
}

#[test]
fn head_on_uas_pair_escalates_and_reconciles() {
    // Two UAS flying the same corridor in opposite directions.
    let text = r#"{
      "version": 1,
      "graph": {
        "nodes": [{"id": 0, "x": -20000, "y": 0, "z": 300}, {"id": 1, "x": 20000, "y": 0, "z": 300}],
        "arcs": [{"from": 0, "to": 1, "distance_km": 40}, {"from": 1, "to": 0, "distance_km": 40}]
      },
      "missions": [
        {"vehicle_id": "east", "mode": "taxi", "depot": 0, "targets": [1], "speed_mps": 40},
        {"vehicle_id": "west", "mode": "taxi", "depot": 1, "targets": [0], "speed_mps": 40}
      ],
      "daa": {"separation_min_m": 500},
      "sim": {"duration_s": 1200}
    }"#;
    let s = ScenarioConfig::load(text).unwrap();
    let m = run(&s).unwrap().metrics;
    let c = &m.conflicts;
    assert!(c.detected >= 1);
    assert!(c.reconciles());
    // Slowing down cannot clear a head-on encounter; a lateral stage must.
    assert_eq!(c.resolved_by_stage.speed_reduction, 0);
    assert!(c.resolved() >= 1);
    assert!(c.events.iter().all(|e| e.pair == ("east".to_string(), "west".to_string())));
    assert_eq!(m.separation.violations, 0);
}

#[test]
fn manned_pair_is_unresolvable_and_flown_as_planned() {
    let text = r#"{
      "version": 1,
      "graph": {
        "nodes": [{"id": 0, "x": -20000, "y": 0, "z": 300}, {"id": 1, "x": 20000, "y": 0, "z": 300}],
        "arcs": [{"from": 0, "to": 1, "distance_km": 40}, {"from": 1, "to": 0, "distance_km": 40}]
      },
      "missions": [
        {"vehicle_id": "m1", "kind": "manned", "mode": "taxi", "depot": 0, "targets": [1], "speed_mps": 40},
        {"vehicle_id": "m2", "kind": "manned", "mode": "taxi", "depot": 1, "targets": [0], "speed_mps": 40}
      ],
      "daa": {"separation_min_m": 500},
      "sim": {"duration_s": 1200}
    }"#;
    let s = ScenarioConfig::load(text).unwrap();
    let m = run(&s).unwrap().metrics;
    assert_eq!(m.conflicts.detected, 1, "re-detections of an unresolved pair are suppressed");
    assert_eq!(m.conflicts.unresolvable, 1);
    assert_eq!(m.separation.violations, 1);
    assert_eq!(m.separation.min_distance_m, Some(0.0));
    assert!(m.vehicles.iter().all(|v| v.completion_time_s == 1000.0));
}

#[test]
fn adding_a_vehicle_keeps_other_streams() {
    let base = line_scenario(
        r#"[{"vehicle_id": "a", "mode": "taxi", "depot": 0, "targets": [2], "speed_mps": 10}]"#,
        r#", "links": {
            "technologies": [{"name": "t", "base_cell_range_km": 50, "data_rate_kbps": 10,
                              "platform": "terrestrial", "per_link_availability": 0.9}],
            "assignments": {"a": ["t"]},
            "channel": {"k_factor": 2, "shadowing_db": 30}
        }"#,
    );
    let mut more = base.clone();
    more.missions.push(MissionSpec {
        vehicle_id: "z".into(),
        kind: Default::default(),
        mode: MissionMode::Taxi,
        depot: NodeId(2),
        targets: vec![NodeId(2)],
        speed_mps: 5.0,
        departure_s: 0.0,
        weights: None,
    });
    let x = run(&base).unwrap();
    let y = run(&more).unwrap();
    let series = |r: &uamsim::sim::SimRun| {
        r.timeseries.iter().filter(|row| row.vehicle_id == "a").cloned().collect::<Vec<_>>()
    };
    assert_eq!(series(&x), series(&y));
    let _unused: Option<PlannedMission> = None;
}
