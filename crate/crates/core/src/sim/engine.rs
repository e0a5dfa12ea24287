use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::scenario::{build_profile, plan_missions, MissionMode, ScenarioConfig};
use super::{sub_seed, SimError};
use crate::daa::{
    maneuvering_vehicle, predict_conflicts, resolve, DaaError, FlightProfile4D, PositionSampler, PositioningModel,
    ResolutionAction, ResolutionStage, VehicleKind,
};
use crate::link::{multi_link_availability, LinkClass, LinkProcess, Platform};
use crate::route::SolverChoice;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleMetrics {
    pub vehicle_id: String,
    pub kind: VehicleKind,
    pub mode: MissionMode,
    pub route: Vec<usize>,
    pub route_cost: f64,
    pub departure_s: f64,
    /// Arrival time of the flown profile, including any maneuvers.
    pub completion_time_s: f64,
    /// Whether the vehicle arrived before the simulation ended.
    pub completed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StageCounts {
    pub speed_reduction: u64,
    pub vector: u64,
    pub lateral_offset: u64,
}

impl StageCounts {
    pub fn total(&self) -> u64 {
        self.speed_reduction + self.vector + self.lateral_offset
    }

    fn bump(&mut self, stage: ResolutionStage) {
        match stage {
            ResolutionStage::SpeedReduction => self.speed_reduction += 1,
            ResolutionStage::Vector => self.vector += 1,
            ResolutionStage::LateralOffset => self.lateral_offset += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictOutcome {
    /// A maneuver cleared the pair.
    Resolved,
    /// The detection came from noisy positions; the true profiles were clear.
    ClearedWithoutAction,
    /// No stage (or no maneuverable vehicle) cleared the pair; the original
    /// profiles are flown on.
    Unresolvable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConflictRecord {
    pub pair: (String, String),
    pub detected_at: f64,
    pub predicted_time: f64,
    pub loss_of_separation_time: f64,
    pub min_distance_m: f64,
    pub outcome: ConflictOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<ResolutionStage>,
    pub attempts: Vec<ResolutionAction>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ConflictMetrics {
    pub detected: u64,
    pub resolved_by_stage: StageCounts,
    pub cleared_without_action: u64,
    pub unresolvable: u64,
    pub events: Vec<ConflictRecord>,
}

impl ConflictMetrics {
    pub fn resolved(&self) -> u64 {
        self.resolved_by_stage.total()
    }

    /// Every detection has exactly one outcome.
    pub fn reconciles(&self) -> bool {
        self.detected == self.resolved() + self.cleared_without_action + self.unresolvable
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SeparationMetrics {
    /// Episodes of a pair flying closer than the separation minimum.
    pub violations: u64,
    /// Smallest horizontal distance between two airborne vehicles inside the
    /// vertical band, if any such pair existed.
    pub min_distance_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkMetrics {
    pub vehicle_id: String,
    pub technology: String,
    pub platform: Platform,
    pub one_way_delay_ms: f64,
    pub sampled_s: f64,
    pub outage_s: f64,
    pub achieved_availability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C2Metrics {
    pub vehicle_id: String,
    /// `1 − Π(1 − A_i)` over the carried links.
    pub design_availability: f64,
    /// Fraction of airborne steps with at least one link up.
    pub achieved_availability: Option<f64>,
    pub outage_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetrics {
    pub master_seed: u64,
    pub time_step_s: f64,
    pub duration_s: f64,
    pub steps: u64,
    pub vehicles: Vec<VehicleMetrics>,
    pub conflicts: ConflictMetrics,
    pub separation: SeparationMetrics,
    /// False when the scenario has no link section.
    pub links_configured: bool,
    pub links: Vec<LinkMetrics>,
    pub c2: Vec<C2Metrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2_rate_kbps: Option<f64>,
}

/// Per-step state of one airborne vehicle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeseriesRow {
    pub t: f64,
    pub vehicle_id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Empty when the vehicle carries no links.
    pub c2_available: Option<bool>,
    /// `name=CLASS:0|1` per carried link, `;`-separated.
    pub links: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub metrics: SimMetrics,
    pub timeseries: Vec<TimeseriesRow>,
}

struct CarriedLink {
    name: String,
    process: LinkProcess,
    sampled: u64,
    up: u64,
}

struct Vehicle {
    id: String,
    profile: FlightProfile4D,
    gnss: PositionSampler,
    links: Vec<CarriedLink>,
    airborne_steps: u64,
    c2_up_steps: u64,
}

type Pair = (String, String);

/// Simulate `scenario` to completion.
///
/// Within a step the order is fixed: positions advance, DAA runs when the
/// step is on the detection cadence, links are sampled, metrics update.
/// Vehicles are always processed in ascending id order.
pub fn run(scenario: &ScenarioConfig) -> Result<SimRun, SimError> {
    let violations = scenario.validate();
    if !violations.is_empty() {
        return Err(SimError::Invalid(violations));
    }
    let graph = scenario.graph.build()?;
    let seed = scenario.sim.master_seed;
    let dt = scenario.sim.time_step_s;
    let daa = &scenario.daa.config;
    let positioning = PositioningModel::new(scenario.daa.positioning_mode, sub_seed(seed, "gnss", ""));

    let mut plans = plan_missions(&graph, &scenario.missions, SolverChoice::Auto)?;
    plans.sort_by(|a, b| a.spec.vehicle_id.cmp(&b.spec.vehicle_id));

    let mut vehicles = Vec::with_capacity(plans.len());
    for p in &plans {
        let id = p.spec.vehicle_id.clone();
        let mut links = Vec::new();
        if let Some(section) = &scenario.links {
            for name in section.assignments.get(&id).into_iter().flatten() {
                let tech = section.technology(name).expect("validated assignment");
                let model = section.outage_model(tech, dt)?;
                let process = LinkProcess::with_model(tech, model, dt, sub_seed(seed, &format!("link/{name}"), &id))
                    .map_err(|e| SimError::Link {
                        technology: name.clone(),
                        source: e,
                    })?;
                links.push(CarriedLink {
                    name: name.clone(),
                    process,
                    sampled: 0,
                    up: 0,
                });
            }
        }
        vehicles.push(Vehicle {
            profile: build_profile(&graph, p)?,
            gnss: PositionSampler::new(scenario.daa.positioning_mode, sub_seed(seed, "gnss", &id)),
            id,
            links,
            airborne_steps: 0,
            c2_up_steps: 0,
        });
    }

    let steps = (scenario.sim.duration_s / dt).round() as u64;
    let cadence = (daa.detection_period_s / dt).round() as u64;
    let mut conflicts = ConflictMetrics::default();
    let mut separation = SeparationMetrics::default();
    let mut escalation: BTreeMap<Pair, usize> = BTreeMap::new();
    let mut unresolved: BTreeSet<Pair> = BTreeSet::new();
    let mut in_violation: BTreeSet<Pair> = BTreeSet::new();
    let mut timeseries = Vec::new();

    for k in 0..steps {
        let t = k as f64 * dt;

        // Advance.
        let positions: Vec<Option<[f64; 3]>> = vehicles
            .iter()
            .map(|v| v.profile.contains_time(t).then(|| v.profile.position_at(t).expect("inside span")))
            .collect();

        // Detect and avoid.
        if k % cadence == 0 {
            let observed: Vec<FlightProfile4D> = vehicles
                .iter_mut()
                .map(|v| {
                    let [ex, ey] = v.gnss.error();
                    v.profile.translated(ex, ey)
                })
                .collect();
            let events = predict_conflicts(&observed, daa, t, &positioning);
            let mut seen = BTreeSet::new();
            for e in events {
                seen.insert(e.pair.clone());
                if unresolved.contains(&e.pair) {
                    continue;
                }
                conflicts.detected += 1;
                let ia = index_of(&vehicles, &e.pair.0);
                let ib = index_of(&vehicles, &e.pair.1);
                let (a, b) = (&vehicles[ia].profile, &vehicles[ib].profile);
                let mut record = ConflictRecord {
                    pair: e.pair.clone(),
                    detected_at: e.detected_at,
                    predicted_time: e.predicted_time,
                    loss_of_separation_time: e.loss_of_separation_time,
                    min_distance_m: e.min_distance_m,
                    outcome: ConflictOutcome::Unresolvable,
                    stage: None,
                    attempts: Vec::new(),
                };
                let tried = escalation.get(&e.pair).copied().unwrap_or(0);
                let maneuver = maneuvering_vehicle(a, b).map(|u| u.vehicle_id().to_string());
                match maneuver {
                    Some(uid) if tried < ResolutionStage::ORDER.len() => {
                        let (iu, ii) = if uid == e.pair.0 { (ia, ib) } else { (ib, ia) };
                        let outcome = resolve(
                            &e,
                            &vehicles[iu].profile,
                            &vehicles[ii].profile,
                            daa,
                            &positioning,
                            &ResolutionStage::ORDER[..tried],
                        );
                        match outcome {
                            Ok(res) => {
                                let stage = res.action().stage;
                                conflicts.resolved_by_stage.bump(stage);
                                let level = ResolutionStage::ORDER.iter().position(|s| *s == stage).expect("known stage");
                                escalation.insert(e.pair.clone(), level + 1);
                                record.outcome = ConflictOutcome::Resolved;
                                record.stage = Some(stage);
                                record.attempts = res.attempts;
                                vehicles[iu].profile = res.profile;
                            }
                            Err(DaaError::NoConflictPending(..)) => {
                                conflicts.cleared_without_action += 1;
                                record.outcome = ConflictOutcome::ClearedWithoutAction;
                            }
                            Err(DaaError::Unresolvable(_, _, attempts)) => {
                                conflicts.unresolvable += 1;
                                record.attempts = attempts;
                                unresolved.insert(e.pair.clone());
                            }
                            Err(other) => return Err(other.into()),
                        }
                    }
                    _ => {
                        conflicts.unresolvable += 1;
                        unresolved.insert(e.pair.clone());
                    }
                }
                conflicts.events.push(record);
            }
            // A suppressed pair is re-armed once a tick predicts it clear.
            unresolved.retain(|p| seen.contains(p));
        }

        // Links.
        let mut link_columns = Vec::with_capacity(vehicles.len());
        for (v, pos) in vehicles.iter_mut().zip(&positions) {
            if pos.is_none() {
                link_columns.push(None);
                continue;
            }
            v.airborne_steps += 1;
            let mut any_up = false;
            let mut parts = Vec::with_capacity(v.links.len());
            for l in v.links.iter_mut() {
                let s = l.process.step();
                l.sampled += 1;
                if s.available {
                    l.up += 1;
                    any_up = true;
                }
                parts.push(format!("{}={}:{}", l.name, class_name(s.classification), u8::from(s.available)));
            }
            if any_up {
                v.c2_up_steps += 1;
            }
            link_columns.push(Some((any_up, parts.join(";"))));
        }

        // Metrics.
        for i in 0..vehicles.len() {
            let Some(p) = positions[i] else { continue };
            for j in (i + 1)..vehicles.len() {
                let Some(q) = positions[j] else { continue };
                let pair = (vehicles[i].id.clone(), vehicles[j].id.clone());
                if (p[2] - q[2]).abs() >= daa.vertical_band_m {
                    in_violation.remove(&pair);
                    continue;
                }
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                separation.min_distance_m = Some(separation.min_distance_m.map_or(d, |m: f64| m.min(d)));
                if d < daa.separation_min_m {
                    if in_violation.insert(pair) {
                        separation.violations += 1;
                    }
                } else {
                    in_violation.remove(&pair);
                }
            }
        }
        for ((v, pos), col) in vehicles.iter().zip(&positions).zip(link_columns) {
            let (Some(p), Some((up, links))) = (pos, col) else { continue };
            timeseries.push(TimeseriesRow {
                t,
                vehicle_id: v.id.clone(),
                x: p[0],
                y: p[1],
                z: p[2],
                c2_available: (!v.links.is_empty()).then_some(up),
                links,
            });
        }
    }

    let duration = steps as f64 * dt;
    let vehicle_metrics = plans
        .iter()
        .zip(&vehicles)
        .map(|(p, v)| VehicleMetrics {
            vehicle_id: v.id.clone(),
            kind: p.spec.kind,
            mode: p.spec.mode,
            route: p.route.iter().map(|n| n.0).collect(),
            route_cost: p.total_cost,
            departure_s: p.spec.departure_s,
            completion_time_s: v.profile.end_time(),
            completed: v.profile.end_time() <= duration,
        })
        .collect();
    let mut links = Vec::new();
    let mut c2 = Vec::new();
    if let Some(section) = &scenario.links {
        for v in &vehicles {
            if v.links.is_empty() {
                continue;
            }
            let mut per_link = Vec::new();
            for l in &v.links {
                let tech = section.technology(&l.name).expect("validated assignment");
                per_link.push(tech.per_link_availability);
                links.push(LinkMetrics {
                    vehicle_id: v.id.clone(),
                    technology: l.name.clone(),
                    platform: tech.platform,
                    one_way_delay_ms: tech.one_way_delay_ms(),
                    sampled_s: l.sampled as f64 * dt,
                    outage_s: (l.sampled - l.up) as f64 * dt,
                    achieved_availability: ratio(l.up, l.sampled),
                });
            }
            let design = multi_link_availability(&per_link).map_err(|e| SimError::Link {
                technology: v.links[0].name.clone(),
                source: e,
            })?;
            c2.push(C2Metrics {
                vehicle_id: v.id.clone(),
                design_availability: design.availability,
                achieved_availability: ratio(v.c2_up_steps, v.airborne_steps),
                outage_s: (v.airborne_steps - v.c2_up_steps) as f64 * dt,
            });
        }
    }

    Ok(SimRun {
        metrics: SimMetrics {
            master_seed: seed,
            time_step_s: dt,
            duration_s: duration,
            steps,
            vehicles: vehicle_metrics,
            conflicts,
            separation,
            links_configured: scenario.links.is_some(),
            links,
            c2,
            c2_rate_kbps: scenario.links.as_ref().and_then(|l| l.c2_rate_kbps),
        },
        timeseries,
    })
}

fn index_of(vehicles: &[Vehicle], id: &str) -> usize {
    vehicles.iter().position(|v| v.id == id).expect("conflict pairs name known vehicles")
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn class_name(c: LinkClass) -> &'static str {
    match c {
        LinkClass::Los => "LOS",
        LinkClass::Blos => "BLOS",
        LinkClass::Nlos => "NLOS",
    }
}
