use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::daa::{DaaConfig, FlightProfile4D, PositioningMode, VehicleKind};
use crate::graph::{AirspaceGraph, CostWeights, GraphDocument, NodeId};
use crate::link::{ChannelModel, LinkTechnology, OutageModel, C2_AVAILABILITY_REQUIREMENT, C2_MAX_RATE_KBPS};
use crate::route::{plan_mission_with, shortest_path, Mission, PathQuery, SolverChoice};

pub const SCENARIO_VERSION: u32 = 1;

/// One scenario file: network, missions and every subsystem's settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub graph: GraphDocument,
    pub missions: Vec<MissionSpec>,
    pub daa: DaaSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<LinkSection>,
    pub sim: SimSection,
    #[serde(default)]
    pub requirements: Requirements,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionMode {
    /// Point to point along the shortest path.
    Taxi,
    /// Closed tour from the depot through every target and back.
    Delivery,
}

fn default_departure() -> f64 {
    0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionSpec {
    pub vehicle_id: String,
    #[serde(default)]
    pub kind: VehicleKind,
    pub mode: MissionMode,
    pub depot: NodeId,
    pub targets: Vec<NodeId>,
    pub speed_mps: f64,
    #[serde(default = "default_departure")]
    pub departure_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<CostWeights>,
}

fn default_positioning() -> PositioningMode {
    PositioningMode::Gps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaaSection {
    #[serde(flatten)]
    pub config: DaaConfig,
    #[serde(default = "default_positioning")]
    pub positioning_mode: PositioningMode,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub technologies: Vec<LinkTechnology>,
    /// Vehicle id → technology names it carries.
    #[serde(default)]
    pub assignments: BTreeMap<String, Vec<String>>,
    pub channel: ChannelModel,
    /// Calibrate every link's blockage chain to its `per_link_availability`.
    /// When false the channel's `blockage_probability` (default 0) is used.
    #[serde(default = "default_true")]
    pub calibrated_availability: bool,
    /// Requested C2 data rate, checked against the rate limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2_rate_kbps: Option<f64>,
}

impl LinkSection {
    pub fn technology(&self, name: &str) -> Option<&LinkTechnology> {
        self.technologies.iter().find(|t| t.name == name)
    }

    pub fn outage_model(&self, tech: &LinkTechnology, step_s: f64) -> Result<OutageModel, SimError> {
        let model = if self.calibrated_availability {
            OutageModel::calibrated(tech, &self.channel, step_s)
        } else {
            OutageModel::uncalibrated(&self.channel, step_s)
        };
        model.map_err(|e| SimError::Link {
            technology: tech.name.clone(),
            source: e,
        })
    }
}

fn default_time_step() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_time_step")]
    pub time_step_s: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_c2_availability() -> f64 {
    C2_AVAILABILITY_REQUIREMENT
}
fn default_c2_rate() -> f64 {
    C2_MAX_RATE_KBPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirements {
    #[serde(default = "default_c2_availability")]
    pub c2_availability: f64,
    /// Requested C2 rates must stay strictly below this.
    #[serde(default = "default_c2_rate")]
    pub c2_max_rate_kbps: f64,
}

impl Default for Requirements {
    fn default() -> Self {
        Self {
            c2_availability: default_c2_availability(),
            c2_max_rate_kbps: default_c2_rate(),
        }
    }
}

/// Semantic problem in a scenario, located by JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioViolation {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for ScenarioViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Escape one JSON pointer reference token.
pub(crate) fn pointer_token(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Parse(e.to_string()))
    }

    /// Every semantic violation, in document order.
    pub fn validate(&self) -> Vec<ScenarioViolation> {
        let mut out = Vec::new();
        let mut push = |location: String, message: String| out.push(ScenarioViolation { location, message });

        if self.version != SCENARIO_VERSION {
            push("/version".into(), format!("unsupported version {}; expected {SCENARIO_VERSION}", self.version));
        }
        for v in self.graph.validate() {
            push(v.location, v.message);
        }
        let node_count = self.graph.nodes.len();

        if self.missions.is_empty() {
            push("/missions".into(), "at least one mission is required".into());
        }
        let mut ids = BTreeSet::new();
        for (i, m) in self.missions.iter().enumerate() {
            let at = |field: &str| format!("/missions/{i}/{field}");
            if m.vehicle_id.is_empty() || m.vehicle_id.chars().any(|c| c.is_whitespace() || c == ',' || c == '"') {
                push(at("vehicle_id"), "vehicle ids must be non-empty without whitespace, commas or quotes".into());
            } else if !ids.insert(m.vehicle_id.as_str()) {
                push(at("vehicle_id"), format!("duplicate vehicle id {}", m.vehicle_id));
            }
            if m.depot.0 >= node_count {
                push(at("depot"), format!("node {} is not in the graph", m.depot));
            }
            for (j, t) in m.targets.iter().enumerate() {
                if t.0 >= node_count {
                    push(format!("/missions/{i}/targets/{j}"), format!("node {t} is not in the graph"));
                }
            }
            if m.mode == MissionMode::Taxi && m.targets.len() != 1 {
                push(at("targets"), "a taxi mission has exactly one target".into());
            }
            if !(m.speed_mps > 0.0 && m.speed_mps.is_finite()) {
                push(at("speed_mps"), "speed must be finite and > 0".into());
            }
            if !(m.departure_s >= 0.0 && m.departure_s.is_finite()) {
                push(at("departure_s"), "departure must be finite and >= 0".into());
            }
        }

        if let Err(e) = self.daa.config.validate() {
            push("/daa".into(), e.to_string());
        }

        let step = self.sim.time_step_s;
        if !(step > 0.0 && step.is_finite()) {
            push("/sim/time_step_s".into(), "time step must be finite and > 0".into());
        } else {
            let ratio = self.daa.config.detection_period_s / step;
            if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
                push(
                    "/daa/detection_period_s".into(),
                    format!("detection period must be a whole multiple of the {step} s time step"),
                );
            }
        }
        if !(self.sim.duration_s > 0.0 && self.sim.duration_s.is_finite()) {
            push("/sim/duration_s".into(), "duration must be finite and > 0".into());
        }

        let r = &self.requirements;
        if !(r.c2_availability > 0.0 && r.c2_availability < 1.0) {
            push("/requirements/c2_availability".into(), "must be in (0, 1)".into());
        }
        if !(r.c2_max_rate_kbps > 0.0 && r.c2_max_rate_kbps.is_finite()) {
            push("/requirements/c2_max_rate_kbps".into(), "must be finite and > 0".into());
        }

        if let Some(links) = &self.links {
            let mut names = BTreeSet::new();
            for (i, t) in links.technologies.iter().enumerate() {
                let at = format!("/links/technologies/{i}");
                if !names.insert(t.name.as_str()) {
                    push(at.clone(), format!("duplicate technology name {}", t.name));
                }
                if let Err(e) = t.validate() {
                    push(at.clone(), e.to_string());
                } else if links.calibrated_availability && links.channel.validate().is_ok() && step > 0.0 {
                    if let Err(e) = links.outage_model(t, step) {
                        push(at, e.to_string());
                    }
                }
            }
            if let Err(e) = links.channel.validate() {
                push("/links/channel".into(), e.to_string());
            }
            for (vehicle, techs) in &links.assignments {
                let at = format!("/links/assignments/{}", pointer_token(vehicle));
                if !ids.contains(vehicle.as_str()) {
                    push(at.clone(), format!("no mission flies vehicle {vehicle}"));
                }
                let mut seen = BTreeSet::new();
                for (j, name) in techs.iter().enumerate() {
                    if links.technology(name).is_none() {
                        push(format!("{at}/{j}"), format!("unknown technology {name}"));
                    } else if !seen.insert(name) {
                        push(format!("{at}/{j}"), format!("technology {name} assigned twice"));
                    }
                }
            }
            if let Some(rate) = links.c2_rate_kbps {
                if !(rate >= 0.0 && rate.is_finite()) {
                    push("/links/c2_rate_kbps".into(), "rate must be finite and >= 0".into());
                }
            }
        }
        out
    }

    /// Parse and validate, failing on the first problem of either kind.
    pub fn load(text: &str) -> Result<Self, SimError> {
        let s = Self::from_json(text)?;
        let v = s.validate();
        if v.is_empty() {
            Ok(s)
        } else {
            Err(SimError::Invalid(v))
        }
    }
}

/// A mission after routing.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedMission {
    pub spec: MissionSpec,
    /// Stops in visiting order (taxi: origin and destination).
    pub stops: Vec<NodeId>,
    /// Every node flown through, ending at the destination or back at the depot.
    pub route: Vec<NodeId>,
    pub total_cost: f64,
    /// Whether the tour is provably optimal.
    pub exact: bool,
}

/// Route every mission, in file order.
pub fn plan_missions(
    graph: &AirspaceGraph,
    missions: &[MissionSpec],
    choice: SolverChoice,
) -> Result<Vec<PlannedMission>, SimError> {
    missions.iter().map(|m| plan_one(graph, m, choice)).collect()
}

fn plan_one(graph: &AirspaceGraph, m: &MissionSpec, choice: SolverChoice) -> Result<PlannedMission, SimError> {
    let weights = m.weights.unwrap_or_default();
    let attribute = |source| SimError::Planning {
        vehicle: m.vehicle_id.clone(),
        source,
    };
    match m.mode {
        MissionMode::Taxi => {
            let dest = *m.targets.first().ok_or_else(|| {
                attribute(crate::route::RouteError::InvalidInstance("taxi mission without target".into()))
            })?;
            let path = shortest_path(graph, &PathQuery::new(m.depot, dest, weights)).map_err(attribute)?;
            Ok(PlannedMission {
                spec: m.clone(),
                stops: vec![m.depot, dest],
                route: path.visited,
                total_cost: path.total_cost,
                exact: true,
            })
        }
        MissionMode::Delivery => {
            let mission = Mission {
                depot: m.depot,
                targets: m.targets.clone(),
                weights,
            };
            // Planning never depends on the master seed, so noise sweeps keep routes fixed.
            let seed = super::sub_seed(0, "plan", &m.vehicle_id);
            let plan = plan_mission_with(graph, &mission, choice, seed).map_err(attribute)?;
            Ok(PlannedMission {
                spec: m.clone(),
                route: plan.visited(),
                stops: plan.stops.clone(),
                total_cost: plan.total_cost,
                exact: plan.tour.exact,
            })
        }
    }
}

/// Constant-speed 4D profile through the route's node positions.
pub fn build_profile(graph: &AirspaceGraph, planned: &PlannedMission) -> Result<FlightProfile4D, SimError> {
    let points = planned
        .route
        .iter()
        .map(|&n| graph.position(n).ok_or(SimError::MissingPosition { node: n }))
        .collect::<Result<Vec<_>, _>>()?;
    let m = &planned.spec;
    FlightProfile4D::from_points(m.vehicle_id.clone(), m.kind, &points, m.speed_mps, m.departure_s)
        .map_err(SimError::Daa)
}

pub fn build_profiles(graph: &AirspaceGraph, plans: &[PlannedMission]) -> Result<Vec<FlightProfile4D>, SimError> {
    plans.iter().map(|p| build_profile(graph, p)).collect()
}
