//! Directed airspace graph of vertiports and waypoints.
//!
//! Arcs carry a [`CostComponents`] bundle (distance, navigation
//! unreliability, collision risk, threat exposure) that [`arc_cost`] folds
//! into a scalar through a [`CostWeights`] vector. Graphs are immutable once
//! built; [`AirspaceGraph::out_arcs`] and [`AirspaceGraph::in_arcs`] expose
//! the outgoing and incoming arc sets of a node.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex index in `[0, node_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(index: usize) -> Self {
        NodeId(index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostComponents {
    /// Kilometers, `>= 0`.
    pub distance_km: f64,
    /// Probability-like, in `[0, 1]`.
    pub nav_unreliability: f64,
    /// Probability-like, in `[0, 1]`.
    pub collision_risk: f64,
    /// Unbounded above, `>= 0`.
    pub threat_exposure: f64,
}

impl CostComponents {
    pub fn distance(distance_km: f64) -> Self {
        Self {
            distance_km,
            ..Self::default()
        }
    }

    /// Names of fields that are non-finite or outside their range.
    fn range_errors(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !non_negative(self.distance_km) {
            bad.push("distance_km");
        }
        if !unit(self.nav_unreliability) {
            bad.push("nav_unreliability");
        }
        if !unit(self.collision_risk) {
            bad.push("collision_risk");
        }
        if !non_negative(self.threat_exposure) {
            bad.push("threat_exposure");
        }
        bad
    }
}

/// Non-negative weights of the linear arc-cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub struct CostWeights {
    distance: f64,
    nav: f64,
    risk: f64,
    threat: f64,
}

#[derive(Serialize, Deserialize)]
struct RawWeights {
    #[serde(default)]
    w_dist: f64,
    #[serde(default)]
    w_nav: f64,
    #[serde(default)]
    w_risk: f64,
    #[serde(default)]
    w_threat: f64,
}

impl TryFrom<RawWeights> for CostWeights {
    type Error = GraphError;

    fn try_from(raw: RawWeights) -> Result<Self, Self::Error> {
        CostWeights::new(raw.w_dist, raw.w_nav, raw.w_risk, raw.w_threat)
    }
}

impl From<CostWeights> for RawWeights {
    fn from(w: CostWeights) -> Self {
        RawWeights {
            w_dist: w.distance,
            w_nav: w.nav,
            w_risk: w.risk,
            w_threat: w.threat,
        }
    }
}

impl CostWeights {
    pub fn new(distance: f64, nav: f64, risk: f64, threat: f64) -> Result<Self, GraphError> {
        let all = [distance, nav, risk, threat];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(GraphError::InvalidWeights("weights must be finite and >= 0"));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(GraphError::InvalidWeights("at least one weight must be > 0"));
        }
        Ok(Self {
            distance,
            nav,
            risk,
            threat,
        })
    }

    /// Pure distance weighting, `(1, 0, 0, 0)`.
    pub fn distance_only() -> Self {
        Self {
            distance: 1.0,
            nav: 0.0,
            risk: 0.0,
            threat: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.distance, self.nav, self.risk, self.threat]
    }
}

impl Default for CostWeights {
    fn default() -> Self {
        Self::distance_only()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub cost: CostComponents,
}

impl Arc {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>, cost: CostComponents) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            cost,
        }
    }
}

/// Scalar cost `c_ij` of an arc: the weighted sum of its cost components.
pub fn arc_cost(arc: &Arc, weights: &CostWeights) -> f64 {
    let c = &arc.cost;
    weights.distance * c.distance_km
        + weights.nav * c.nav_unreliability
        + weights.risk * c.collision_risk
        + weights.threat * c.threat_exposure
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node {0} is not in the graph")]
    InvalidNode(NodeId),
    #[error("invalid cost weights: {0}")]
    InvalidWeights(&'static str),
    #[error("graph violates {} invariant(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

/// What rule a [`Violation`] breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    SelfLoop,
    DuplicateArc,
    UnknownEndpoint,
    CostOutOfRange,
    DuplicateNodeId,
    NonDenseNodeIds,
    NonFinitePosition,
}

/// One broken graph invariant, located by a JSON-pointer-style path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Check node count, arcs and positions against the graph invariants.
///
/// Locations are rooted at `/graph` so they line up with the scenario file.
pub fn validate_parts(
    node_count: usize,
    arcs: &[Arc],
    positions: &[Option<[f64; 3]>],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (k, arc) in arcs.iter().enumerate() {
        let location = format!("/graph/arcs/{k}");
        for end in [arc.from, arc.to] {
            if end.0 >= node_count {
                out.push(Violation {
                    kind: ViolationKind::UnknownEndpoint,
                    location: location.clone(),
                    message: format!(
                        "arc {}->{} references missing node {end}",
                        arc.from, arc.to
                    ),
                });
            }
        }
        if arc.from == arc.to {
            out.push(Violation {
                kind: ViolationKind::SelfLoop,
                location: location.clone(),
                message: format!("arc {}->{} is a self-loop", arc.from, arc.to),
            });
        }
        if !seen.insert((arc.from, arc.to)) {
            out.push(Violation {
                kind: ViolationKind::DuplicateArc,
                location: location.clone(),
                message: format!("duplicate arc {}->{}", arc.from, arc.to),
            });
        }
        let bad = arc.cost.range_errors();
        if !bad.is_empty() {
            out.push(Violation {
                kind: ViolationKind::CostOutOfRange,
                location,
                message: format!("arc {}->{} has out-of-range {}", arc.from, arc.to, bad.join(", ")),
            });
        }
    }
    for (i, p) in positions.iter().enumerate() {
        if let Some(p) = p {
            if p.iter().any(|v| !v.is_finite()) {
                out.push(Violation {
                    kind: ViolationKind::NonFinitePosition,
                    location: format!("/graph/nodes/{i}"),
                    message: format!("node {i} has a non-finite coordinate"),
                });
            }
        }
    }
    out
}

/// Immutable directed graph `G = (V, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AirspaceGraph {
    node_count: usize,
    arcs: Vec<Arc>,
    positions: Vec<Option<[f64; 3]>>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl AirspaceGraph {
    /// Build a graph without node coordinates.
    pub fn new(node_count: usize, arcs: Vec<Arc>) -> Result<Self, GraphError> {
        Self::with_positions(node_count, arcs, vec![None; node_count])
    }

    /// Build a graph; `positions[i]` holds node `i`'s `(x, y, z)` in meters.
    pub fn with_positions(
        node_count: usize,
        arcs: Vec<Arc>,
        mut positions: Vec<Option<[f64; 3]>>,
    ) -> Result<Self, GraphError> {
        positions.resize(node_count, None);
        let violations = validate_parts(node_count, &arcs, &positions);
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        let mut outgoing = vec![Vec::new(); node_count];
        let mut incoming = vec![Vec::new(); node_count];
        for (k, arc) in arcs.iter().enumerate() {
            outgoing[arc.from.0].push(k);
            incoming[arc.to.0].push(k);
        }
        // Lowest head (resp. tail) index first keeps every traversal reproducible.
        for list in &mut outgoing {
            list.sort_by_key(|&k| arcs[k].to);
        }
        for list in &mut incoming {
            list.sort_by_key(|&k| arcs[k].from);
        }
        Ok(Self {
            node_count,
            arcs,
            positions,
            outgoing,
            incoming,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count
    }

    fn check(&self, node: NodeId) -> Result<(), GraphError> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(GraphError::InvalidNode(node))
        }
    }

    /// `δ⁺(node)`: arcs leaving `node`, ordered by head index.
    pub fn out_arcs(&self, node: NodeId) -> Result<impl Iterator<Item = &Arc> + '_, GraphError> {
        self.check(node)?;
        Ok(self.outgoing[node.0].iter().map(|&k| &self.arcs[k]))
    }

    /// `δ⁻(node)`: arcs entering `node`, ordered by tail index.
    pub fn in_arcs(&self, node: NodeId) -> Result<impl Iterator<Item = &Arc> + '_, GraphError> {
        self.check(node)?;
        Ok(self.incoming[node.0].iter().map(|&k| &self.arcs[k]))
    }

    pub fn arc(&self, from: NodeId, to: NodeId) -> Option<&Arc> {
        if !self.contains(from) {
            return None;
        }
        self.outgoing[from.0]
            .iter()
            .map(|&k| &self.arcs[k])
            .find(|a| a.to == to)
    }

    pub fn position(&self, node: NodeId) -> Option<[f64; 3]> {
        self.positions.get(node.0).copied().flatten()
    }

    pub fn positions(&self) -> &[Option<[f64; 3]>] {
        &self.positions
    }

    /// Re-check the invariants. Always empty for a graph that was built
    /// through the constructors; kept for symmetry with
    /// [`GraphDocument::validate`].
    pub fn validate(&self) -> Vec<Violation> {
        validate_parts(self.node_count, &self.arcs, &self.positions)
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument::from(self)
    }
}

/// Serialized node entry of the scenario file's graph section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcDocument {
    pub from: usize,
    pub to: usize,
    pub distance_km: f64,
    #[serde(default)]
    pub nav_unreliability: f64,
    #[serde(default)]
    pub collision_risk: f64,
    #[serde(default)]
    pub threat_exposure: f64,
}

/// Graph section of the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeDocument>,
    pub arcs: Vec<ArcDocument>,
}

impl GraphDocument {
    fn split(&self) -> (Vec<Arc>, Vec<Option<[f64; 3]>>) {
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc {
                from: NodeId(a.from),
                to: NodeId(a.to),
                cost: CostComponents {
                    distance_km: a.distance_km,
                    nav_unreliability: a.nav_unreliability,
                    collision_risk: a.collision_risk,
                    threat_exposure: a.threat_exposure,
                },
            })
            .collect();
        let mut positions = vec![None; self.nodes.len()];
        for n in &self.nodes {
            if let (Some(x), Some(y), Some(z), Some(slot)) = (n.x, n.y, n.z, positions.get_mut(n.id)) {
                *slot = Some([x, y, z]);
            }
        }
        (arcs, positions)
    }

    /// All invariant violations, including node-id density.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !ids.insert(n.id) {
                out.push(Violation {
                    kind: ViolationKind::DuplicateNodeId,
                    location: format!("/graph/nodes/{i}"),
                    message: format!("node id {} appears more than once", n.id),
                });
            } else if n.id >= self.nodes.len() {
                out.push(Violation {
                    kind: ViolationKind::NonDenseNodeIds,
                    location: format!("/graph/nodes/{i}"),
                    message: format!(
                        "node id {} is outside [0, {}); ids must be dense",
                        n.id,
                        self.nodes.len()
                    ),
                });
            }
        }
        let (arcs, positions) = self.split();
        out.extend(validate_parts(self.nodes.len(), &arcs, &positions));
        out
    }

    pub fn build(&self) -> Result<AirspaceGraph, GraphError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        let (arcs, positions) = self.split();
        AirspaceGraph::with_positions(self.nodes.len(), arcs, positions)
    }
}

impl From<&AirspaceGraph> for GraphDocument {
    fn from(g: &AirspaceGraph) -> Self {
        let nodes = (0..g.node_count)
            .map(|id| {
                let p = g.positions[id];
                NodeDocument {
                    id,
                    x: p.map(|p| p[0]),
                    y: p.map(|p| p[1]),
                    z: p.map(|p| p[2]),
                }
            })
            .collect();
        let arcs = g
            .arcs
            .iter()
            .map(|a| ArcDocument {
                from: a.from.0,
                to: a.to.0,
                distance_km: a.cost.distance_km,
                nav_unreliability: a.cost.nav_unreliability,
                collision_risk: a.cost.collision_risk,
                threat_exposure: a.cost.threat_exposure,
            })
            .collect();
        GraphDocument { nodes, arcs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> AirspaceGraph {
        AirspaceGraph::new(
            3,
            vec![
                Arc::new(0, 1, CostComponents::distance(1.0)),
                Arc::new(1, 2, CostComponents::distance(1.0)),
                Arc::new(2, 0, CostComponents::distance(1.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn arc_cost_examples() {
        let zero = Arc::new(0, 1, CostComponents::default());
        let w = CostWeights::new(1.0, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(arc_cost(&zero, &w), 0.0);

        let five = Arc::new(0, 1, CostComponents::distance(5.0));
        assert_eq!(arc_cost(&five, &CostWeights::distance_only()), 5.0);

        // 1*1 + 2*0.5 + 3*0.1 + 4*0.2
        let mixed = Arc::new(
            0,
            1,
            CostComponents {
                distance_km: 1.0,
                nav_unreliability: 0.5,
                collision_risk: 0.1,
                threat_exposure: 0.2,
            },
        );
        assert!((arc_cost(&mixed, &w) - 3.1).abs() < 1e-12);
    }

    #[test]
    fn weights_reject_all_zero_and_negative() {
        assert!(CostWeights::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(CostWeights::new(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(CostWeights::new(f64::NAN, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn adjacency_of_cycle() {
        let g = cycle3();
        let out: Vec<_> = g.out_arcs(NodeId(1)).unwrap().map(|a| (a.from.0, a.to.0)).collect();
        assert_eq!(out, vec![(1, 2)]);
        let inc: Vec<_> = g.in_arcs(NodeId(1)).unwrap().map(|a| (a.from.0, a.to.0)).collect();
        assert_eq!(inc, vec![(0, 1)]);
        assert!(matches!(g.out_arcs(NodeId(3)), Err(GraphError::InvalidNode(NodeId(3)))));
    }

    #[test]
    fn isolated_node_has_no_arcs() {
        let g = AirspaceGraph::new(2, vec![]).unwrap();
        assert_eq!(g.out_arcs(NodeId(0)).unwrap().count(), 0);
        assert_eq!(g.in_arcs(NodeId(1)).unwrap().count(), 0);
    }

    #[test]
    fn validate_reports_each_rule() {
        assert!(cycle3().validate().is_empty());

        let v = validate_parts(2, &[Arc::new(1, 1, CostComponents::default())], &[]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::SelfLoop);
        assert_eq!(v[0].location, "/graph/arcs/0");

        let dup = [
            Arc::new(0, 1, CostComponents::default()),
            Arc::new(0, 1, CostComponents::distance(2.0)),
        ];
        let v = validate_parts(2, &dup, &[]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::DuplicateArc);
        assert_eq!(v[0].location, "/graph/arcs/1");

        let v = validate_parts(2, &[Arc::new(0, 7, CostComponents::default())], &[]);
        assert_eq!(v[0].kind, ViolationKind::UnknownEndpoint);

        let risky = CostComponents {
            collision_risk: 1.5,
            ..CostComponents::default()
        };
        let v = validate_parts(2, &[Arc::new(0, 1, risky)], &[]);
        assert_eq!(v[0].kind, ViolationKind::CostOutOfRange);
    }

    #[test]
    fn document_rejects_sparse_ids() {
        let doc: GraphDocument = serde_json::from_str(
            r#"{"nodes":[{"id":0},{"id":5}],"arcs":[{"from":0,"to":1,"distance_km":1.0}]}"#,
        )
        .unwrap();
        let v = doc.validate();
        assert!(v.iter().any(|v| v.kind == ViolationKind::NonDenseNodeIds));
        assert!(doc.build().is_err());
    }

    #[test]
    fn weights_deserialize_with_defaults() {
        let w: CostWeights = serde_json::from_str(r#"{"w_dist": 2.0}"#).unwrap();
        assert_eq!(w.as_array(), [2.0, 0.0, 0.0, 0.0]);
        assert!(serde_json::from_str::<CostWeights>("{}").is_err());
    }
}
