use super::{atsp_exact, atsp_heuristic, CostMatrix, PathResult, RouteError, ShortestPathTree, TourResult, HELD_KARP_MAX_NODES};
use crate::graph::{AirspaceGraph, CostWeights, NodeId};

/// Depot-to-depot visit of a set of targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub depot: NodeId,
    pub targets: Vec<NodeId>,
    pub weights: CostWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Held–Karp when the stop count allows it, heuristic otherwise.
    #[default]
    Auto,
    /// Held–Karp or [`RouteError::TooLarge`].
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    /// Depot followed by the targets in visiting order.
    pub stops: Vec<NodeId>,
    /// One shortest path per consecutive stop pair, ending back at the depot.
    pub legs: Vec<PathResult>,
    /// Tour over stop indices (`0` is the depot, `k` is `targets[k-1]`).
    pub tour: TourResult,
    pub total_cost: f64,
}

impl MissionPlan {
    /// Node sequence flown, with leg joins listed once.
    pub fn visited(&self) -> Vec<NodeId> {
        let mut out = vec![self.stops[0]];
        for leg in &self.legs {
            out.extend_from_slice(&leg.visited[1..]);
        }
        out
    }
}

pub fn plan_mission(graph: &AirspaceGraph, mission: &Mission) -> Result<MissionPlan, RouteError> {
    plan_mission_with(graph, mission, SolverChoice::Auto, 0)
}

/// Plan a closed mission: build the stop-to-stop shortest-path cost matrix,
/// solve the tour over it, then expand each tour arc into its path.
///
/// An unreachable stop pair fails with [`RouteError::NoPath`] naming the
/// lowest-indexed pair.
pub fn plan_mission_with(
    graph: &AirspaceGraph,
    mission: &Mission,
    choice: SolverChoice,
    seed: u64,
) -> Result<MissionPlan, RouteError> {
    let mut stops = vec![mission.depot];
    stops.extend_from_slice(&mission.targets);
    for &s in &stops {
        if !graph.contains(s) {
            return Err(RouteError::InvalidNode(s));
        }
    }
    for (k, s) in stops.iter().enumerate() {
        if stops[..k].contains(s) {
            return Err(RouteError::InvalidInstance(format!("node {s} appears twice among depot and targets")));
        }
    }
    if mission.targets.is_empty() {
        return Ok(MissionPlan {
            stops,
            legs: vec![],
            tour: TourResult {
                order: vec![0],
                total_cost: 0.0,
                exact: true,
            },
            total_cost: 0.0,
        });
    }

    let n = stops.len();
    let trees = stops
        .iter()
        .map(|&s| ShortestPathTree::build(graph, s, &mission.weights))
        .collect::<Result<Vec<_>, _>>()?;
    let mut costs = CostMatrix::new(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = trees[i].distance(stops[j]).ok_or(RouteError::NoPath {
                from: stops[i],
                to: stops[j],
            })?;
            costs.set(i, j, d);
        }
    }

    let tour = match choice {
        SolverChoice::Exact => atsp_exact(&costs, 0)?,
        SolverChoice::Heuristic => atsp_heuristic(&costs, 0, seed)?,
        SolverChoice::Auto if n <= HELD_KARP_MAX_NODES => atsp_exact(&costs, 0)?,
        SolverChoice::Auto => atsp_heuristic(&costs, 0, seed)?,
    };

    let legs = tour
        .arcs()
        .map(|(i, j)| trees[i].path_to(graph, &mission.weights, stops[j]))
        .collect::<Result<Vec<_>, _>>()?;
    let total_cost = tour.total_cost;
    Ok(MissionPlan {
        stops: tour.order.iter().map(|&k| stops[k]).collect(),
        legs,
        tour,
        total_cost,
    })
}
