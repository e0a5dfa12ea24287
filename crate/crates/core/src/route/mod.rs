//! Route optimization over an [`AirspaceGraph`](crate::graph::AirspaceGraph).
//!
//! Two formulations are solved:
//!
//! * single origin–destination routing, minimizing `Σ c_ij X_ij` under flow
//!   conservation and out-degree `<= 1` ([`shortest_path`]);
//! * closed tours through a depot and a set of targets, where every visited
//!   vertex has in-degree and out-degree one ([`atsp_exact`],
//!   [`atsp_heuristic`]), including clustered instances reduced through
//!   [`noon_bean`].
//!
//! [`constraints`] re-derives the integer-program constraints from a solution
//! so that callers can assert them directly, and [`oracle`] holds the
//! exhaustive-enumeration solvers used to cross-check the fast paths.

mod atsp;
pub mod constraints;
mod mission;
mod noon_bean;
pub mod oracle;
mod shortest;

use std::fmt;

use thiserror::Error;

use crate::graph::{CostWeights, GraphError, NodeId};

pub use atsp::{atsp_exact, atsp_heuristic, atsp_heuristic_with, HeuristicOptions, HELD_KARP_MAX_NODES};
pub use mission::{plan_mission, plan_mission_with, Mission, MissionPlan, SolverChoice};
pub use noon_bean::{noon_bean, noon_bean_with_penalty, GtspInstance, GtspTour, NoonBeanTransform};
pub use shortest::{shortest_path, ShortestPathTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("node {0} is not in the graph")]
    InvalidNode(NodeId),
    #[error("no path from node {from} to node {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("instance of size {size} exceeds the limit of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("transformation cannot be constructed: {0}")]
    Construction(String),
    #[error("tour does not visit clusters contiguously")]
    NotClusterContiguous,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Origin–destination routing request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathQuery {
    pub source: NodeId,
    pub destination: NodeId,
    pub weights: CostWeights,
}

impl PathQuery {
    pub fn new(source: impl Into<NodeId>, destination: impl Into<NodeId>, weights: CostWeights) -> Self {
        Self {
            source: source.into(),
            destination: destination.into(),
            weights,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.source == self.destination
    }
}

/// Chained arc sequence from source to destination.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub arcs: Vec<(NodeId, NodeId)>,
    pub visited: Vec<NodeId>,
    pub total_cost: f64,
}

impl PathResult {
    pub fn source(&self) -> NodeId {
        self.visited[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.visited.last().expect("a path visits at least its source")
    }
}

/// Dense `n × n` cost matrix. Missing arcs are `f64::INFINITY`; the diagonal
/// is never read.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    /// All off-diagonal entries start as missing.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            data: vec![f64::INFINITY; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, RouteError> {
        let n = rows.len();
        let mut m = Self::new(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(RouteError::InvalidInstance(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, v) in row.into_iter().enumerate() {
                if v.is_nan() || v < 0.0 {
                    return Err(RouteError::InvalidInstance(format!(
                        "cost[{i}][{j}] = {v} is not a non-negative number"
                    )));
                }
                m.data[i * n + j] = v;
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Cost of the closed tour `order[0] → … → order[last] → order[0]`,
    /// summed in visiting order.
    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        if order.len() < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for w in order.windows(2) {
            total += self.get(w[0], w[1]);
        }
        total + self.get(order[order.len() - 1], order[0])
    }

    pub(crate) fn check_square_tour_input(&self, depot: usize) -> Result<(), RouteError> {
        if self.n < 2 {
            return Err(RouteError::InvalidInstance(format!(
                "a tour needs at least 2 nodes, got {}",
                self.n
            )));
        }
        if depot >= self.n {
            return Err(RouteError::InvalidInstance(format!(
                "depot {depot} outside matrix of size {}",
                self.n
            )));
        }
        for i in 0..self.n {
            let out = (0..self.n).any(|j| j != i && self.get(i, j).is_finite());
            let inc = (0..self.n).any(|j| j != i && self.get(j, i).is_finite());
            if !out || !inc {
                return Err(RouteError::Infeasible(format!(
                    "node {i} has no finite {} arc",
                    if out { "incoming" } else { "outgoing" }
                )));
            }
        }
        Ok(())
    }
}

/// Closed tour over the nodes of a [`CostMatrix`].
///
/// `order` starts at the depot and lists every node once; the tour returns
/// from the last entry to `order[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TourResult {
    pub order: Vec<usize>,
    pub total_cost: f64,
    /// `true` when produced by an exact solver.
    pub exact: bool,
}

impl TourResult {
    /// Selected arcs `X_ij = 1`, including the closing arc.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |k| (self.order[k], self.order[(k + 1) % n]))
    }
}

impl fmt::Display for TourResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.order.iter().enumerate() {
            if k > 0 {
                write!(f, " -> ")?;
            }
            write!(f, "{v}")?;
        }
        if let Some(first) = self.order.first() {
            write!(f, " -> {first}")?;
        }
        Ok(())
    }
}

/// Total order on non-NaN floats, used as a priority key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cost(pub f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
