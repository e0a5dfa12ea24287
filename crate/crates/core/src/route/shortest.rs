use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Cost, PathQuery, PathResult, RouteError};
use crate::graph::{arc_cost, AirspaceGraph, CostWeights, NodeId};

/// Single-source shortest-path tree under non-negative arc costs.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    source: NodeId,
    dist: Vec<f64>,
    pred: Vec<Option<NodeId>>,
}

impl ShortestPathTree {
    /// Label-setting search from `source`. Ties pop the lowest node index
    /// first and a label is only replaced by a strictly cheaper one, so the
    /// tree is fully determined by the graph.
    pub fn build(graph: &AirspaceGraph, source: NodeId, weights: &CostWeights) -> Result<Self, RouteError> {
        if !graph.contains(source) {
            return Err(RouteError::InvalidNode(source));
        }
        let n = graph.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source.0] = 0.0;
        heap.push(Reverse((Cost(0.0), source)));
        while let Some(Reverse((Cost(d), u))) = heap.pop() {
            if done[u.0] {
                continue;
            }
            done[u.0] = true;
            for arc in graph.out_arcs(u)? {
                let v = arc.to;
                if done[v.0] {
                    continue;
                }
                let candidate = d + arc_cost(arc, weights);
                if candidate < dist[v.0] {
                    dist[v.0] = candidate;
                    pred[v.0] = Some(u);
                    heap.push(Reverse((Cost(candidate), v)));
                }
            }
        }
        Ok(Self { source, dist, pred })
    }

    pub fn distance(&self, node: NodeId) -> Option<f64> {
        self.dist.get(node.0).copied().filter(|d| d.is_finite())
    }

    /// Path from the tree root to `target`, with the cost re-summed along
    /// the arcs in travel order.
    pub fn path_to(&self, graph: &AirspaceGraph, weights: &CostWeights, target: NodeId) -> Result<PathResult, RouteError> {
        if !graph.contains(target) {
            return Err(RouteError::InvalidNode(target));
        }
        if self.distance(target).is_none() {
            return Err(RouteError::NoPath {
                from: self.source,
                to: target,
            });
        }
        let mut visited = vec![target];
        let mut cur = target;
        while let Some(p) = self.pred[cur.0] {
            visited.push(p);
            cur = p;
        }
        visited.reverse();
        debug_assert_eq!(visited[0], self.source);
        let mut arcs = Vec::with_capacity(visited.len().saturating_sub(1));
        let mut total_cost = 0.0;
        for w in visited.windows(2) {
            let arc = graph.arc(w[0], w[1]).expect("tree arcs exist in the graph");
            total_cost += arc_cost(arc, weights);
            arcs.push((w[0], w[1]));
        }
        Ok(PathResult {
            arcs,
            visited,
            total_cost,
        })
    }
}

/// Minimum-cost route from `query.source` to `query.destination`.
///
/// The flow-conservation program with out-degree `<= 1` has an integral LP
/// relaxation under non-negative costs, so a label-setting search returns
/// its optimum; [`super::constraints`] re-checks the program's constraints
/// on the result.
pub fn shortest_path(graph: &AirspaceGraph, query: &PathQuery) -> Result<PathResult, RouteError> {
    for node in [query.source, query.destination] {
        if !graph.contains(node) {
            return Err(RouteError::InvalidNode(node));
        }
    }
    if query.is_trivial() {
        return Ok(PathResult {
            arcs: Vec::new(),
            visited: vec![query.source],
            total_cost: 0.0,
        });
    }
    ShortestPathTree::build(graph, query.source, &query.weights)?.path_to(graph, &query.weights, query.destination)
}
