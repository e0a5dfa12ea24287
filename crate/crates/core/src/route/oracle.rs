//! Exhaustive-enumeration solvers.
//!
//! These share no code with the fast solvers and exist to check them on
//! small instances. Each one refuses instances above its size guard.

use super::{CostMatrix, GtspInstance, PathQuery, PathResult, RouteError};
use crate::graph::{arc_cost, AirspaceGraph, NodeId};

pub const SHORTEST_PATH_ORACLE_MAX_NODES: usize = 10;
pub const PERMUTATION_ORACLE_MAX_NODES: usize = 10;

/// Minimum over every simple `s → d` path, found by depth-first enumeration.
pub fn shortest_path_oracle(graph: &AirspaceGraph, query: &PathQuery) -> Result<PathResult, RouteError> {
    let n = graph.node_count();
    if n > SHORTEST_PATH_ORACLE_MAX_NODES {
        return Err(RouteError::TooLarge {
            size: n,
            limit: SHORTEST_PATH_ORACLE_MAX_NODES,
        });
    }
    for node in [query.source, query.destination] {
        if !graph.contains(node) {
            return Err(RouteError::InvalidNode(node));
        }
    }
    if query.is_trivial() {
        return Ok(PathResult {
            arcs: vec![],
            visited: vec![query.source],
            total_cost: 0.0,
        });
    }

    struct Search<'a> {
        graph: &'a AirspaceGraph,
        query: &'a PathQuery,
        on_path: Vec<bool>,
        stack: Vec<NodeId>,
        best: Option<(f64, Vec<NodeId>)>,
    }

    impl Search<'_> {
        fn visit(&mut self, node: NodeId, cost: f64) {
            if node == self.query.destination {
                if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    self.best = Some((cost, self.stack.clone()));
                }
                return;
            }
            let next: Vec<_> = self
                .graph
                .arcs()
                .iter()
                .filter(|a| a.from == node && !self.on_path[a.to.0])
                .map(|a| (a.to, arc_cost(a, &self.query.weights)))
                .collect();
            for (to, c) in next {
                self.on_path[to.0] = true;
                self.stack.push(to);
                self.visit(to, cost + c);
                self.stack.pop();
                self.on_path[to.0] = false;
            }
        }
    }

    let mut search = Search {
        graph,
        query,
        on_path: vec![false; n],
        stack: vec![query.source],
        best: None,
    };
    search.on_path[query.source.0] = true;
    search.visit(query.source, 0.0);
    let (total_cost, visited) = search.best.ok_or(RouteError::NoPath {
        from: query.source,
        to: query.destination,
    })?;
    let arcs = visited.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(PathResult {
        arcs,
        visited,
        total_cost,
    })
}

/// Visit every permutation of `items` (Heap's algorithm).
fn for_each_permutation(items: &mut [usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    if k <= 1 {
        f(items);
        return;
    }
    for i in 0..k {
        for_each_permutation(items, k - 1, f);
        let swap = if k.is_multiple_of(2) { i } else { 0 };
        items.swap(swap, k - 1);
    }
}

/// Minimum closed tour by trying all `(n−1)!` orders that start at `depot`.
/// Returns `(cost, order)`; the cost is `INFINITY` when no finite tour exists.
pub fn atsp_brute_force(costs: &CostMatrix, depot: usize) -> Result<(f64, Vec<usize>), RouteError> {
    let n = costs.size();
    if n > PERMUTATION_ORACLE_MAX_NODES {
        return Err(RouteError::TooLarge {
            size: n,
            limit: PERMUTATION_ORACLE_MAX_NODES,
        });
    }
    let mut rest: Vec<usize> = (0..n).filter(|&v| v != depot).collect();
    let mut best = (f64::INFINITY, Vec::new());
    let len = rest.len();
    for_each_permutation(&mut rest, len, &mut |perm| {
        let mut order = Vec::with_capacity(n);
        order.push(depot);
        order.extend_from_slice(perm);
        let c = costs.tour_cost(&order);
        if c < best.0 || best.1.is_empty() {
            best = (c, order);
        }
    });
    Ok(best)
}

/// Minimum GTSP cycle: one representative per cluster, any cluster order.
/// Returns `(cost, representatives)` with the first cluster's node first.
pub fn gtsp_brute_force(instance: &GtspInstance) -> Result<(f64, Vec<usize>), RouteError> {
    let m = instance.clusters.len();
    if m > PERMUTATION_ORACLE_MAX_NODES {
        return Err(RouteError::TooLarge {
            size: m,
            limit: PERMUTATION_ORACLE_MAX_NODES,
        });
    }
    let mut best = (f64::INFINITY, Vec::new());
    let mut choice = vec![0usize; m];
    loop {
        let reps: Vec<usize> = (0..m).map(|c| instance.clusters[c][choice[c]]).collect();
        let mut rest: Vec<usize> = (1..m).collect();
        let len = rest.len();
        for_each_permutation(&mut rest, len, &mut |perm| {
            let mut order = vec![reps[0]];
            order.extend(perm.iter().map(|&c| reps[c]));
            let c = instance.costs.tour_cost(&order);
            if c < best.0 || best.1.is_empty() {
                best = (c, order);
            }
        });
        // Odometer over representative choices.
        let mut k = 0;
        while k < m {
            choice[k] += 1;
            if choice[k] < instance.clusters[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == m {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Arc, CostComponents, CostWeights};

    #[test]
    fn single_arc() {
        let g = AirspaceGraph::new(2, vec![Arc::new(0, 1, CostComponents::distance(7.0))]).unwrap();
        let r = shortest_path_oracle(&g, &PathQuery::new(0, 1, CostWeights::default())).unwrap();
        assert_eq!(r.total_cost, 7.0);
    }

    #[test]
    fn guard() {
        let g = AirspaceGraph::new(11, vec![]).unwrap();
        let err = shortest_path_oracle(&g, &PathQuery::new(0, 1, CostWeights::default())).unwrap_err();
        assert!(matches!(err, RouteError::TooLarge { size: 11, .. }));
    }

    #[test]
    fn permutation_count() {
        let mut items = vec![0, 1, 2, 3];
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(&mut items, 4, &mut |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 24);
    }
}
