//! Integer-program constraints re-derived from solutions.
//!
//! A routing solution is encoded as 0/1 arc indicators `X_ij`; these helpers
//! evaluate the constraints of the routing programs on that encoding.

use std::collections::BTreeSet;

use super::{PathResult, TourResult};
use crate::graph::{AirspaceGraph, NodeId};

/// `Σ_{δ⁺(i)} X_ij − Σ_{δ⁻(i)} X_ji` for every node `i`.
pub fn flow_balance(graph: &AirspaceGraph, path: &PathResult) -> Vec<i64> {
    let selected: BTreeSet<(NodeId, NodeId)> = path.arcs.iter().copied().collect();
    graph
        .nodes()
        .map(|i| {
            let out = graph
                .out_arcs(i)
                .expect("node from graph")
                .filter(|a| selected.contains(&(a.from, a.to)))
                .count() as i64;
            let inc = graph
                .in_arcs(i)
                .expect("node from graph")
                .filter(|a| selected.contains(&(a.from, a.to)))
                .count() as i64;
            out - inc
        })
        .collect()
}

/// Flow conservation: `+1` at the source, `−1` at the destination, `0`
/// elsewhere (all zeros for a trivial query). Also requires that every
/// selected arc exists in the graph.
pub fn satisfies_flow_conservation(graph: &AirspaceGraph, source: NodeId, destination: NodeId, path: &PathResult) -> bool {
    if path.arcs.iter().any(|&(i, j)| graph.arc(i, j).is_none()) {
        return false;
    }
    flow_balance(graph, path).iter().enumerate().all(|(i, &b)| {
        let expected = if source == destination {
            0
        } else if i == source.0 {
            1
        } else if i == destination.0 {
            -1
        } else {
            0
        };
        b == expected
    })
}

/// `Σ_{δ⁺(i)} X_ij <= 1` for every node.
pub fn out_degree_at_most_one(graph: &AirspaceGraph, path: &PathResult) -> bool {
    let mut out = vec![0usize; graph.node_count()];
    for &(i, _) in &path.arcs {
        out[i.0] += 1;
    }
    out.iter().all(|&d| d <= 1)
}

/// Head-to-tail chaining with no repeated node.
pub fn is_simple_chain(path: &PathResult) -> bool {
    let chained = path.arcs.windows(2).all(|w| w[0].1 == w[1].0)
        && path.arcs.iter().zip(path.visited.windows(2)).all(|(a, v)| a.0 == v[0] && a.1 == v[1]);
    let distinct: BTreeSet<_> = path.visited.iter().collect();
    chained && distinct.len() == path.visited.len() && path.arcs.len() + 1 == path.visited.len()
}

/// `X_ij` of a tour as an `n × n` 0/1 matrix.
pub fn tour_indicators(n: usize, tour: &TourResult) -> Vec<Vec<u8>> {
    let mut x = vec![vec![0u8; n]; n];
    for (i, j) in tour.arcs() {
        x[i][j] += 1;
    }
    x
}

/// In-degree and out-degree one at every vertex.
pub fn degrees_are_one(x: &[Vec<u8>]) -> bool {
    let n = x.len();
    (0..n).all(|i| {
        let out: u32 = x[i].iter().map(|&v| v as u32).sum();
        let inc: u32 = (0..n).map(|j| x[j][i] as u32).sum();
        out == 1 && inc == 1 && x[i][i] == 0
    })
}

/// The selected arcs form one cycle through every vertex (no subtours).
pub fn is_single_cycle(x: &[Vec<u8>]) -> bool {
    let n = x.len();
    if n == 0 || !degrees_are_one(x) {
        return false;
    }
    let succ = |i: usize| x[i].iter().position(|&v| v == 1).expect("degree one");
    let mut cur = 0;
    for step in 1..=n {
        cur = succ(cur);
        if cur == 0 {
            return step == n;
        }
    }
    false
}
