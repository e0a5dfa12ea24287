use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CostMatrix, RouteError, TourResult};

/// Largest instance [`atsp_exact`] accepts; the table has `2^(n−1)·(n−1)`
/// entries.
pub const HELD_KARP_MAX_NODES: usize = 14;

/// Exact minimum closed tour through every node, starting at `depot`.
///
/// Held–Karp dynamic program over subsets. A tour is a single permutation,
/// so in/out-degree one and the absence of subtours hold by construction.
/// Ties go to the lowest predecessor index.
pub fn atsp_exact(costs: &CostMatrix, depot: usize) -> Result<TourResult, RouteError> {
    let n = costs.size();
    if n > HELD_KARP_MAX_NODES {
        return Err(RouteError::TooLarge {
            size: n,
            limit: HELD_KARP_MAX_NODES,
        });
    }
    costs.check_square_tour_input(depot)?;

    let others: Vec<usize> = (0..n).filter(|&v| v != depot).collect();
    let m = others.len();
    let full = (1usize << m) - 1;
    let idx = |mask: usize, j: usize| mask * m + j;
    let mut dp = vec![f64::INFINITY; (full + 1) * m];
    let mut pred = vec![usize::MAX; (full + 1) * m];
    for j in 0..m {
        dp[idx(1 << j, j)] = costs.get(depot, others[j]);
    }
    for mask in 1..=full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let here = dp[idx(mask, j)];
            if !here.is_finite() {
                continue;
            }
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = here + costs.get(others[j], others[k]);
                if cand < dp[idx(next, k)] {
                    dp[idx(next, k)] = cand;
                    pred[idx(next, k)] = j;
                }
            }
        }
    }

    let mut best = f64::INFINITY;
    let mut last = usize::MAX;
    for j in 0..m {
        let cand = dp[idx(full, j)] + costs.get(others[j], depot);
        if cand < best {
            best = cand;
            last = j;
        }
    }
    if !best.is_finite() {
        return Err(RouteError::Infeasible("no finite tour exists".into()));
    }

    let mut rev = Vec::with_capacity(m);
    let mut mask = full;
    let mut j = last;
    while j != usize::MAX {
        rev.push(others[j]);
        let p = pred[idx(mask, j)];
        mask &= !(1 << j);
        j = p;
    }
    let mut order = vec![depot];
    order.extend(rev.into_iter().rev());
    let total_cost = costs.tour_cost(&order);
    Ok(TourResult {
        order,
        total_cost,
        exact: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeuristicOptions {
    /// Random perturbations tried after the first local optimum.
    pub kicks: usize,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        Self { kicks: 32 }
    }
}

/// Closed tour by nearest-neighbour construction and orientation-preserving
/// local search; see [`atsp_heuristic_with`].
pub fn atsp_heuristic(costs: &CostMatrix, depot: usize, seed: u64) -> Result<TourResult, RouteError> {
    atsp_heuristic_with(costs, depot, seed, HeuristicOptions::default())
}

/// Nearest-neighbour tour improved by Or-opt (segments of 1–3 nodes moved
/// without reversal) and sequential 3-opt segment exchange, then iterated
/// with seeded random segment-exchange kicks. No move reverses a segment,
/// so every delta is exact for asymmetric costs.
pub fn atsp_heuristic_with(
    costs: &CostMatrix,
    depot: usize,
    seed: u64,
    options: HeuristicOptions,
) -> Result<TourResult, RouteError> {
    costs.check_square_tour_input(depot)?;
    let n = costs.size();
    let work = Working::new(costs);

    let mut tour = nearest_neighbour(&work, depot);
    local_search(&work, &mut tour);
    let mut best = tour.clone();
    let mut best_cost = work.tour_cost(&best);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n >= 4 {
        for _ in 0..options.kicks {
            let mut trial = best.clone();
            for _ in 0..2 {
                let mut cuts = [0usize; 3];
                for c in &mut cuts {
                    *c = rng.random_range(1..n);
                }
                cuts.sort_unstable();
                let [i, j, k] = cuts;
                if i < j && j < k {
                    exchange(&mut trial, i, j, k + 1);
                }
            }
            local_search(&work, &mut trial);
            let c = work.tour_cost(&trial);
            if c < best_cost - EPS {
                best = trial;
                best_cost = c;
            }
        }
    }

    let total_cost = costs.tour_cost(&best);
    if !total_cost.is_finite() {
        return Err(RouteError::Infeasible("heuristic found no finite tour".into()));
    }
    Ok(TourResult {
        order: best,
        total_cost,
        exact: false,
    })
}

const EPS: f64 = 1e-12;

/// Costs with missing arcs replaced by a finite penalty so deltas stay
/// well-defined.
struct Working {
    n: usize,
    c: Vec<f64>,
}

impl Working {
    fn new(costs: &CostMatrix) -> Self {
        let n = costs.size();
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let v = costs.get(i, j);
                if i != j && v.is_finite() {
                    max = max.max(v);
                }
            }
        }
        let big = (max + 1.0) * (n as f64 + 1.0) * 1e3;
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = costs.get(i, j);
                c[i * n + j] = if v.is_finite() { v } else { big };
            }
        }
        Self { n, c }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.n + j]
    }

    fn tour_cost(&self, t: &[usize]) -> f64 {
        let n = t.len();
        (0..n).map(|k| self.get(t[k], t[(k + 1) % n])).sum()
    }
}

fn nearest_neighbour(work: &Working, depot: usize) -> Vec<usize> {
    let n = work.n;
    let mut used = vec![false; n];
    used[depot] = true;
    let mut tour = vec![depot];
    let mut cur = depot;
    for _ in 1..n {
        let next = (0..n)
            .filter(|&v| !used[v])
            .fold(None::<(usize, f64)>, |acc, v| {
                let c = work.get(cur, v);
                match acc {
                    Some((_, b)) if b <= c => acc,
                    _ => Some((v, c)),
                }
            })
            .expect("unvisited node remains")
            .0;
        used[next] = true;
        tour.push(next);
        cur = next;
    }
    tour
}

/// `A B C D → A C B D` where `B = t[i..j]`, `C = t[j..k]`.
fn exchange(t: &mut [usize], i: usize, j: usize, k: usize) {
    t[i..k].rotate_left(j - i);
}

/// Cost change of [`exchange`] on a tour with the depot fixed at index 0.
fn exchange_delta(work: &Working, t: &[usize], i: usize, j: usize, k: usize) -> f64 {
    let n = t.len();
    let a = t[i - 1];
    let b0 = t[i];
    let b1 = t[j - 1];
    let c0 = t[j];
    let c1 = t[k - 1];
    let d0 = t[k % n];
    work.get(a, c0) + work.get(c1, b0) + work.get(b1, d0) - work.get(a, b0) - work.get(b1, c0) - work.get(c1, d0)
}

fn or_opt_pass(work: &Working, t: &mut [usize]) -> bool {
    let n = t.len();
    for len in 1..=3usize {
        for i in 1..n {
            if i + len > n {
                break;
            }
            // Move segment t[i..i+len] later: exchange with t[i+len..k].
            for k in (i + len + 1)..=n {
                if exchange_delta(work, t, i, i + len, k) < -EPS {
                    exchange(t, i, i + len, k);
                    return true;
                }
            }
            // Move it earlier: exchange t[h..i] with the segment.
            for h in 1..i {
                if exchange_delta(work, t, h, i, i + len) < -EPS {
                    exchange(t, h, i, i + len);
                    return true;
                }
            }
        }
    }
    false
}

fn three_opt_pass(work: &Working, t: &mut [usize]) -> bool {
    let n = t.len();
    for i in 1..n {
        for j in (i + 1)..n {
            for k in (j + 1)..=n {
                if exchange_delta(work, t, i, j, k) < -EPS {
                    exchange(t, i, j, k);
                    return true;
                }
            }
        }
    }
    false
}

fn local_search(work: &Working, t: &mut [usize]) {
    loop {
        if or_opt_pass(work, t) {
            continue;
        }
        if !three_opt_pass(work, t) {
            break;
        }
    }
}
