use super::{CostMatrix, RouteError, TourResult};

/// Generalized (clustered) TSP: visit exactly one node of every cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct GtspInstance {
    pub clusters: Vec<Vec<usize>>,
    pub costs: CostMatrix,
}

impl GtspInstance {
    pub fn new(clusters: Vec<Vec<usize>>, costs: CostMatrix) -> Result<Self, RouteError> {
        let inst = Self { clusters, costs };
        inst.cluster_of()?;
        Ok(inst)
    }

    /// Cluster index of every node; checks the partition.
    fn cluster_of(&self) -> Result<Vec<usize>, RouteError> {
        let n = self.costs.size();
        if self.clusters.len() < 2 {
            return Err(RouteError::InvalidInstance(format!(
                "need at least 2 clusters, got {}",
                self.clusters.len()
            )));
        }
        let mut owner = vec![usize::MAX; n];
        for (c, members) in self.clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(RouteError::EmptyCluster(c));
            }
            for &v in members {
                if v >= n {
                    return Err(RouteError::InvalidInstance(format!("node {v} outside the cost matrix")));
                }
                if owner[v] != usize::MAX {
                    return Err(RouteError::InvalidInstance(format!("node {v} is in more than one cluster")));
                }
                owner[v] = c;
            }
        }
        if let Some(v) = owner.iter().position(|&c| c == usize::MAX) {
            return Err(RouteError::InvalidInstance(format!("node {v} belongs to no cluster")));
        }
        Ok(owner)
    }

    /// `Σ |c_ij|` over finite arcs between different clusters.
    fn inter_cluster_cost_sum(&self, owner: &[usize]) -> f64 {
        let n = self.costs.size();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let c = self.costs.get(i, j);
                if owner[i] != owner[j] && c.is_finite() {
                    sum += c.abs();
                }
            }
        }
        sum
    }
}

/// One representative per cluster in visiting order, with its cycle cost in
/// the original instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GtspTour {
    pub representatives: Vec<usize>,
    pub total_cost: f64,
}

/// ATSP produced from a [`GtspInstance`] together with what is needed to map
/// an ATSP tour back.
#[derive(Debug, Clone, PartialEq)]
pub struct NoonBeanTransform {
    pub costs: CostMatrix,
    pub penalty: f64,
    cluster_of: Vec<usize>,
    successor: Vec<usize>,
    original: CostMatrix,
}

/// Noon–Bean reduction with penalty `P = 1 + Σ|c_ij|`.
pub fn noon_bean(instance: &GtspInstance) -> Result<NoonBeanTransform, RouteError> {
    let owner = instance.cluster_of()?;
    let penalty = 1.0 + instance.inter_cluster_cost_sum(&owner);
    build(instance, owner, penalty)
}

/// Noon–Bean reduction with an explicit penalty, which must exceed the sum of
/// inter-cluster costs.
pub fn noon_bean_with_penalty(instance: &GtspInstance, penalty: f64) -> Result<NoonBeanTransform, RouteError> {
    let owner = instance.cluster_of()?;
    let sum = instance.inter_cluster_cost_sum(&owner);
    if !(penalty > sum) {
        return Err(RouteError::Construction(format!(
            "penalty {penalty} does not exceed the cost sum {sum}"
        )));
    }
    build(instance, owner, penalty)
}

/// Each cluster becomes a zero-cost cycle in ascending node order; the arc
/// `u → w` between clusters moves to `pred(u) → w` with cost `c_uw + P`.
/// Every other arc is absent.
fn build(instance: &GtspInstance, owner: Vec<usize>, penalty: f64) -> Result<NoonBeanTransform, RouteError> {
    let n = instance.costs.size();
    let mut successor = vec![0usize; n];
    let mut predecessor = vec![0usize; n];
    for members in &instance.clusters {
        let mut sorted = members.clone();
        sorted.sort_unstable();
        for (k, &v) in sorted.iter().enumerate() {
            let next = sorted[(k + 1) % sorted.len()];
            successor[v] = next;
            predecessor[next] = v;
        }
    }
    let mut costs = CostMatrix::new(n);
    for (v, &next) in successor.iter().enumerate() {
        if next != v {
            costs.set(v, next, 0.0);
        }
    }
    for u in 0..n {
        for w in 0..n {
            let c = instance.costs.get(u, w);
            if owner[u] != owner[w] && c.is_finite() {
                costs.set(predecessor[u], w, c + penalty);
            }
        }
    }
    Ok(NoonBeanTransform {
        costs,
        penalty,
        cluster_of: owner,
        successor,
        original: instance.costs.clone(),
    })
}

impl NoonBeanTransform {
    pub fn cluster_count(&self) -> usize {
        self.cluster_of.iter().max().map_or(0, |m| m + 1)
    }

    /// Constant `m·P` separating transformed and original optimal costs.
    pub fn offset(&self) -> f64 {
        self.cluster_count() as f64 * self.penalty
    }

    /// Recover the GTSP tour from an ATSP tour of [`Self::costs`].
    ///
    /// Each cluster must appear as one contiguous block that walks the
    /// intra-cluster cycle; the block's entry node is the representative.
    /// The result starts at the representative of cluster 0.
    pub fn back_map(&self, tour: &TourResult) -> Result<GtspTour, RouteError> {
        let n = self.cluster_of.len();
        let order = &tour.order;
        if order.len() != n {
            return Err(RouteError::InvalidInstance(format!(
                "tour has {} nodes, transform has {n}",
                order.len()
            )));
        }
        let start = (0..n)
            .find(|&k| self.cluster_of[order[(k + n - 1) % n]] != self.cluster_of[order[k]])
            .ok_or(RouteError::NotClusterContiguous)?;
        let rotated: Vec<usize> = (0..n).map(|k| order[(start + k) % n]).collect();

        let mut reps = Vec::new();
        let mut seen = vec![false; self.cluster_count()];
        let mut k = 0;
        while k < n {
            let entry = rotated[k];
            let c = self.cluster_of[entry];
            if seen[c] {
                return Err(RouteError::NotClusterContiguous);
            }
            seen[c] = true;
            reps.push(entry);
            let mut v = entry;
            k += 1;
            while k < n && self.cluster_of[rotated[k]] == c {
                if rotated[k] != self.successor[v] {
                    return Err(RouteError::NotClusterContiguous);
                }
                v = rotated[k];
                k += 1;
            }
            if self.successor[v] != entry {
                return Err(RouteError::NotClusterContiguous);
            }
        }
        let first = reps
            .iter()
            .position(|&r| self.cluster_of[r] == 0)
            .expect("cluster 0 is visited");
        reps.rotate_left(first);
        let total_cost = self.original.tour_cost(&reps);
        Ok(GtspTour {
            representatives: reps,
            total_cost,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::route::atsp_exact;
    use crate::route::oracle::{atsp_brute_force, gtsp_brute_force};

    fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> CostMatrix {
        let mut m = CostMatrix::new(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.set(i, j, f(i, j));
                }
            }
        }
        m
    }

    #[test]
    fn singleton_clusters_shift_by_constant() {
        let costs = matrix(4, |i, j| ((3 * i + 5 * j) % 7 + 1) as f64);
        let inst = GtspInstance::new((0..4).map(|v| vec![v]).collect(), costs.clone()).unwrap();
        let nb = noon_bean(&inst).unwrap();
        let atsp = atsp_exact(&nb.costs, 0).unwrap();
        let (plain, _) = atsp_brute_force(&costs, 0).unwrap();
        assert!((atsp.total_cost - nb.offset() - plain).abs() < 1e-9);
        let g = nb.back_map(&atsp).unwrap();
        assert_eq!(g.total_cost, plain);
    }

    #[test]
    fn three_pairs_match_brute_force() {
        let costs = matrix(6, |i, j| ((7 * i + 11 * j) % 13) as f64 + 0.5);
        let inst = GtspInstance::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]], costs).unwrap();
        let nb = noon_bean(&inst).unwrap();
        let atsp = atsp_exact(&nb.costs, 0).unwrap();
        let g = nb.back_map(&atsp).unwrap();
        let (brute, _) = gtsp_brute_force(&inst).unwrap();
        assert_eq!(g.total_cost, brute);
        assert_eq!(g.representatives.len(), 3);
    }

    #[test]
    fn rejects_small_penalty_and_empty_cluster() {
        let costs = matrix(3, |_, _| 2.0);
        let inst = GtspInstance::new(vec![vec![0], vec![1, 2]], costs.clone()).unwrap();
        // Inter-cluster arcs: 0↔1, 0↔2 → 4 arcs of cost 2.
        assert!(matches!(noon_bean_with_penalty(&inst, 8.0), Err(RouteError::Construction(_))));
        assert!(noon_bean_with_penalty(&inst, 8.5).is_ok());
        assert_eq!(
            GtspInstance::new(vec![vec![0, 1, 2], vec![]], costs.clone()).unwrap_err(),
            RouteError::EmptyCluster(1)
        );
        assert!(GtspInstance::new(vec![vec![0, 1, 2]], costs).is_err());
    }

    #[test]
    fn back_map_rejects_split_cluster() {
        let costs = matrix(4, |_, _| 1.0);
        let inst = GtspInstance::new(vec![vec![0, 1], vec![2, 3]], costs).unwrap();
        let nb = noon_bean(&inst).unwrap();
        let split = TourResult {
            order: vec![0, 2, 1, 3],
            total_cost: 0.0,
            exact: false,
        };
        assert_eq!(nb.back_map(&split).unwrap_err(), RouteError::NotClusterContiguous);
    }
}
