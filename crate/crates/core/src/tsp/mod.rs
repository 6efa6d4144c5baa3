//! Euclidean TSP: tours, uncrossing, k-opt neighborhoods, a Karp-style
//! constructive tour and the comb instance on which 2-opt gets stuck.

mod karp;
mod kopt;
mod lower_bound;
mod neighbors;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{LocalSearchProblem, SearchRng};
use crate::error::{Error, Result};
use crate::geom::{dist, segments_properly_intersect, Point, Segment};

pub use karp::{karp_partition_tour, karp_partition_tour_with_threshold, MAX_BOX_POINTS};
pub use kopt::{kopt_improving_neighbor, verify_local_optimality};
pub use lower_bound::{lower_bound_instance, LowerBound};
pub use neighbors::NeighborLists;

/// Above this size the 2-opt and Or-opt scans only consider the
/// [`CANDIDATE_NEIGHBORS`] nearest neighbors of each endpoint.
pub const EXHAUSTIVE_MAX: usize = 500;
pub const CANDIDATE_NEIGHBORS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspInstance {
    points: Vec<Point>,
}

impl TspInstance {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::validation(format!(
                "a tour needs at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::validation(format!("non-finite point {p:?}")));
        }
        Ok(TspInstance { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub(crate) fn d(&self, u: usize, v: usize) -> f64 {
        dist(self.points[u], self.points[v])
    }
}

/// A cyclic visiting order. Serialized as a JSON array of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tour {
    order: Vec<usize>,
}

impl Tour {
    /// Checks that `order` is a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(Error::validation(format!(
                    "order is not a permutation of 0..{n}: offending index {v}"
                )));
            }
            seen[v] = true;
        }
        Ok(Tour { order })
    }

    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Tour::new(order.clone()).is_ok());
        Tour { order }
    }

    pub fn identity(n: usize) -> Self {
        Tour {
            order: (0..n).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn validate_for(&self, inst: &TspInstance) -> Result<()> {
        if self.order.len() != inst.len() {
            return Err(Error::validation(format!(
                "tour visits {} points but the instance has {}",
                self.order.len(),
                inst.len()
            )));
        }
        Tour::new(self.order.clone()).map(|_| ())
    }

    /// Starts at 0 and continues toward the smaller-index neighbor of 0.
    pub fn canonical(&self) -> Tour {
        let n = self.order.len();
        if n == 0 {
            return self.clone();
        }
        let start = self.order.iter().position(|&v| v == 0).unwrap_or(0);
        let next = self.order[(start + 1) % n];
        let prev = self.order[(start + n - 1) % n];
        let order = if next <= prev {
            (0..n).map(|k| self.order[(start + k) % n]).collect()
        } else {
            (0..n).map(|k| self.order[(start + n - k) % n]).collect()
        };
        Tour { order }
    }

    /// Undirected edges `(min, max)` of the cycle.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.order.len();
        (0..n)
            .map(|i| {
                let (u, v) = (self.order[i], self.order[(i + 1) % n]);
                (u.min(v), u.max(v))
            })
            .collect()
    }

    /// `|edges(self) △ edges(other)|`.
    pub fn edge_symmetric_difference(&self, other: &Tour) -> usize {
        let a: HashSet<_> = self.edges().into_iter().collect();
        let b: HashSet<_> = other.edges().into_iter().collect();
        a.symmetric_difference(&b).count()
    }
}

pub fn tour_length(inst: &TspInstance, t: &Tour) -> Result<f64> {
    t.validate_for(inst)?;
    Ok(cycle_length(inst, t.order()))
}

pub(crate) fn cycle_length(inst: &TspInstance, order: &[usize]) -> f64 {
    let n = order.len();
    (0..n).map(|i| inst.d(order[i], order[(i + 1) % n])).sum()
}

/// All pairs of tour positions `(i, j)` whose edges
/// `(t[i], t[i+1])` and `(t[j], t[j+1])` properly intersect.
pub fn crossing_pairs(inst: &TspInstance, t: &Tour) -> Vec<(usize, usize)> {
    let order = t.order();
    let n = order.len();
    let seg = |i: usize| {
        Segment::new(
            inst.points[order[i]],
            inst.points[order[(i + 1) % n]],
        )
    };
    let mut out = Vec::new();
    for i in 0..n {
        let si = seg(i);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_properly_intersect(&si, &seg(j)) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn is_non_crossing(inst: &TspInstance, t: &Tour) -> bool {
    crossing_pairs(inst, t).is_empty()
}

/// Repeated 2-exchanges on crossing edge pairs until no two edges cross.
///
/// A proper crossing always admits a strictly shorter reconnection, so the
/// loop terminates and the length never increases.
pub fn uncross(inst: &TspInstance, t: &Tour) -> Tour {
    let mut order = t.order().to_vec();
    let n = order.len();
    if n < 4 {
        return Tour::from_order_unchecked(order);
    }
    loop {
        let mut changed = false;
        for i in 0..n - 2 {
            let mut j = i + 2;
            while j < n {
                if i == 0 && j == n - 1 {
                    break;
                }
                let (a, b) = (order[i], order[i + 1]);
                let (c, d) = (order[j], order[(j + 1) % n]);
                let s1 = Segment::new(inst.points[a], inst.points[b]);
                let s2 = Segment::new(inst.points[c], inst.points[d]);
                if segments_properly_intersect(&s1, &s2) {
                    let delta = inst.d(a, c) + inst.d(b, d) - inst.d(a, b) - inst.d(c, d);
                    if delta < 0.0 {
                        order[i + 1..=j].reverse();
                        changed = true;
                    }
                }
                j += 1;
            }
        }
        if !changed {
            break;
        }
    }
    Tour::from_order_unchecked(order)
}

/// Greedy nearest-neighbor tour starting from point 0.
pub fn nearest_neighbor_tour(inst: &TspInstance) -> Tour {
    let n = inst.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = 0;
    visited[0] = true;
    order.push(0);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for v in 0..n {
            if !visited[v] {
                let d = inst.d(cur, v);
                if d < best_d {
                    best_d = d;
                    best = v;
                }
            }
        }
        visited[best] = true;
        order.push(best);
        cur = best;
    }
    Tour::from_order_unchecked(order)
}

/// TSP with the 2-opt / Or-opt / 3-opt neighborhood, restricted to
/// non-crossing tours.
pub struct TspProblem<'a> {
    inst: &'a TspInstance,
    neighbors: Option<NeighborLists>,
}

impl<'a> TspProblem<'a> {
    pub fn new(inst: &'a TspInstance) -> Self {
        let neighbors = (inst.len() > EXHAUSTIVE_MAX)
            .then(|| NeighborLists::build(inst.points(), CANDIDATE_NEIGHBORS));
        TspProblem { inst, neighbors }
    }

    pub fn instance(&self) -> &TspInstance {
        self.inst
    }
}

impl LocalSearchProblem for TspProblem<'_> {
    type Solution = Tour;

    fn size(&self) -> usize {
        self.inst.len()
    }

    fn validate(&self, sol: &Tour) -> Result<()> {
        sol.validate_for(self.inst)
    }

    fn validate_budget(&self, budget: usize) -> Result<()> {
        kopt::check_budget(budget)
    }

    fn cost(&self, sol: &Tour) -> f64 {
        cycle_length(self.inst, sol.order())
    }

    fn prepare(&self, sol: Tour) -> Tour {
        uncross(self.inst, &sol)
    }

    fn improving_neighbor(
        &self,
        sol: &Tour,
        budget: usize,
        threshold: f64,
        rng: &mut SearchRng,
    ) -> Result<Option<Tour>> {
        kopt::check_budget(budget)?;
        let offset = rng.random_range(0..self.inst.len());
        Ok(kopt::search(
            self.inst,
            sol.order(),
            budget,
            threshold,
            offset,
            self.neighbors.as_ref(),
        ))
    }
}
