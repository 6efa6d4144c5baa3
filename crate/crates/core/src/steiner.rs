//! Steiner trees as a set of extra points whose cost is the MST of the
//! terminals together with those points.

use std::f64::consts::FRAC_PI_3;

use serde::{Deserialize, Serialize};

use crate::engine::{LocalSearchProblem, SearchRng};
use crate::error::{Error, Result};
use crate::geom::{dist, fermat_point, geometric_median, mst_edges, mst_length, Point};

/// Steiner points closer than this are merged.
pub const MERGE_TOL: f64 = 1e-9;
const REFINE_STEPS: usize = 50;
const REFINE_TOL: f64 = 1e-9;
/// Two-point additions and exhaustive relocations are scanned only while
/// the tree has at most this many vertices.
const COMPOUND_MOVE_MAX: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinerInstance {
    terminals: Vec<Point>,
}

impl SteinerInstance {
    pub fn new(terminals: Vec<Point>) -> Result<Self> {
        if terminals.len() < 2 {
            return Err(Error::validation(format!(
                "need at least 2 terminals, got {}",
                terminals.len()
            )));
        }
        if let Some(p) = terminals.iter().find(|p| !p.is_finite()) {
            return Err(Error::validation(format!("non-finite terminal {p:?}")));
        }
        Ok(SteinerInstance { terminals })
    }

    pub fn terminals(&self) -> &[Point] {
        &self.terminals
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SteinerSolution {
    pub steiner_points: Vec<Point>,
}

impl SteinerSolution {
    pub fn new(steiner_points: Vec<Point>) -> Self {
        SteinerSolution { steiner_points }
    }

    pub fn empty() -> Self {
        SteinerSolution::default()
    }

    pub fn len(&self) -> usize {
        self.steiner_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steiner_points.is_empty()
    }
}

fn check_cardinality(inst: &SteinerInstance, sol: &SteinerSolution) -> Result<()> {
    if sol.len() > inst.len() {
        return Err(Error::validation(format!(
            "{} Steiner points exceed the {} terminals",
            sol.len(),
            inst.len()
        )));
    }
    if let Some(p) = sol.steiner_points.iter().find(|p| !p.is_finite()) {
        return Err(Error::validation(format!("non-finite Steiner point {p:?}")));
    }
    Ok(())
}

/// MST length over terminals and Steiner points.
pub fn steiner_cost(inst: &SteinerInstance, sol: &SteinerSolution) -> Result<f64> {
    check_cardinality(inst, sol)?;
    Ok(mst_length(&all_points(inst, &sol.steiner_points)))
}

fn all_points(inst: &SteinerInstance, extra: &[Point]) -> Vec<Point> {
    let mut all = Vec::with_capacity(inst.len() + extra.len());
    all.extend_from_slice(&inst.terminals);
    all.extend_from_slice(extra);
    all
}

/// Removes Steiner points, cheapest removal first, until at most `n` remain.
pub fn greedy_trim(inst: &SteinerInstance, sol: &SteinerSolution) -> SteinerSolution {
    let mut pts = sol.steiner_points.clone();
    while pts.len() > inst.len() {
        let drop = (0..pts.len())
            .map(|i| {
                let mut rest = pts.clone();
                rest.remove(i);
                (i, mst_length(&all_points(inst, &rest)))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .expect("nonempty");
        pts.remove(drop);
    }
    SteinerSolution::new(pts)
}

/// Drops Steiner points that coincide with a terminal or an earlier
/// Steiner point.
fn merge_duplicates(inst: &SteinerInstance, pts: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        let dup = inst
            .terminals
            .iter()
            .chain(out.iter())
            .any(|q| dist(p, *q) <= MERGE_TOL);
        if !dup {
            out.push(p);
        }
    }
    out
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// MST of `pts` plus one new point `x`, from the old tree edges and the
/// star around `x`. Returns the length and the tree neighbors of `x`.
fn insert_point(pts: &[Point], tree: &[(usize, usize)], x: Point) -> (f64, Vec<Point>) {
    let n = pts.len();
    let xi = n;
    let at = |i: usize| if i == xi { x } else { pts[i] };
    let mut edges: Vec<(f64, usize, usize)> = tree
        .iter()
        .map(|&(u, v)| (dist(pts[u], pts[v]), u, v))
        .chain((0..n).map(|v| (dist(x, pts[v]), xi, v)))
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut dsu = Dsu::new(n + 1);
    let mut total = 0.0;
    let mut around = Vec::new();
    for (w, u, v) in edges {
        if dsu.union(u, v) {
            total += w;
            if u == xi {
                around.push(at(v));
            }
        }
    }
    (total, around)
}

fn adjacency(n: usize, tree: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in tree {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj
}

fn all_angles_below_120(a: Point, b: Point, c: Point) -> bool {
    let angle = |p: Point, q: Point, r: Point| {
        let (ux, uy) = (q.x - p.x, q.y - p.y);
        let (vx, vy) = (r.x - p.x, r.y - p.y);
        let den = (ux * ux + uy * uy).sqrt() * (vx * vx + vy * vy).sqrt();
        if den == 0.0 {
            return std::f64::consts::PI;
        }
        ((ux * vx + uy * vy) / den).clamp(-1.0, 1.0).acos()
    };
    let limit = 2.0 * FRAC_PI_3;
    angle(a, b, c) < limit && angle(b, a, c) < limit && angle(c, a, b) < limit
}

/// Fermat points of every vertex and two of its tree neighbors, for the
/// triangles where the Fermat point is interior.
fn fermat_candidates(pts: &[Point], tree: &[(usize, usize)]) -> Vec<Point> {
    let adj = adjacency(pts.len(), tree);
    let mut out = Vec::new();
    for (v, nb) in adj.iter().enumerate() {
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if all_angles_below_120(pts[a], pts[v], pts[b]) {
                    out.push(fermat_point(pts[a], pts[v], pts[b]));
                }
            }
        }
    }
    out
}

/// Best of `x` and its Weiszfeld refinement over its tree neighbors after
/// insertion.
fn insert_refined(pts: &[Point], tree: &[(usize, usize)], x: Point) -> (f64, Point) {
    let (cost, around) = insert_point(pts, tree, x);
    let refined = geometric_median(&around, x, REFINE_STEPS, REFINE_TOL);
    let (cost_r, _) = insert_point(pts, tree, refined);
    if cost_r < cost {
        (cost_r, refined)
    } else {
        (cost, x)
    }
}

/// Some solution within `p` Steiner-point changes of `sol` with cost at most
/// `threshold`.
///
/// Moves, in scan order: delete one point; add one Fermat candidate; with
/// `p >= 2`, relocate a point to the geometric median of its tree
/// neighbors, relocate a point to a Fermat candidate, and add two
/// candidates. `p = 3` uses the same move classes as `p = 2`.
pub fn steiner_improving_neighbor(
    inst: &SteinerInstance,
    sol: &SteinerSolution,
    p: usize,
    threshold: f64,
) -> Result<Option<SteinerSolution>> {
    check_budget(p)?;
    check_cardinality(inst, sol)?;
    let n = inst.len();
    let s = &sol.steiner_points;
    let pts = all_points(inst, s);
    let finish = |v: Vec<Point>| Ok(Some(SteinerSolution::new(merge_duplicates(inst, v))));

    for i in 0..s.len() {
        let mut rest = s.clone();
        rest.remove(i);
        if mst_length(&all_points(inst, &rest)) <= threshold {
            return finish(rest);
        }
    }

    let tree = mst_edges(&pts);
    let candidates = fermat_candidates(&pts, &tree);
    if s.len() < n {
        for &c in &candidates {
            let (cost, x) = insert_refined(&pts, &tree, c);
            if cost <= threshold {
                let mut next = s.clone();
                next.push(x);
                return finish(next);
            }
        }
    }
    if p < 2 {
        return Ok(None);
    }

    let adj = adjacency(pts.len(), &tree);
    for i in 0..s.len() {
        let around: Vec<Point> = adj[n + i].iter().map(|&j| pts[j]).collect();
        let moved = geometric_median(&around, s[i], REFINE_STEPS, REFINE_TOL);
        let mut next = s.clone();
        next[i] = moved;
        if mst_length(&all_points(inst, &next)) <= threshold {
            return finish(next);
        }
    }

    if pts.len() > COMPOUND_MOVE_MAX {
        return Ok(None);
    }
    for i in 0..s.len() {
        let mut rest = s.clone();
        rest.remove(i);
        let rest_pts = all_points(inst, &rest);
        let rest_tree = mst_edges(&rest_pts);
        for c in fermat_candidates(&rest_pts, &rest_tree) {
            let (cost, x) = insert_refined(&rest_pts, &rest_tree, c);
            if cost <= threshold {
                rest.push(x);
                return finish(rest);
            }
        }
    }
    if s.len() + 2 <= n {
        for &c in &candidates {
            let (_, x) = insert_refined(&pts, &tree, c);
            let mut one = s.clone();
            one.push(x);
            let one_pts = all_points(inst, &one);
            let one_tree = mst_edges(&one_pts);
            for c2 in fermat_candidates(&one_pts, &one_tree) {
                let (cost, y) = insert_refined(&one_pts, &one_tree, c2);
                if cost <= threshold {
                    one.push(y);
                    return finish(one);
                }
            }
        }
    }
    Ok(None)
}

fn check_budget(p: usize) -> Result<()> {
    if (1..=3).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "Steiner swap budget must lie in 1..=3, got {p}"
        )))
    }
}

pub struct SteinerProblem<'a> {
    inst: &'a SteinerInstance,
}

impl<'a> SteinerProblem<'a> {
    pub fn new(inst: &'a SteinerInstance) -> Self {
        SteinerProblem { inst }
    }
}

impl LocalSearchProblem for SteinerProblem<'_> {
    type Solution = SteinerSolution;

    fn size(&self) -> usize {
        self.inst.len()
    }

    fn validate(&self, sol: &SteinerSolution) -> Result<()> {
        if let Some(p) = sol.steiner_points.iter().find(|p| !p.is_finite()) {
            return Err(Error::validation(format!("non-finite Steiner point {p:?}")));
        }
        Ok(())
    }

    fn validate_budget(&self, budget: usize) -> Result<()> {
        check_budget(budget)
    }

    fn cost(&self, sol: &SteinerSolution) -> f64 {
        mst_length(&all_points(self.inst, &sol.steiner_points))
    }

    fn prepare(&self, sol: SteinerSolution) -> SteinerSolution {
        greedy_trim(self.inst, &sol)
    }

    fn improving_neighbor(
        &self,
        sol: &SteinerSolution,
        budget: usize,
        threshold: f64,
        _rng: &mut SearchRng,
    ) -> Result<Option<SteinerSolution>> {
        steiner_improving_neighbor(self.inst, sol, budget, threshold)
    }
}
