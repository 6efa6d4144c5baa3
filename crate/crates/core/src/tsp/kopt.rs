//! 2-opt, Or-opt and 3-opt neighborhoods.
//!
//! Every move class replaces at most three tour edges, so a move changes at
//! most `2 * 3` edges of the symmetric difference: 2-opt needs budget 2,
//! Or-opt and 3-opt need budget 3. Budget 4 uses the same move classes.

use std::ops::ControlFlow;

use super::{cycle_length, NeighborLists, Tour, TspInstance, EXHAUSTIVE_MAX};
use crate::error::{Error, Result};
use crate::geom::{segments_properly_intersect, Segment};

/// Exhaustive 3-opt is only attempted up to this many points.
pub const THREE_OPT_EXHAUSTIVE_MAX: usize = 200;

/// Longest segment relocated by Or-opt.
pub const OR_OPT_MAX_SEGMENT: usize = 3;

const IMPROVEMENT_TOL: f64 = 1e-10;

pub(crate) fn check_budget(p: usize) -> Result<()> {
    if (2..=4).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "TSP swap budget must be 2, 3 or 4, got {p}"
        )))
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    /// Reverse the path between edges at positions `x < y`.
    TwoOpt { x: usize, y: usize },
    /// Cut edges at positions `i < j < k` and reconnect the two middle
    /// segments in one of the four pure 3-opt ways.
    ThreeOpt {
        i: usize,
        j: usize,
        k: usize,
        kind: u8,
    },
    /// Move the segment starting at position `start` of length `len` so it
    /// follows node `after`, optionally reversed.
    OrOpt {
        start: usize,
        len: usize,
        after: usize,
        reversed: bool,
    },
}

impl Move {
    /// New order and the edges the move introduces.
    fn apply(&self, order: &[usize]) -> (Vec<usize>, Vec<(usize, usize)>) {
        let n = order.len();
        match *self {
            Move::TwoOpt { x, y } => {
                let mut out = order.to_vec();
                out[x + 1..=y].reverse();
                let edges = vec![
                    (order[x], order[y]),
                    (order[x + 1], order[(y + 1) % n]),
                ];
                (out, edges)
            }
            Move::ThreeOpt { i, j, k, kind } => {
                let s1 = &order[i + 1..=j];
                let s2 = &order[j + 1..=k];
                let (a, b, c) = (order[i], order[i + 1], order[j]);
                let (d, e, f) = (order[j + 1], order[k], order[(k + 1) % n]);
                let mut out = Vec::with_capacity(n);
                out.extend_from_slice(&order[..=i]);
                let edges = match kind {
                    0 => {
                        out.extend_from_slice(s2);
                        out.extend_from_slice(s1);
                        vec![(a, d), (e, b), (c, f)]
                    }
                    1 => {
                        out.extend_from_slice(s2);
                        out.extend(s1.iter().rev());
                        vec![(a, d), (e, c), (b, f)]
                    }
                    2 => {
                        out.extend(s2.iter().rev());
                        out.extend_from_slice(s1);
                        vec![(a, e), (d, b), (c, f)]
                    }
                    _ => {
                        out.extend(s1.iter().rev());
                        out.extend(s2.iter().rev());
                        vec![(a, c), (b, e), (d, f)]
                    }
                };
                out.extend_from_slice(&order[k + 1..]);
                (out, edges)
            }
            Move::OrOpt {
                start,
                len,
                after,
                reversed,
            } => {
                let seg: Vec<usize> = (0..len).map(|t| order[(start + t) % n]).collect();
                let prev = order[(start + n - 1) % n];
                let next = order[(start + len) % n];
                let mut out = Vec::with_capacity(n);
                let mut succ_after = usize::MAX;
                for t in 0..n - len {
                    let v = order[(start + len + t) % n];
                    out.push(v);
                    if v == after {
                        succ_after = order[(start + len + t + 1) % n];
                        if reversed {
                            out.extend(seg.iter().rev());
                        } else {
                            out.extend_from_slice(&seg);
                        }
                    }
                }
                let (head, tail) = if reversed {
                    (seg[len - 1], seg[0])
                } else {
                    (seg[0], seg[len - 1])
                };
                // `after == prev` is excluded by the enumerators, so the
                // successor of `after` is unchanged outside the segment.
                (out, vec![(prev, next), (after, head), (tail, succ_after)])
            }
        }
    }
}

fn three_opt_deltas(inst: &TspInstance, order: &[usize], i: usize, j: usize, k: usize) -> [f64; 4] {
    let n = order.len();
    let (a, b, c) = (order[i], order[i + 1], order[j]);
    let (d, e, f) = (order[j + 1], order[k], order[(k + 1) % n]);
    let removed = inst.d(a, b) + inst.d(c, d) + inst.d(e, f);
    [
        inst.d(a, d) + inst.d(e, b) + inst.d(c, f) - removed,
        inst.d(a, d) + inst.d(e, c) + inst.d(b, f) - removed,
        inst.d(a, e) + inst.d(d, b) + inst.d(c, f) - removed,
        inst.d(a, c) + inst.d(b, e) + inst.d(d, f) - removed,
    ]
}

fn for_each_two_opt<T>(
    inst: &TspInstance,
    order: &[usize],
    mut f: impl FnMut(f64, Move) -> ControlFlow<T>,
) -> Option<T> {
    let n = order.len();
    for x in 0..n {
        let (a, b) = (order[x], order[(x + 1) % n]);
        let dab = inst.d(a, b);
        for y in x + 2..n {
            if x == 0 && y == n - 1 {
                continue;
            }
            let (c, d) = (order[y], order[(y + 1) % n]);
            let delta = inst.d(a, c) + inst.d(b, d) - dab - inst.d(c, d);
            if let ControlFlow::Break(t) = f(delta, Move::TwoOpt { x, y }) {
                return Some(t);
            }
        }
    }
    None
}

fn for_each_three_opt<T>(
    inst: &TspInstance,
    order: &[usize],
    mut f: impl FnMut(f64, Move) -> ControlFlow<T>,
) -> Option<T> {
    let n = order.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let deltas = three_opt_deltas(inst, order, i, j, k);
                for (kind, &delta) in deltas.iter().enumerate() {
                    let mv = Move::ThreeOpt {
                        i,
                        j,
                        k,
                        kind: kind as u8,
                    };
                    if let ControlFlow::Break(t) = f(delta, mv) {
                        return Some(t);
                    }
                }
            }
        }
    }
    None
}

fn or_opt_delta(inst: &TspInstance, order: &[usize], start: usize, len: usize, after: usize, succ: usize, reversed: bool) -> f64 {
    let n = order.len();
    let first = order[start % n];
    let last = order[(start + len - 1) % n];
    let prev = order[(start + n - 1) % n];
    let next = order[(start + len) % n];
    let removed = inst.d(prev, first) + inst.d(last, next) - inst.d(prev, next);
    let (head, tail) = if reversed { (last, first) } else { (first, last) };
    inst.d(after, head) + inst.d(tail, succ) - inst.d(after, succ) - removed
}

/// Or-opt moves, inserting after every node (exhaustive) or only next to
/// the candidate neighbors of the segment endpoints.
fn for_each_or_opt<T>(
    inst: &TspInstance,
    order: &[usize],
    pos: &[usize],
    neighbors: Option<&NeighborLists>,
    mut f: impl FnMut(f64, Move) -> ControlFlow<T>,
) -> Option<T> {
    let n = order.len();
    let mut targets: Vec<(usize, bool)> = Vec::new();
    for len in 1..=OR_OPT_MAX_SEGMENT {
        if n < len + 3 {
            break;
        }
        for start in 0..n {
            let in_seg = |v: usize| (pos[v] + n - start) % n < len;
            let prev = order[(start + n - 1) % n];
            let first = order[start];
            let last = order[(start + len - 1) % n];
            targets.clear();
            match neighbors {
                None => {
                    for &v in order {
                        targets.push((v, false));
                        if len > 1 {
                            targets.push((v, true));
                        }
                    }
                }
                Some(nl) => {
                    for &c in nl.of(first) {
                        targets.push((c, false));
                        targets.push((order[(pos[c] + n - 1) % n], true));
                    }
                    for &c in nl.of(last) {
                        targets.push((c, true));
                        targets.push((order[(pos[c] + n - 1) % n], false));
                    }
                    if len == 1 {
                        for t in targets.iter_mut() {
                            t.1 = false;
                        }
                    }
                }
            }
            for &(after, reversed) in &targets {
                if after == prev || in_seg(after) {
                    continue;
                }
                let succ = order[(pos[after] + 1) % n];
                let delta = or_opt_delta(inst, order, start, len, after, succ, reversed);
                let mv = Move::OrOpt {
                    start,
                    len,
                    after,
                    reversed,
                };
                if let ControlFlow::Break(t) = f(delta, mv) {
                    return Some(t);
                }
            }
        }
    }
    None
}

/// 2-opt restricted to candidate neighbor lists: for an improving move one
/// of the two new edges is shorter than the removed edge it shares an
/// endpoint with, so scanning neighbors in increasing distance can stop early.
fn for_each_pruned_two_opt<T>(
    inst: &TspInstance,
    order: &[usize],
    pos: &[usize],
    nl: &NeighborLists,
    mut f: impl FnMut(f64, Move) -> ControlFlow<T>,
) -> Option<T> {
    let n = order.len();
    for x in 0..n {
        let a = order[x];
        for forward in [true, false] {
            let step = |p: usize| if forward { (p + 1) % n } else { (p + n - 1) % n };
            let b = order[step(pos[a])];
            let dab = inst.d(a, b);
            for &c in nl.of(a) {
                let dac = inst.d(a, c);
                if dac >= dab {
                    break;
                }
                let d = order[step(pos[c])];
                if c == b || d == a {
                    continue;
                }
                let delta = dac + inst.d(b, d) - dab - inst.d(c, d);
                let (e1, e2) = if forward {
                    (pos[a], pos[c])
                } else {
                    ((pos[a] + n - 1) % n, (pos[c] + n - 1) % n)
                };
                let mv = Move::TwoOpt {
                    x: e1.min(e2),
                    y: e1.max(e2),
                };
                if let ControlFlow::Break(t) = f(delta, mv) {
                    return Some(t);
                }
            }
        }
    }
    None
}

/// True if any of `new_edges` properly crosses another edge of `order`.
fn introduces_crossing(inst: &TspInstance, order: &[usize], new_edges: &[(usize, usize)]) -> bool {
    let n = order.len();
    let pts = inst.points();
    new_edges.iter().any(|&(u, v)| {
        let s = Segment::new(pts[u], pts[v]);
        (0..n).any(|i| {
            let (x, y) = (order[i], order[(i + 1) % n]);
            x != u
                && x != v
                && y != u
                && y != v
                && segments_properly_intersect(&s, &Segment::new(pts[x], pts[y]))
        })
    })
}

fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// First move (scanning from `offset`) whose result is a non-crossing tour
/// of length at most `threshold`.
pub(crate) fn search(
    inst: &TspInstance,
    order: &[usize],
    p: usize,
    threshold: f64,
    offset: usize,
    neighbors: Option<&NeighborLists>,
) -> Option<Tour> {
    let n = order.len();
    if n < 4 {
        return None;
    }
    let mut rot = Vec::with_capacity(n);
    rot.extend_from_slice(&order[offset % n..]);
    rot.extend_from_slice(&order[..offset % n]);
    let cost = cycle_length(inst, &rot);
    let limit = threshold - cost;

    let try_move = |delta: f64, mv: Move| -> ControlFlow<Tour> {
        if delta > limit + 1e-12 {
            return ControlFlow::Continue(());
        }
        let (cand, new_edges) = mv.apply(&rot);
        if cycle_length(inst, &cand) > threshold || introduces_crossing(inst, &cand, &new_edges) {
            return ControlFlow::Continue(());
        }
        ControlFlow::Break(Tour::from_order_unchecked(cand))
    };

    let pos = positions(&rot);
    let exhaustive = neighbors.is_none() || n <= EXHAUSTIVE_MAX;
    let found = match (exhaustive, neighbors) {
        (false, Some(nl)) => for_each_pruned_two_opt(inst, &rot, &pos, nl, try_move),
        _ => for_each_two_opt(inst, &rot, try_move),
    };
    if found.is_some() || p < 3 {
        return found;
    }
    let nl = if exhaustive { None } else { neighbors };
    if let Some(t) = for_each_or_opt(inst, &rot, &pos, nl, try_move) {
        return Some(t);
    }
    if n <= THREE_OPT_EXHAUSTIVE_MAX {
        return for_each_three_opt(inst, &rot, try_move);
    }
    None
}

/// Some non-crossing tour within `p` edge swaps of `t` whose length is at
/// most `threshold`, if one exists among the implemented move classes.
pub fn kopt_improving_neighbor(
    inst: &TspInstance,
    t: &Tour,
    p: usize,
    threshold: f64,
) -> Result<Option<Tour>> {
    check_budget(p)?;
    t.validate_for(inst)?;
    let nl = (inst.len() > EXHAUSTIVE_MAX)
        .then(|| NeighborLists::build(inst.points(), super::CANDIDATE_NEIGHBORS));
    Ok(search(inst, t.order(), p, threshold, 0, nl.as_ref()))
}

/// Exhaustive check that no 2-opt move (and for `p = 3`, no 3-opt move,
/// which includes every Or-opt relocation) strictly shortens `t`.
/// Crossing constraints are not applied.
pub fn verify_local_optimality(inst: &TspInstance, t: &Tour, p: usize) -> Result<bool> {
    if !(2..=3).contains(&p) {
        return Err(Error::validation(format!(
            "local optimality can be verified for p = 2 or 3, got {p}"
        )));
    }
    t.validate_for(inst)?;
    let order = t.order();
    let improving = |delta: f64, _: Move| {
        if delta < -IMPROVEMENT_TOL {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    if for_each_two_opt(inst, order, improving).is_some() {
        return Ok(false);
    }
    if p == 3 && for_each_three_opt(inst, order, improving).is_some() {
        return Ok(false);
    }
    Ok(true)
}
