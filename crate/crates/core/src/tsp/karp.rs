use super::{uncross, Tour, TspInstance};
use crate::dissection::{karp_dissection, KarpBox};
use crate::error::{Error, Result};
use crate::geom::{dist, Point};
use crate::oracles::held_karp_tsp;

/// Largest box the exact per-box solver accepts.
pub const MAX_BOX_POINTS: usize = crate::oracles::HELD_KARP_MAX;

/// Karp tour with boxes of at most `ceil(1/epsilon^2)` points.
pub fn karp_partition_tour(inst: &TspInstance, epsilon: f64) -> Result<Tour> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::validation(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let threshold = (1.0 / (epsilon * epsilon) - 1e-9).ceil().max(2.0);
    if threshold > MAX_BOX_POINTS as f64 {
        return Err(Error::validation(format!(
            "epsilon = {epsilon} gives boxes of {threshold} points; the exact box solver \
             takes at most {MAX_BOX_POINTS}, use a box threshold of at most {MAX_BOX_POINTS} \
             (epsilon >= {:.4})",
            1.0 / (MAX_BOX_POINTS as f64).sqrt()
        )));
    }
    karp_partition_tour_with_threshold(inst, threshold as usize)
}

/// Solves every box of the median dissection exactly, chains the box tours
/// in boustrophedon order of the boxes and uncrosses the result.
pub fn karp_partition_tour_with_threshold(inst: &TspInstance, threshold: usize) -> Result<Tour> {
    if !(2..=MAX_BOX_POINTS).contains(&threshold) {
        return Err(Error::validation(format!(
            "box threshold must lie in 2..={MAX_BOX_POINTS}, got {threshold}"
        )));
    }
    let pts = inst.points();
    let boxes = boustrophedon(karp_dissection(pts, threshold)?);

    let mut order: Vec<usize> = Vec::with_capacity(pts.len());
    for (bi, b) in boxes.iter().enumerate() {
        let cycle = box_cycle(pts, &b.points)?;
        let entry = match order.last() {
            None => 0,
            Some(&last) => nearest_in(pts, &cycle, pts[last]),
        };
        let target = match boxes.get(bi + 1) {
            Some(next) => next.rect.center(),
            None => pts[order.first().copied().unwrap_or(cycle[entry])],
        };
        let len = cycle.len();
        let forward_end = cycle[(entry + len - 1) % len];
        let backward_end = cycle[(entry + 1) % len];
        if dist(pts[forward_end], target) <= dist(pts[backward_end], target) {
            order.extend((0..len).map(|s| cycle[(entry + s) % len]));
        } else {
            order.extend((0..len).map(|s| cycle[(entry + len - s) % len]));
        }
    }
    Ok(uncross(inst, &Tour::new(order)?))
}

/// Orders boxes row by row, rows bottom to top, alternating direction.
fn boustrophedon(mut boxes: Vec<KarpBox>) -> Vec<KarpBox> {
    let rows = ((boxes.len() as f64).sqrt().round() as usize).max(1);
    boxes.sort_by(|a, b| a.rect.center().y.total_cmp(&b.rect.center().y));
    let per_row = boxes.len().div_ceil(rows);
    let mut out = Vec::with_capacity(boxes.len());
    let mut rest = boxes;
    let mut r = 0;
    while !rest.is_empty() {
        let tail = rest.split_off(per_row.min(rest.len()));
        let mut row = rest;
        row.sort_by(|a, b| a.rect.center().x.total_cmp(&b.rect.center().x));
        if r % 2 == 1 {
            row.reverse();
        }
        out.extend(row);
        rest = tail;
        r += 1;
    }
    out
}

/// Optimal cyclic order of the points of one box, as global indices.
fn box_cycle(pts: &[Point], members: &[usize]) -> Result<Vec<usize>> {
    if members.len() <= 3 {
        return Ok(members.to_vec());
    }
    let local: Vec<Point> = members.iter().map(|&i| pts[i]).collect();
    let opt = held_karp_tsp(&local)?;
    Ok(opt.optimal_solution.order().iter().map(|&i| members[i]).collect())
}

fn nearest_in(pts: &[Point], cycle: &[usize], from: Point) -> usize {
    (0..cycle.len())
        .min_by(|&a, &b| dist(pts[cycle[a]], from).total_cmp(&dist(pts[cycle[b]], from)))
        .expect("boxes are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::gen_uniform;
    use crate::oracles::held_karp_tsp;
    use crate::tsp::{is_non_crossing, tour_length, tests::square};
    use approx::assert_relative_eq;

    #[test]
    fn single_box_is_exact() {
        let inst = square();
        let t = karp_partition_tour_with_threshold(&inst, 4).unwrap();
        assert_relative_eq!(tour_length(&inst, &t).unwrap(), 4.0, epsilon = 1e-12);

        let inst = TspInstance::new(gen_uniform(12, 8)).unwrap();
        let t = karp_partition_tour_with_threshold(&inst, 12).unwrap();
        let opt = held_karp_tsp(inst.points()).unwrap().optimal_cost;
        assert_relative_eq!(tour_length(&inst, &t).unwrap(), opt, epsilon = 1e-9);
    }

    #[test]
    fn uniform_64_is_valid() {
        let inst = TspInstance::new(gen_uniform(64, 3)).unwrap();
        let t = karp_partition_tour(&inst, 1.0 / 8f64.sqrt()).unwrap();
        t.validate_for(&inst).unwrap();
        assert!(is_non_crossing(&inst, &t));
    }

    #[test]
    fn uniform_200_length_band() {
        let inst = TspInstance::new(gen_uniform(200, 5)).unwrap();
        let t = karp_partition_tour(&inst, 0.25).unwrap();
        let ratio = tour_length(&inst, &t).unwrap() / 200f64.sqrt();
        assert!((0.6..=1.1).contains(&ratio), "{ratio}");
    }

    #[test]
    fn rejects_oversized_boxes() {
        let inst = TspInstance::new(gen_uniform(50, 1)).unwrap();
        assert!(karp_partition_tour(&inst, 0.2).is_err());
        assert!(karp_partition_tour_with_threshold(&inst, 19).is_err());
    }
}
