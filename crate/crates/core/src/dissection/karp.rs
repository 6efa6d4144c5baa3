use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Rect};

/// A leaf box of the median dissection and the points it holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KarpBox {
    pub rect: Rect,
    pub points: Vec<usize>,
}

/// Recursively halves the point set across the longer side of its box until
/// every box holds at most `threshold` points.
///
/// The cut sits midway between the two median coordinates, so the boxes tile
/// the bounding box of `points`. Boxes are returned in depth-first order,
/// lower/left half first.
pub fn karp_dissection(points: &[Point], threshold: usize) -> Result<Vec<KarpBox>> {
    if threshold < 2 {
        return Err(Error::validation(format!(
            "dissection threshold must be at least 2, got {threshold}"
        )));
    }
    let Some(root) = Rect::bounding(points.iter().copied()) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut stack = vec![(root, (0..points.len()).collect::<Vec<_>>())];
    while let Some((rect, mut idx)) = stack.pop() {
        if idx.len() <= threshold {
            out.push(KarpBox { rect, points: idx });
            continue;
        }
        let vertical = rect.width() >= rect.height();
        let key = |i: usize| if vertical { points[i].x } else { points[i].y };
        idx.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let upper = idx.split_off(idx.len() / 2);
        let cut = 0.5 * (key(idx[idx.len() - 1]) + key(upper[0]));
        let (lo, hi) = if vertical {
            (
                Rect { xmax: cut, ..rect },
                Rect { xmin: cut, ..rect },
            )
        } else {
            (
                Rect { ymax: cut, ..rect },
                Rect { ymin: cut, ..rect },
            )
        };
        stack.push((hi, upper));
        stack.push((lo, idx));
    }
    Ok(out)
}

/// Total perimeter of the boxes.
pub fn perimeter_sum(boxes: &[KarpBox]) -> f64 {
    boxes.iter().map(|b| b.rect.perimeter()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::gen_uniform;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn four_points_fit_one_box() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let boxes = karp_dissection(&pts, 4).unwrap();
        assert_eq!(boxes.len(), 1);
        assert_relative_eq!(perimeter_sum(&boxes), 4.0);
    }

    #[test]
    fn collinear_points_split_at_median() {
        let pts: Vec<Point> = (0..8).map(|i| Point::new(i as f64 / 8.0, 0.0)).collect();
        let boxes = karp_dissection(&pts, 4).unwrap();
        assert_eq!(boxes.len(), 2);
        assert_eq!(boxes[0].points, vec![0, 1, 2, 3]);
        assert_eq!(boxes[1].points, vec![4, 5, 6, 7]);
        assert_relative_eq!(boxes[0].rect.xmax, 3.5 / 8.0);
    }

    #[test]
    fn unit_square_halves() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(0.25, 1.0),
            Point::new(0.75, 0.0),
            Point::new(1.0, 1.0),
        ];
        let boxes = karp_dissection(&pts, 2).unwrap();
        assert_eq!(boxes.len(), 2);
        assert_relative_eq!(perimeter_sum(&boxes), 6.0);
    }

    #[test]
    fn uniform_counts_within_band() {
        let pts = gen_uniform(1024, 9);
        let boxes = karp_dissection(&pts, 16).unwrap();
        for b in &boxes {
            assert!((8..=16).contains(&b.points.len()), "{}", b.points.len());
            for &i in &b.points {
                assert!(b.rect.contains(pts[i]));
            }
        }
    }

    #[test]
    fn rejects_tiny_threshold() {
        assert!(karp_dissection(&gen_uniform(5, 1), 1).is_err());
    }

    proptest! {
        #[test]
        fn boxes_partition_points_and_tile_area(seed in 0u64..500, n in 2usize..200, t in 2usize..20) {
            let pts = gen_uniform(n, seed);
            let boxes = karp_dissection(&pts, t).unwrap();
            let mut seen = vec![0; n];
            for b in &boxes {
                for &i in &b.points { seen[i] += 1; }
                prop_assert!(b.points.len() <= t);
                if n >= t { prop_assert!(b.points.len() >= t.div_ceil(2)); }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            let bb = Rect::bounding(pts.iter().copied()).unwrap();
            let area: f64 = boxes.iter().map(|b| b.rect.width() * b.rect.height()).sum();
            prop_assert!((area - bb.width() * bb.height()).abs() < 1e-9);
        }
    }
}
