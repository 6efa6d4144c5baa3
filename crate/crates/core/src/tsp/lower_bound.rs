use serde::Serialize;

use super::{tour_length, uncross, Tour, TspInstance};
use crate::error::{Error, Result};
use crate::geom::Point;

/// Horizontal offset of a tooth's right column.
const COLUMN_GAP: f64 = 0.6;
/// Distance between neighboring teeth.
const TOOTH_SPACING: f64 = 2.4;
/// Vertical shift of the right column relative to the odd heights.
const RIGHT_SHIFT: f64 = -0.55;
/// Depth of the return spine below the teeth.
const SPINE_DEPTH: f64 = 4.0;

/// A comb of `k` teeth with a 2-optimal long tour and a short tour.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBound {
    pub instance: TspInstance,
    pub bad: Tour,
    pub good: Tour,
    pub ratio: f64,
}

/// Builds the comb.
///
/// Tooth `j` has a left column at `x = j * TOOTH_SPACING` with points at
/// heights `0, 2, 4, ...` and a right column `COLUMN_GAP` further right at
/// heights `1 + RIGHT_SHIFT, 3 + RIGHT_SHIFT, ...`, `2k` points per column.
/// One spine point sits under every tooth. `good` zigzags through each tooth;
/// `bad` walks up the left column and down the right one. Both return along
/// the spine; `good` is then uncrossed. The point set is scaled into the unit square.
pub fn lower_bound_instance(k: usize) -> Result<LowerBound> {
    if k < 2 {
        return Err(Error::validation(format!("the comb needs k >= 2 teeth, got {k}")));
    }
    let m = 2 * k;
    let mut raw = Vec::with_capacity(k * (2 * m + 1));
    let left = |j: usize, i: usize| j * 2 * m + 2 * i;
    let right = |j: usize, i: usize| j * 2 * m + 2 * i + 1;
    for j in 0..k {
        let x = j as f64 * TOOTH_SPACING;
        for i in 0..m {
            raw.push((x, 2.0 * i as f64));
            raw.push((x + COLUMN_GAP, 2.0 * i as f64 + 1.0 + RIGHT_SHIFT));
        }
    }
    let spine_start = raw.len();
    for j in 0..k {
        raw.push((j as f64 * TOOTH_SPACING, -SPINE_DEPTH));
    }

    let (min_x, max_x) = (0.0, (k - 1) as f64 * TOOTH_SPACING + COLUMN_GAP);
    let (min_y, max_y) = (-SPINE_DEPTH, 2.0 * (m - 1) as f64 + 1.0 + RIGHT_SHIFT);
    let scale = (max_x - min_x).max(max_y - min_y);
    let points: Vec<Point> = raw
        .into_iter()
        .map(|(x, y)| Point::new((x - min_x) / scale, (y - min_y) / scale))
        .collect();

    let spine = (0..k).rev().map(|j| spine_start + j);
    let mut bad = Vec::with_capacity(points.len());
    let mut good = Vec::with_capacity(points.len());
    for j in 0..k {
        bad.extend((0..m).map(|i| left(j, i)));
        bad.extend((0..m).rev().map(|i| right(j, i)));
        let zigzag = (0..m).flat_map(|i| [left(j, i), right(j, i)]);
        if j % 2 == 0 {
            good.extend(zigzag);
        } else {
            good.extend(zigzag.rev());
        }
    }
    bad.extend(spine.clone());
    good.extend(spine);

    let instance = TspInstance::new(points)?;
    let bad = Tour::new(bad)?;
    let good = uncross(&instance, &Tour::new(good)?);
    let ratio = tour_length(&instance, &bad)? / tour_length(&instance, &good)?;
    Ok(LowerBound {
        instance,
        bad,
        good,
        ratio,
    })
}
