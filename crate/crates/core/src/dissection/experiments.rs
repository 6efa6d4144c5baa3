use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adaptive::{adaptive_dissection, DissectionTree};
use super::assignment::{build_assignment, ServingPair};
use super::regions::{compute_regions, place_portals};
use crate::bench::derive_seed;
use crate::error::{Error, Result};
use crate::geom::{Point, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureRow {
    pub trial: usize,
    pub cost_e: f64,
    pub cost_e0: f64,
    /// `sum |d(c, E(c)) - d(c, E0(c))|` over `eps^2 ln(1/eps^2) sum (c_G + c_L)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureStats {
    pub rows: Vec<StructureRow>,
    pub mean_increase: f64,
    pub max_increase: f64,
    pub mean_ratio: f64,
    pub max_ratio: f64,
}

/// Portals per edge used by [`verify_structure_bound`].
pub fn structure_portals(epsilon: f64) -> usize {
    (1.0 / (epsilon * epsilon) - 1e-9).ceil().max(1.0) as usize
}

/// Cost change from the farther-facility assignment to the portal-respecting
/// one over `trials` independent dissections.
pub fn verify_structure_bound(
    clients: &[Point],
    local: &[Point],
    global: &[Point],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<StructureStats> {
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let pair = ServingPair::new(clients, local, global)?;
    let e0: Vec<f64> = (0..clients.len())
        .map(|c| pair.local.distances[c].max(pair.global.distances[c]))
        .collect();
    let cost_e0: f64 = e0.iter().sum();
    let inv = 1.0 / (epsilon * epsilon);
    let scale = inv.ln() / inv * pair.total();
    let p = structure_portals(epsilon);

    let rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let tree = adaptive_dissection(local, global, epsilon, derive_seed(seed, trial as u64))?;
            let regions = compute_regions(&tree);
            let portals = place_portals(&regions, p)?;
            let e = build_assignment(clients, local, global, &regions, &portals)?;
            let increase: f64 = e.distances.iter().zip(&e0).map(|(a, b)| (a - b).abs()).sum();
            let row = StructureRow {
                trial,
                cost_e: e.cost,
                cost_e0,
                ratio: if increase == 0.0 { 0.0 } else { increase / scale },
            };
            Ok((row, increase))
        })
        .collect::<Result<Vec<_>>>()?;

    let (rows, increases): (Vec<StructureRow>, Vec<f64>) = rows.into_iter().unzip();
    let n = rows.len() as f64;
    Ok(StructureStats {
        mean_increase: increases.iter().sum::<f64>() / n,
        max_increase: increases.iter().copied().fold(0.0, f64::max),
        mean_ratio: rows.iter().map(|r| r.ratio).sum::<f64>() / n,
        max_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        rows,
    })
}

/// Side-length buckets `[s_lo, s_hi)` for the cut experiment.
pub const CUT_BUCKETS: [(f64, f64); 6] = [
    (0.0, 0.0625),
    (0.0625, 0.125),
    (0.125, 0.25),
    (0.25, 0.5),
    (0.5, 1.0),
    (1.0, f64::INFINITY),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutBucket {
    pub s_lo: f64,
    pub s_hi: f64,
    /// Cuts of a shrunk rectangle containing both probe endpoints.
    pub exposures: usize,
    pub separations: usize,
    pub frequency: f64,
    /// Mean of `3d/s` over the exposures.
    pub bound: f64,
    /// Binomial standard deviation of the frequency at probability `bound`.
    pub sigma: f64,
}

impl CutBucket {
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.exposures == 0 || self.frequency <= self.bound + sigmas * self.sigma
    }
}

/// One `(s, separated)` sample per cut met by the probe edge while walking
/// down the tree, stopping at the first separation or when an endpoint
/// leaves the shrunk rectangle.
pub fn probe_cuts(tree: &DissectionTree, probe: Segment) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    let mut id = 0;
    loop {
        let node = &tree.nodes[id];
        let (Some(sub), Some(cut)) = (node.sub_rect, node.cut) else { break };
        if !(sub.contains(probe.a) && sub.contains(probe.b)) {
            break;
        }
        let vertical = cut.a.x == cut.b.x;
        let below = |p: Point| if vertical { p.x < cut.a.x } else { p.y < cut.a.y };
        let separated = below(probe.a) != below(probe.b);
        out.push((sub.longest_side(), separated));
        if separated {
            break;
        }
        id = node.children[if below(probe.a) { 0 } else { 1 }];
    }
    out
}

/// Separation frequency of a random probe edge of length `d` by cuts of
/// side length `s`, bucketed by `s`, over `trials` dissections of facility
/// sets drawn by `generator`.
pub fn cut_probability_experiment<F>(d: f64, epsilon: f64, trials: usize, seed: u64, generator: F) -> Result<Vec<CutBucket>>
where
    F: Fn(&mut ChaCha8Rng) -> (Vec<Point>, Vec<Point>) + Sync,
{
    if !(0.0..0.5).contains(&d) {
        return Err(Error::validation(format!("probe length {d} outside [0, 0.5)")));
    }
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let (local, global) = generator(&mut rng);
            let mid = Point::new(rng.random_range(d..=1.0 - d), rng.random_range(d..=1.0 - d));
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let (dx, dy) = (0.5 * d * angle.cos(), 0.5 * d * angle.sin());
            let probe = Segment::new(Point::new(mid.x - dx, mid.y - dy), Point::new(mid.x + dx, mid.y + dy));
            let tree = adaptive_dissection(&local, &global, epsilon, rng.random())?;
            Ok(probe_cuts(&tree, probe))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CUT_BUCKETS
        .iter()
        .map(|&(s_lo, s_hi)| {
            let hits: Vec<(f64, bool)> = samples
                .iter()
                .flatten()
                .copied()
                .filter(|&(s, _)| s >= s_lo && s < s_hi)
                .collect();
            let exposures = hits.len();
            let separations = hits.iter().filter(|h| h.1).count();
            let (frequency, bound, sigma) = if exposures == 0 {
                (0.0, 0.0, 0.0)
            } else {
                let n = exposures as f64;
                let bound = hits.iter().map(|&(s, _)| 3.0 * d / s).sum::<f64>() / n;
                let p0 = bound.min(1.0);
                (separations as f64 / n, bound, (p0 * (1.0 - p0) / n).sqrt())
            };
            CutBucket {
                s_lo,
                s_hi,
                exposures,
                separations,
                frequency,
                bound,
                sigma,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_uniform, uniform_points};

    #[test]
    fn identical_sets_never_move_clients() {
        let clients = gen_uniform(100, 1);
        let l = gen_uniform(20, 2);
        let s = verify_structure_bound(&clients, &l, &l, 1.0 / 3.0, 5, 0).unwrap();
        assert_eq!(s.max_ratio, 0.0);
        assert!(s.rows.iter().all(|r| r.cost_e == r.cost_e0));
    }

    #[test]
    fn single_region_gives_zero() {
        let c = [Point::new(0.5, 0.5)];
        let s = verify_structure_bound(&c, &[Point::new(0.1, 0.1)], &[Point::new(0.9, 0.9)], 0.5, 3, 4).unwrap();
        assert_eq!(s.mean_ratio, 0.0);
        assert!(verify_structure_bound(&c, &c, &c, 0.5, 0, 0).is_err());
    }

    #[test]
    fn structure_rows_are_reproducible() {
        let clients = gen_uniform(200, 3);
        let l = gen_uniform(30, 4);
        let g = gen_uniform(30, 5);
        let a = verify_structure_bound(&clients, &l, &g, 1.0 / 3.0, 8, 11).unwrap();
        let b = verify_structure_bound(&clients, &l, &g, 1.0 / 3.0, 8, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 8);
        assert!(a.rows.iter().all(|r| r.ratio >= 0.0));
    }

    fn facilities(rng: &mut ChaCha8Rng) -> (Vec<Point>, Vec<Point>) {
        (uniform_points(rng, 40), uniform_points(rng, 40))
    }

    #[test]
    fn zero_length_probe_is_never_separated() {
        let table = cut_probability_experiment(0.0, 1.0 / 3.0, 300, 2, facilities).unwrap();
        assert!(table.iter().all(|b| b.separations == 0));
        assert!(table.iter().map(|b| b.exposures).sum::<usize>() > 0);
    }

    #[test]
    fn frequencies_respect_bound() {
        let table = cut_probability_experiment(0.02, 1.0 / 3.0, 2000, 7, facilities).unwrap();
        for b in &table {
            assert!(b.frequency <= 1.0);
            assert!(b.within_bound(3.0), "{b:?}");
        }
    }
}
