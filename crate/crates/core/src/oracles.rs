//! Exact solvers for tiny instances, used as ground truth.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dist, fermat_point, geometric_median, mst_length, Point};
use crate::tsp::Tour;

pub const HELD_KARP_MAX: usize = 18;
pub const FL_MAX_SITES: usize = 18;
pub const KMEDIAN_MAX_SUBSETS: u64 = 1_000_000;
pub const STEINER_MAX_TERMINALS: usize = 4;

const WEISZFELD_TOL: f64 = 1e-10;
const WEISZFELD_ROUNDS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<S> {
    pub optimal_cost: f64,
    pub optimal_solution: S,
    pub nodes_explored: u64,
}

/// Bitmask dynamic program over subsets. The returned tour is canonical.
pub fn held_karp_tsp(points: &[Point]) -> Result<OracleResult<Tour>> {
    let n = points.len();
    if n > HELD_KARP_MAX {
        return Err(Error::Capacity(format!(
            "Held-Karp handles at most {HELD_KARP_MAX} points, got {n}"
        )));
    }
    if n < 3 {
        return Err(Error::validation(format!("a tour needs at least 3 points, got {n}")));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::validation(format!("non-finite point {p:?}")));
    }
    // Point 0 is the fixed start; subsets range over points 1..n, bit i-1 for point i.
    let m = n - 1;
    let full = (1usize << m) - 1;
    let d = |a: usize, b: usize| dist(points[a], points[b]);
    let mut cost = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![u8::MAX; (full + 1) * m];
    for j in 0..m {
        cost[(1 << j) * m + j] = d(0, j + 1);
    }
    let mut explored = 0u64;
    for mask in 1..=full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let here = cost[mask * m + j];
            if !here.is_finite() {
                continue;
            }
            explored += 1;
            let mut rest = full & !mask;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let next = mask | (1 << k);
                let cand = here + d(j + 1, k + 1);
                if cand < cost[next * m + k] {
                    cost[next * m + k] = cand;
                    parent[next * m + k] = j as u8;
                }
            }
        }
    }
    let (mut last, best) = (0..m)
        .map(|j| (j, cost[full * m + j] + d(j + 1, 0)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("n >= 3");
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    loop {
        order.push(last + 1);
        let prev = parent[mask * m + last];
        mask &= !(1 << last);
        if prev == u8::MAX {
            break;
        }
        last = prev as usize;
    }
    order.push(0);
    order.reverse();
    Ok(OracleResult {
        optimal_cost: best,
        optimal_solution: Tour::new(order)?.canonical(),
        nodes_explored: explored,
    })
}

fn distance_matrix(clients: &[Point], sites: &[Point]) -> Vec<Vec<f64>> {
    sites
        .iter()
        .map(|s| clients.iter().map(|c| dist(*c, *s)).collect())
        .collect()
}

fn check_inputs(clients: &[Point], sites: &[Point]) -> Result<()> {
    if clients.is_empty() || sites.is_empty() {
        return Err(Error::validation("clients and candidate sites must be nonempty"));
    }
    if let Some(p) = clients.iter().chain(sites).find(|p| !p.is_finite()) {
        return Err(Error::validation(format!("non-finite point {p:?}")));
    }
    Ok(())
}

/// Minimum facility-location cost over all nonempty subsets of sites.
/// The solution lists open site indices in increasing order.
pub fn brute_force_fl(
    clients: &[Point],
    sites: &[Point],
    f: f64,
) -> Result<OracleResult<Vec<usize>>> {
    check_inputs(clients, sites)?;
    if sites.len() > FL_MAX_SITES {
        return Err(Error::Capacity(format!(
            "facility-location oracle handles at most {FL_MAX_SITES} sites, got {}",
            sites.len()
        )));
    }
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::validation(format!("opening cost must be positive, got {f}")));
    }
    let dm = distance_matrix(clients, sites);
    let mut nearest = vec![f64::INFINITY; clients.len()];
    let (mut best_cost, mut best_mask) = (f64::INFINITY, 0usize);
    for mask in 1usize..(1 << sites.len()) {
        nearest.fill(f64::INFINITY);
        let mut bits = mask;
        while bits != 0 {
            let s = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for (best, &d) in nearest.iter_mut().zip(&dm[s]) {
                *best = best.min(d);
            }
        }
        let cost = nearest.iter().sum::<f64>() + f * mask.count_ones() as f64;
        if cost < best_cost {
            (best_cost, best_mask) = (cost, mask);
        }
    }
    Ok(OracleResult {
        optimal_cost: best_cost,
        optimal_solution: (0..sites.len()).filter(|s| best_mask >> s & 1 == 1).collect(),
        nodes_explored: (1u64 << sites.len()) - 1,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Minimum k-median cost over all k-subsets of sites.
pub fn brute_force_kmedian(
    clients: &[Point],
    sites: &[Point],
    k: usize,
) -> Result<OracleResult<Vec<usize>>> {
    check_inputs(clients, sites)?;
    if k == 0 || k > sites.len() {
        return Err(Error::validation(format!(
            "k must lie in 1..={}, got {k}",
            sites.len()
        )));
    }
    let subsets = binomial(sites.len(), k);
    if subsets > KMEDIAN_MAX_SUBSETS as u128 {
        return Err(Error::Capacity(format!(
            "C({}, {k}) = {subsets} subsets exceeds {KMEDIAN_MAX_SUBSETS}",
            sites.len()
        )));
    }
    let dm = distance_matrix(clients, sites);
    let (mut best_cost, mut best) = (f64::INFINITY, Vec::new());
    for combo in (0..sites.len()).combinations(k) {
        let cost: f64 = (0..clients.len())
            .map(|c| combo.iter().map(|&s| dm[s][c]).fold(f64::INFINITY, f64::min))
            .sum();
        if cost < best_cost {
            (best_cost, best) = (cost, combo);
        }
    }
    Ok(OracleResult {
        optimal_cost: best_cost,
        optimal_solution: best,
        nodes_explored: subsets as u64,
    })
}

/// Two Steiner points joined to each other, `s1` to `a, b` and `s2` to
/// `c, d`, relaxed by alternating Weiszfeld steps.
fn full_topology(a: Point, b: Point, c: Point, d: Point) -> [Point; 2] {
    let mid = |p: Point, q: Point| Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    let (mut s1, mut s2) = (mid(a, b), mid(c, d));
    for _ in 0..WEISZFELD_ROUNDS {
        let n1 = geometric_median(&[a, b, s2], s1, 200, WEISZFELD_TOL);
        let n2 = geometric_median(&[c, d, n1], s2, 200, WEISZFELD_TOL);
        let moved = dist(n1, s1) + dist(n2, s2);
        (s1, s2) = (n1, n2);
        if moved < WEISZFELD_TOL {
            break;
        }
    }
    [s1, s2]
}

/// Exact Steiner minimal tree for two to four terminals. The solution
/// holds the Steiner points; the cost is the MST over terminals and them.
pub fn small_steiner_opt(terminals: &[Point]) -> Result<OracleResult<Vec<Point>>> {
    let n = terminals.len();
    if n > STEINER_MAX_TERMINALS {
        return Err(Error::Capacity(format!(
            "Steiner oracle handles at most {STEINER_MAX_TERMINALS} terminals, got {n}"
        )));
    }
    if n < 2 {
        return Err(Error::validation(format!("need at least 2 terminals, got {n}")));
    }
    if let Some(p) = terminals.iter().find(|p| !p.is_finite()) {
        return Err(Error::validation(format!("non-finite point {p:?}")));
    }

    let mut candidates: Vec<Vec<Point>> = vec![Vec::new()];
    for triple in terminals.iter().copied().combinations(3) {
        candidates.push(vec![fermat_point(triple[0], triple[1], triple[2])]);
    }
    if n == 4 {
        let t = terminals;
        let centroid = Point::new(
            t.iter().map(|p| p.x).sum::<f64>() / 4.0,
            t.iter().map(|p| p.y).sum::<f64>() / 4.0,
        );
        candidates.push(vec![geometric_median(t, centroid, 10_000, WEISZFELD_TOL)]);
        for [i, j, k, l] in [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]] {
            candidates.push(full_topology(t[i], t[j], t[k], t[l]).to_vec());
        }
    }

    let explored = candidates.len() as u64;
    let cost_of = |extra: &[Point]| {
        let mut all = terminals.to_vec();
        all.extend_from_slice(extra);
        mst_length(&all)
    };
    let (best, cost) = candidates
        .into_iter()
        .map(|c| {
            let cost = cost_of(&c);
            (c, cost)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("MST candidate always present");
    Ok(OracleResult {
        optimal_cost: cost,
        optimal_solution: best,
        nodes_explored: explored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::gen_uniform;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    fn enumerate_tours(points: &[Point]) -> f64 {
        let n = points.len();
        (1..n)
            .permutations(n - 1)
            .map(|p| {
                let mut len = dist(points[0], points[p[0]]) + dist(points[p[n - 2]], points[0]);
                for w in p.windows(2) {
                    len += dist(points[w[0]], points[w[1]]);
                }
                len
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn held_karp_square() {
        let r = held_karp_tsp(&square()).unwrap();
        assert_relative_eq!(r.optimal_cost, 4.0, epsilon = 1e-12);
        assert_eq!(r.optimal_solution.order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn held_karp_pentagon() {
        let pts: Vec<Point> = (0..5)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 5.0;
                Point::new(a.cos(), a.sin())
            })
            .collect();
        let r = held_karp_tsp(&pts).unwrap();
        assert_relative_eq!(r.optimal_cost, 10.0 * (PI / 5.0).sin(), epsilon = 1e-12);
    }

    #[test]
    fn held_karp_square_with_center() {
        let mut pts = square();
        pts.push(Point::new(0.5, 0.5));
        let r = held_karp_tsp(&pts).unwrap();
        assert_relative_eq!(r.optimal_cost, 3.0 + 2.0 * 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(r.optimal_cost, enumerate_tours(&pts), epsilon = 1e-12);
    }

    #[test]
    fn held_karp_tour_length_matches_cost() {
        let pts = gen_uniform(12, 3);
        let r = held_karp_tsp(&pts).unwrap();
        let inst = crate::tsp::TspInstance::new(pts).unwrap();
        let len = crate::tsp::tour_length(&inst, &r.optimal_solution).unwrap();
        assert_relative_eq!(len, r.optimal_cost, epsilon = 1e-9);
    }

    #[test]
    fn held_karp_capacity() {
        assert!(matches!(
            held_karp_tsp(&gen_uniform(19, 1)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn fl_examples() {
        let one = [Point::new(0.3, 0.3)];
        assert_relative_eq!(brute_force_fl(&one, &one, 1.0).unwrap().optimal_cost, 1.0);
        let two = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let r = brute_force_fl(&two, &two, 0.4).unwrap();
        assert_relative_eq!(r.optimal_cost, 0.8);
        assert_eq!(r.optimal_solution, vec![0, 1]);
        let r = brute_force_fl(&two, &two, 2.0).unwrap();
        assert_relative_eq!(r.optimal_cost, 3.0);
        assert_eq!(r.optimal_solution.len(), 1);
        assert!(matches!(
            brute_force_fl(&two, &gen_uniform(19, 2), 1.0),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn kmedian_examples() {
        let two = [Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        assert_relative_eq!(brute_force_kmedian(&two, &two, 1).unwrap().optimal_cost, 2.0);
        assert_relative_eq!(brute_force_kmedian(&two, &two, 2).unwrap().optimal_cost, 0.0);

        let pts = gen_uniform(9, 11);
        let r = brute_force_kmedian(&pts, &pts, 2).unwrap();
        assert_eq!(r.nodes_explored, 36);
        let mut best = f64::INFINITY;
        for a in 0..9 {
            for b in a + 1..9 {
                let c: f64 = pts
                    .iter()
                    .map(|p| dist(*p, pts[a]).min(dist(*p, pts[b])))
                    .sum();
                best = best.min(c);
            }
        }
        assert_relative_eq!(r.optimal_cost, best, epsilon = 1e-12);
        assert!(matches!(
            brute_force_kmedian(&pts, &gen_uniform(40, 1), 20),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn steiner_examples() {
        let tri = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ];
        assert_relative_eq!(
            small_steiner_opt(&tri).unwrap().optimal_cost,
            3f64.sqrt(),
            epsilon = 1e-9
        );

        let a = 150f64.to_radians();
        let obtuse = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(a.cos(), a.sin())];
        assert_relative_eq!(
            small_steiner_opt(&obtuse).unwrap().optimal_cost,
            mst_length(&obtuse),
            epsilon = 1e-9
        );

        let r = small_steiner_opt(&square()).unwrap();
        assert_relative_eq!(r.optimal_cost, 1.0 + 3f64.sqrt(), epsilon = 1e-7);
        assert_eq!(r.optimal_solution.len(), 2);

        let seg = [Point::new(0.0, 0.0), Point::new(3.0, 4.0)];
        assert_relative_eq!(small_steiner_opt(&seg).unwrap().optimal_cost, 5.0);
        assert!(matches!(
            small_steiner_opt(&gen_uniform(5, 1)),
            Err(Error::Capacity(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn held_karp_matches_enumeration(seed in 0u64..10_000, n in 3usize..=8) {
            let pts = gen_uniform(n, seed);
            let r = held_karp_tsp(&pts).unwrap();
            prop_assert!((r.optimal_cost - enumerate_tours(&pts)).abs() < 1e-9);
        }

        #[test]
        fn steiner_between_half_mst_and_mst(seed in 0u64..10_000, n in 2usize..=4) {
            let pts = gen_uniform(n, seed);
            let r = small_steiner_opt(&pts).unwrap();
            let mst = mst_length(&pts);
            prop_assert!(r.optimal_cost <= mst + 1e-12);
            prop_assert!(r.optimal_cost >= mst / 2.0);
            // The Steiner ratio for these sizes is at least sqrt(3)/2.
            prop_assert!(r.optimal_cost >= mst * 3f64.sqrt() / 2.0 - 1e-9);
        }
    }
}
