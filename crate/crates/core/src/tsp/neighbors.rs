use crate::geom::{dist, Point, Rect};

/// K nearest neighbors of every point, found through a uniform grid.
#[derive(Debug, Clone)]
pub struct NeighborLists {
    lists: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn build(points: &[Point], k: usize) -> Self {
        let n = points.len();
        let k = k.min(n.saturating_sub(1));
        if n == 0 || k == 0 {
            return NeighborLists {
                lists: vec![Vec::new(); n],
            };
        }
        let bounds = Rect::bounding(points.iter().copied()).expect("nonempty");
        let cells = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let span = bounds.longest_side().max(f64::MIN_POSITIVE);
        let cell = span / cells as f64;
        let coord = |v: f64, lo: f64| (((v - lo) / cell) as usize).min(cells - 1);
        let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
        for (i, p) in points.iter().enumerate() {
            grid[coord(p.y, bounds.ymin) * cells + coord(p.x, bounds.xmin)].push(i);
        }

        let mut lists = Vec::with_capacity(n);
        let mut found: Vec<(f64, usize)> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = (coord(p.x, bounds.xmin) as isize, coord(p.y, bounds.ymin) as isize);
            found.clear();
            let mut ring = 0isize;
            loop {
                for gy in cy - ring..=cy + ring {
                    for gx in cx - ring..=cx + ring {
                        let on_ring = (gy - cy).abs() == ring || (gx - cx).abs() == ring;
                        if !on_ring
                            || gx < 0
                            || gy < 0
                            || gx >= cells as isize
                            || gy >= cells as isize
                        {
                            continue;
                        }
                        for &j in &grid[gy as usize * cells + gx as usize] {
                            if j != i {
                                found.push((dist(*p, points[j]), j));
                            }
                        }
                    }
                }
                // Anything outside the scanned rings is at least `ring * cell` away.
                if found.len() >= k {
                    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    if found[k - 1].0 <= ring as f64 * cell || ring as usize > cells {
                        break;
                    }
                }
                ring += 1;
            }
            lists.push(found.iter().take(k).map(|&(_, j)| j).collect());
        }
        NeighborLists { lists }
    }

    pub fn of(&self, v: usize) -> &[usize] {
        &self.lists[v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::gen_uniform;

    #[test]
    fn matches_brute_force() {
        let pts = gen_uniform(300, 4);
        let nl = NeighborLists::build(&pts, 8);
        for (i, p) in pts.iter().enumerate() {
            let mut all: Vec<(f64, usize)> = pts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, q)| (dist(*p, *q), j))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<usize> = all.iter().take(8).map(|x| x.1).collect();
            assert_eq!(nl.of(i), want.as_slice(), "point {i}");
        }
    }
}
