use serde::{Deserialize, Serialize};

use super::adaptive::DissectionTree;
use crate::error::{Error, Result};
use crate::geom::{dist, Point, Rect};

/// The part of a region node's rectangle not covered by descendant region
/// nodes, with the facilities it owns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub node: usize,
    pub outer: Rect,
    pub holes: Vec<Rect>,
    /// Indices into `L`.
    pub local: Vec<usize>,
    /// Indices into `G`.
    pub global: Vec<usize>,
    /// The region node is a part made by the partition process.
    pub from_partition: bool,
}

/// Portal points of every region, parallel to the region list. Regions made
/// by the partition process get none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortalSet {
    pub per_region: Vec<Vec<Point>>,
}

impl PortalSet {
    pub fn of(&self, region: usize) -> &[Point] {
        &self.per_region[region]
    }

    pub fn total(&self) -> usize {
        self.per_region.iter().map(Vec::len).sum()
    }
}

/// Regions in preorder of their nodes; the root's region comes first.
/// Each facility belongs to the region of its nearest region-node ancestor.
pub fn compute_regions(tree: &DissectionTree) -> Vec<Region> {
    let mut regions = Vec::new();
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        let node = &tree.nodes[id];
        if node.is_region_node {
            regions.push(region_of(tree, id));
        }
        stack.extend(node.children.iter().rev());
    }
    regions
}

fn region_of(tree: &DissectionTree, id: usize) -> Region {
    let node = &tree.nodes[id];
    let mut holes = Vec::new();
    let (mut local, mut global) = (Vec::new(), Vec::new());
    let mut stack: Vec<usize> = node.children.clone();
    if node.children.is_empty() {
        local.extend_from_slice(&node.local);
        global.extend_from_slice(&node.global);
    }
    while let Some(c) = stack.pop() {
        let child = &tree.nodes[c];
        if child.is_region_node {
            holes.push(child.rect);
        } else if child.children.is_empty() {
            local.extend_from_slice(&child.local);
            global.extend_from_slice(&child.global);
        } else {
            stack.extend(child.children.iter().copied());
        }
    }
    local.sort_unstable();
    global.sort_unstable();
    Region {
        node: id,
        outer: node.rect,
        holes,
        local,
        global,
        from_partition: node.partition_part,
    }
}

/// `p` equally spaced points on a segment, endpoints included; the midpoint
/// when `p = 1`.
fn spaced(a: Point, b: Point, p: usize) -> impl Iterator<Item = Point> {
    (0..p).map(move |i| {
        let t = if p == 1 { 0.5 } else { i as f64 / (p - 1) as f64 };
        Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
    })
}

/// `p` portals on every edge of each region's outer rectangle and of each of
/// its holes, shared corners stored once.
pub fn place_portals(regions: &[Region], p: usize) -> Result<PortalSet> {
    if p == 0 {
        return Err(Error::validation("need at least one portal per edge"));
    }
    let per_region = regions
        .iter()
        .map(|r| {
            if r.from_partition {
                return Vec::new();
            }
            let mut out: Vec<Point> = Vec::new();
            for rect in std::iter::once(&r.outer).chain(&r.holes) {
                for e in rect.edges() {
                    for q in spaced(e.a, e.b, p) {
                        if !out.iter().any(|o| dist(*o, q) <= 1e-12) {
                            out.push(q);
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(PortalSet { per_region })
}

/// Region index owning each `L` facility and each `G` facility.
pub fn region_membership(regions: &[Region], n_local: usize, n_global: usize) -> (Vec<usize>, Vec<usize>) {
    let mut of_local = vec![usize::MAX; n_local];
    let mut of_global = vec![usize::MAX; n_global];
    for (ri, r) in regions.iter().enumerate() {
        for &l in &r.local {
            of_local[l] = ri;
        }
        for &g in &r.global {
            of_global[g] = ri;
        }
    }
    (of_local, of_global)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::gen_uniform;
    use crate::dissection::adaptive_dissection;

    fn unit_region(holes: Vec<Rect>) -> Region {
        Region {
            node: 0,
            outer: Rect::unit(),
            holes,
            local: vec![],
            global: vec![],
            from_partition: false,
        }
    }

    #[test]
    fn single_leaf_is_one_region() {
        let l = gen_uniform(2, 1);
        let tree = adaptive_dissection(&l, &[], 0.25, 0).unwrap();
        let regions = compute_regions(&tree);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].outer, tree.root().rect);
        assert!(regions[0].holes.is_empty());
        assert_eq!(regions[0].local, vec![0, 1]);
    }

    #[test]
    fn portal_examples() {
        let two = place_portals(&[unit_region(vec![])], 2).unwrap();
        assert_eq!(two.of(0).len(), 4);
        let three = place_portals(&[unit_region(vec![])], 3).unwrap();
        assert_eq!(three.of(0).len(), 8);
        assert!(three.of(0).contains(&Point::new(0.5, 0.0)));
        let one = place_portals(&[unit_region(vec![])], 1).unwrap();
        assert_eq!(one.of(0).len(), 4);

        let hole = Rect::new(0.25, 0.25, 0.5, 0.5).unwrap();
        let holed = place_portals(&[unit_region(vec![hole])], 2).unwrap();
        assert_eq!(holed.of(0).len(), 8);
        for c in hole.corners() {
            assert!(holed.of(0).contains(&c));
        }
        assert!(place_portals(&[unit_region(vec![])], 0).is_err());

        let mut part = unit_region(vec![]);
        part.from_partition = true;
        assert!(place_portals(&[part], 3).unwrap().of(0).is_empty());
    }

    #[test]
    fn facilities_in_exactly_one_region_and_counts_bounded() {
        let eps = 1.0 / 3.0;
        for seed in 0..100 {
            let l = gen_uniform(100, seed);
            let g = gen_uniform(100, seed + 500);
            let tree = adaptive_dissection(&l, &g, eps, seed).unwrap();
            let regions = compute_regions(&tree);
            let root = tree.root().rect;
            let (of_l, of_g) = region_membership(&regions, 100, 100);
            assert!(of_l.iter().chain(&of_g).all(|&r| r != usize::MAX));
            let total: usize = regions.iter().map(|r| r.local.len() + r.global.len()).sum();
            assert_eq!(total, 200);
            for r in &regions {
                assert!((r.local.len() + r.global.len()) as f64 <= 2.0 / (eps * eps));
                for h in &r.holes {
                    assert_eq!(root.intersect(h), Some(*h));
                }
            }
        }
    }

    #[test]
    fn holes_are_maximal_region_descendants() {
        let tree = adaptive_dissection(&gen_uniform(150, 2), &gen_uniform(150, 3), 0.25, 8).unwrap();
        let regions = compute_regions(&tree);
        for r in &regions {
            let nested = regions
                .iter()
                .filter(|o| o.node != r.node && tree.is_ancestor(r.node, o.node))
                .count();
            assert!(r.holes.len() <= nested);
        }
        assert!(regions.len() > 1);
    }
}
