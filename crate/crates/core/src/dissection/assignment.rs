use serde::{Deserialize, Serialize};

use super::regions::{region_membership, PortalSet, Region};
use crate::clustering::{assign_clients, ClientAssignment};
use crate::error::{Error, Result};
use crate::geom::{dist, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Local(usize),
    Global(usize),
    Portal { region: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub targets: Vec<Target>,
    pub distances: Vec<f64>,
    pub cost: f64,
}

/// Nearest facilities of every client in `L` and in `G`.
#[derive(Debug, Clone)]
pub struct ServingPair {
    pub local: ClientAssignment,
    pub global: ClientAssignment,
}

impl ServingPair {
    pub fn new(clients: &[Point], local: &[Point], global: &[Point]) -> Result<Self> {
        Ok(ServingPair {
            local: assign_clients(clients, local)?,
            global: assign_clients(clients, global)?,
        })
    }

    /// `c_G + c_L` summed over clients.
    pub fn total(&self) -> f64 {
        self.local.total() + self.global.total()
    }
}

/// Each client goes to the farther of its nearest `L` and nearest `G`
/// facility, `L` on ties.
pub fn e0_assignment(clients: &[Point], local: &[Point], global: &[Point]) -> Result<Assignment> {
    let pair = ServingPair::new(clients, local, global)?;
    Ok(e0_from(&pair))
}

fn e0_from(pair: &ServingPair) -> Assignment {
    let (targets, distances): (Vec<Target>, Vec<f64>) = (0..pair.local.serving.len())
        .map(|c| {
            let (dl, dg) = (pair.local.distances[c], pair.global.distances[c]);
            if dl >= dg {
                (Target::Local(pair.local.serving[c]), dl)
            } else {
                (Target::Global(pair.global.serving[c]), dg)
            }
        })
        .unzip();
    let cost = distances.iter().sum();
    Assignment {
        targets,
        distances,
        cost,
    }
}

/// Starts from the farther-facility assignment and reroutes every client
/// whose nearest `L` facility lies in a region `R` not made by the partition
/// process while its nearest `G` facility lies elsewhere: such a client goes
/// to the nearest portal of `R` or facility of `L` outside `R`.
pub fn build_assignment(
    clients: &[Point],
    local: &[Point],
    global: &[Point],
    regions: &[Region],
    portals: &PortalSet,
) -> Result<Assignment> {
    if portals.per_region.len() != regions.len() {
        return Err(Error::validation("portal set does not match the regions"));
    }
    let pair = ServingPair::new(clients, local, global)?;
    let mut out = e0_from(&pair);
    let (of_local, of_global) = region_membership(regions, local.len(), global.len());
    for (c, &cp) in clients.iter().enumerate() {
        let r = of_local[pair.local.serving[c]];
        if r == usize::MAX || regions[r].from_partition || of_global[pair.global.serving[c]] == r {
            continue;
        }
        let mut best = (Target::Local(usize::MAX), f64::INFINITY);
        for (i, &q) in portals.of(r).iter().enumerate() {
            let d = dist(cp, q);
            if d < best.1 {
                best = (Target::Portal { region: r, index: i }, d);
            }
        }
        for (l, &q) in local.iter().enumerate() {
            if of_local[l] != r {
                let d = dist(cp, q);
                if d < best.1 {
                    best = (Target::Local(l), d);
                }
            }
        }
        if best.1.is_finite() {
            out.targets[c] = best.0;
            out.distances[c] = best.1;
        }
    }
    out.cost = out.distances.iter().sum();
    Ok(out)
}

/// Clients in violation of the portal rule under `assignment`.
pub fn structure_violations(
    clients: &[Point],
    local: &[Point],
    global: &[Point],
    regions: &[Region],
    assignment: &Assignment,
) -> Result<Vec<usize>> {
    let pair = ServingPair::new(clients, local, global)?;
    let (of_local, of_global) = region_membership(regions, local.len(), global.len());
    Ok((0..clients.len())
        .filter(|&c| {
            let r = of_local[pair.local.serving[c]];
            if regions[r].from_partition || of_global[pair.global.serving[c]] == r {
                return false;
            }
            match assignment.targets[c] {
                Target::Portal { region, .. } => region != r,
                Target::Local(l) => of_local[l] == r,
                Target::Global(_) => true,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientPartition {
    /// Clients with `c_L >= c_G`.
    pub served_by_global: Vec<usize>,
    /// Clients with `c_L < c_G`.
    pub served_by_local: Vec<usize>,
    /// Per region: clients whose nearest `G` facility is in the region and
    /// that are in `served_by_global` or have their nearest `L` facility in
    /// the region.
    pub region_clients: Vec<Vec<usize>>,
    /// Per region: clients whose nearest `L` facility is in the region but
    /// whose nearest `G` facility is not.
    pub deltas: Vec<Vec<usize>>,
}

pub fn partition_clients(
    clients: &[Point],
    local: &[Point],
    global: &[Point],
    regions: &[Region],
) -> Result<ClientPartition> {
    let pair = ServingPair::new(clients, local, global)?;
    let (of_local, of_global) = region_membership(regions, local.len(), global.len());
    let mut part = ClientPartition {
        served_by_global: Vec::new(),
        served_by_local: Vec::new(),
        region_clients: vec![Vec::new(); regions.len()],
        deltas: vec![Vec::new(); regions.len()],
    };
    for c in 0..clients.len() {
        let by_global = pair.local.distances[c] >= pair.global.distances[c];
        if by_global {
            part.served_by_global.push(c);
        } else {
            part.served_by_local.push(c);
        }
        let rl = of_local[pair.local.serving[c]];
        let rg = of_global[pair.global.serving[c]];
        if rg != usize::MAX && (by_global || rl == rg) {
            part.region_clients[rg].push(c);
        }
        if rl != usize::MAX && rl != rg {
            part.deltas[rl].push(c);
        }
    }
    Ok(part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::gen_uniform;
    use crate::dissection::{adaptive_dissection, compute_regions, place_portals};
    use crate::geom::Rect;
    use approx::assert_relative_eq;

    fn region(node: usize, outer: Rect, local: Vec<usize>, global: Vec<usize>) -> Region {
        Region {
            node,
            outer,
            holes: vec![],
            local,
            global,
            from_partition: false,
        }
    }

    #[test]
    fn e0_examples() {
        let c = [Point::new(0.0, 0.0)];
        let a = e0_assignment(&c, &[Point::new(1.0, 0.0)], &[Point::new(0.0, 2.0)]).unwrap();
        assert_eq!(a.targets[0], Target::Global(0));
        assert_relative_eq!(a.cost, 2.0);

        let same = e0_assignment(&c, &[Point::new(0.0, 0.0)], &[Point::new(0.0, 0.0)]).unwrap();
        assert_eq!(same.targets[0], Target::Local(0));
        assert_eq!(same.cost, 0.0);

        let clients = gen_uniform(50, 1);
        let l = gen_uniform(5, 2);
        let g = gen_uniform(6, 3);
        let a = e0_assignment(&clients, &l, &g).unwrap();
        let pair = ServingPair::new(&clients, &l, &g).unwrap();
        let want: f64 = (0..50)
            .map(|c| pair.local.distances[c].max(pair.global.distances[c]))
            .sum();
        assert_relative_eq!(a.cost, want, epsilon = 1e-12);
    }

    #[test]
    fn same_region_keeps_e0() {
        let l = [Point::new(0.2, 0.2)];
        let g = [Point::new(0.3, 0.3)];
        let regions = vec![region(0, Rect::unit(), vec![0], vec![0])];
        let portals = place_portals(&regions, 3).unwrap();
        let clients = [Point::new(0.9, 0.9)];
        let e = build_assignment(&clients, &l, &g, &regions, &portals).unwrap();
        let e0 = e0_assignment(&clients, &l, &g).unwrap();
        assert_eq!(e, e0);
    }

    #[test]
    fn violating_client_goes_to_nearest_portal() {
        let l = [Point::new(0.25, 0.5), Point::new(3.0, 3.0)];
        let g = [Point::new(0.75, 0.5)];
        let left = Rect::new(0.0, 0.0, 0.5, 1.0).unwrap();
        let right = Rect::new(0.5, 0.0, 1.0, 1.0).unwrap();
        let regions = vec![
            region(0, Rect::new(0.0, 0.0, 4.0, 4.0).unwrap(), vec![1], vec![]),
            region(1, left, vec![0], vec![]),
            region(2, right, vec![], vec![0]),
        ];
        let portals = place_portals(&regions, 3).unwrap();
        let clients = [Point::new(0.45, 0.5)];
        let e = build_assignment(&clients, &l, &g, &regions, &portals).unwrap();
        assert!(matches!(e.targets[0], Target::Portal { region: 1, .. }));
        assert_relative_eq!(e.distances[0], 0.05, epsilon = 1e-12);
        assert!(structure_violations(&clients, &l, &g, &regions, &e).unwrap().is_empty());
        let e0 = e0_assignment(&clients, &l, &g).unwrap();
        assert_eq!(structure_violations(&clients, &l, &g, &regions, &e0).unwrap(), vec![0]);
    }

    #[test]
    fn four_client_memberships() {
        // Region 1 owns l0 and g0; region 0 (the rest) owns l1 and g1.
        let l = [Point::new(0.2, 0.5), Point::new(0.9, 0.1)];
        let g = [Point::new(0.3, 0.5), Point::new(0.9, 0.9)];
        let regions = vec![
            region(0, Rect::unit(), vec![1], vec![1]),
            region(1, Rect::new(0.1, 0.4, 0.4, 0.6).unwrap(), vec![0], vec![0]),
        ];
        let clients = [
            // a: nearest G in region 1, closer to L but that L is outside.
            Point::new(0.65, 0.3),
            // b: nearest G in region 1 and c_L >= c_G.
            Point::new(0.34, 0.52),
            // c: nearest G in region 1, closer to its L which is also inside.
            Point::new(0.21, 0.5),
            // d: nearest G outside region 1.
            Point::new(0.8, 0.85),
        ];
        let part = partition_clients(&clients, &l, &g, &regions).unwrap();
        let cr = &part.region_clients[1];
        assert!(!cr.contains(&0));
        assert!(cr.contains(&1));
        assert!(cr.contains(&2));
        assert!(!cr.contains(&3));
        assert_eq!(part.served_by_global.len() + part.served_by_local.len(), 4);
    }

    #[test]
    fn equidistant_client_is_served_by_global() {
        let l = [Point::new(0.0, 0.0)];
        let g = [Point::new(2.0, 0.0)];
        let regions = vec![region(0, Rect::new(0.0, 0.0, 2.0, 2.0).unwrap(), vec![0], vec![0])];
        let part = partition_clients(&[Point::new(1.0, 0.0)], &l, &g, &regions).unwrap();
        assert_eq!(part.served_by_global, vec![0]);
    }

    #[test]
    fn random_assignments_respect_structure() {
        for seed in 0..30 {
            let clients = gen_uniform(200, seed);
            let l = gen_uniform(40, seed + 100);
            let g = gen_uniform(40, seed + 200);
            let tree = adaptive_dissection(&l, &g, 1.0 / 3.0, seed).unwrap();
            let regions = compute_regions(&tree);
            let portals = place_portals(&regions, 9).unwrap();
            let e = build_assignment(&clients, &l, &g, &regions, &portals).unwrap();
            assert!(structure_violations(&clients, &l, &g, &regions, &e).unwrap().is_empty());

            let part = partition_clients(&clients, &l, &g, &regions).unwrap();
            let pair = ServingPair::new(&clients, &l, &g).unwrap();
            let (_, of_g) = region_membership(&regions, 40, 40);
            let mut in_cell = vec![0; 200];
            for (ri, _) in regions.iter().enumerate() {
                for c in 0..200 {
                    if of_g[pair.global.serving[c]] == ri {
                        in_cell[c] += 1;
                    }
                }
            }
            assert!(in_cell.iter().all(|&k| k == 1));
            assert_eq!(part.served_by_global.len() + part.served_by_local.len(), 200);
            for (ri, delta) in part.deltas.iter().enumerate() {
                assert!(delta.iter().all(|c| !part.region_clients[ri].contains(c)));
            }
        }
    }
}
