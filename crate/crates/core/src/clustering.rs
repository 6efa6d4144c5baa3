//! Uniform facility location and bicriteria k-median over a finite set of
//! candidate sites, with add / drop / swap neighborhoods.

use std::ops::ControlFlow;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{LocalSearchProblem, SearchRng};
use crate::error::{Error, Result};
use crate::geom::{dist, Point};

/// Compound moves of one (drops, adds) shape are skipped when the shape has
/// more combinations than this.
pub const MULTI_MOVE_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringInstance {
    clients: Vec<Point>,
    sites: Vec<Point>,
    facility_cost: f64,
    k: usize,
    epsilon: f64,
}

impl ClusteringInstance {
    /// Facility cost 1, `k = 1`, `epsilon = 0` until set otherwise.
    pub fn new(clients: Vec<Point>, sites: Vec<Point>) -> Result<Self> {
        if clients.is_empty() {
            return Err(Error::validation("no clients"));
        }
        if sites.is_empty() {
            return Err(Error::validation("no candidate sites"));
        }
        if let Some(p) = clients.iter().chain(&sites).find(|p| !p.is_finite()) {
            return Err(Error::validation(format!("non-finite point {p:?}")));
        }
        Ok(ClusteringInstance {
            clients,
            sites,
            facility_cost: 1.0,
            k: 1,
            epsilon: 0.0,
        })
    }

    /// Candidate sites are the clients followed by the centers of a
    /// `grid x grid` partition of the unit square.
    pub fn on_clients(clients: Vec<Point>, grid: Option<usize>) -> Result<Self> {
        let mut sites = clients.clone();
        if let Some(g) = grid.filter(|&g| g > 0) {
            for i in 0..g {
                for j in 0..g {
                    sites.push(Point::new(
                        (j as f64 + 0.5) / g as f64,
                        (i as f64 + 0.5) / g as f64,
                    ));
                }
            }
        }
        ClusteringInstance::new(clients, sites)
    }

    pub fn with_facility_cost(mut self, f: f64) -> Result<Self> {
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::validation(format!("facility cost must be nonnegative, got {f}")));
        }
        self.facility_cost = f;
        Ok(self)
    }

    pub fn with_k(mut self, k: usize, epsilon: f64) -> Result<Self> {
        if k == 0 || k > self.sites.len() {
            return Err(Error::validation(format!(
                "k must lie in 1..={}, got {k}",
                self.sites.len()
            )));
        }
        if !(epsilon >= 0.0 && epsilon < 1.0) {
            return Err(Error::validation(format!("epsilon must lie in [0, 1), got {epsilon}")));
        }
        self.k = k;
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn clients(&self) -> &[Point] {
        &self.clients
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn facility_cost(&self) -> f64 {
        self.facility_cost
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Most medians a k-median solution may open: `floor((1 + 3 eps) k)`.
    pub fn median_cap(&self) -> usize {
        (((1.0 + 3.0 * self.epsilon) * self.k as f64 + 1e-9).floor() as usize).min(self.sites.len())
    }
}

/// Indices of open candidate sites, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpenSites {
    pub open: Vec<usize>,
}

pub type FacilitySolution = OpenSites;
pub type KMedianSolution = OpenSites;

impl OpenSites {
    pub fn new(mut open: Vec<usize>) -> Self {
        open.sort_unstable();
        open.dedup();
        OpenSites { open }
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn symmetric_difference(&self, other: &OpenSites) -> usize {
        let a: std::collections::BTreeSet<_> = self.open.iter().collect();
        let b: std::collections::BTreeSet<_> = other.open.iter().collect();
        a.symmetric_difference(&b).count()
    }
}

/// Nearest facility of every client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientAssignment {
    /// Index into the facility list passed to [`assign_clients`].
    pub serving: Vec<usize>,
    pub distances: Vec<f64>,
}

impl ClientAssignment {
    pub fn total(&self) -> f64 {
        self.distances.iter().sum()
    }
}

/// Maps each client to its nearest facility, lowest index on ties.
pub fn assign_clients(clients: &[Point], facilities: &[Point]) -> Result<ClientAssignment> {
    if facilities.is_empty() {
        return Err(Error::validation("cannot assign clients to an empty facility set"));
    }
    let (serving, distances) = clients
        .iter()
        .map(|c| {
            facilities
                .iter()
                .enumerate()
                .map(|(i, f)| (i, dist(*c, *f)))
                .fold((usize::MAX, f64::INFINITY), |best, cur| {
                    if cur.1 < best.1 {
                        cur
                    } else {
                        best
                    }
                })
        })
        .unzip();
    Ok(ClientAssignment { serving, distances })
}

fn check_open(inst: &ClusteringInstance, sol: &OpenSites) -> Result<()> {
    if sol.is_empty() {
        return Err(Error::validation("no open facility"));
    }
    if let Some(&i) = sol.open.iter().find(|&&i| i >= inst.sites.len()) {
        return Err(Error::validation(format!(
            "site {i} out of range for {} sites",
            inst.sites.len()
        )));
    }
    if sol.open.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("open sites must be sorted and distinct"));
    }
    Ok(())
}

fn check_cap(inst: &ClusteringInstance, sol: &OpenSites) -> Result<()> {
    if sol.len() > inst.median_cap() {
        return Err(Error::validation(format!(
            "{} medians exceed the cap {}",
            sol.len(),
            inst.median_cap()
        )));
    }
    Ok(())
}

fn connection_cost(inst: &ClusteringInstance, open: &[usize]) -> f64 {
    inst.clients
        .iter()
        .map(|c| {
            open.iter()
                .map(|&s| dist(*c, inst.sites[s]))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// `f * |open| + sum of client distances to their nearest open site`.
pub fn fl_cost(inst: &ClusteringInstance, sol: &FacilitySolution) -> Result<f64> {
    check_open(inst, sol)?;
    Ok(inst.facility_cost * sol.len() as f64 + connection_cost(inst, &sol.open))
}

/// Sum of client distances to their nearest open median.
pub fn kmedian_cost(inst: &ClusteringInstance, sol: &KMedianSolution) -> Result<f64> {
    check_open(inst, sol)?;
    check_cap(inst, sol)?;
    Ok(connection_cost(inst, &sol.open))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    FacilityLocation,
    KMedian,
}

pub(crate) fn check_budget(p: usize) -> Result<()> {
    if (1..=4).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "clustering swap budget must lie in 1..=4, got {p}"
        )))
    }
}

/// Per-client distances to the nearest few open sites, for quick move
/// evaluation.
struct Nearest {
    /// `(distance, site)` pairs, ascending, at most `depth` per client.
    lists: Vec<Vec<(f64, usize)>>,
}

impl Nearest {
    fn build(inst: &ClusteringInstance, open: &[usize], depth: usize) -> Self {
        let lists = inst
            .clients
            .iter()
            .map(|c| {
                let mut all: Vec<(f64, usize)> =
                    open.iter().map(|&s| (dist(*c, inst.sites[s]), s)).collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                all.truncate(depth);
                all
            })
            .collect();
        Nearest { lists }
    }

    /// Connection cost after closing `drops` and opening `adds`.
    fn connection_after(&self, inst: &ClusteringInstance, drops: &[usize], adds: &[usize]) -> f64 {
        inst.clients
            .iter()
            .zip(&self.lists)
            .map(|(c, list)| {
                let kept = list
                    .iter()
                    .find(|(_, s)| !drops.contains(s))
                    .map_or(f64::INFINITY, |x| x.0);
                adds.iter()
                    .map(|&a| dist(*c, inst.sites[a]))
                    .fold(kept, f64::min)
            })
            .sum()
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as u64
}

/// Some solution differing from `sol` in at most `p` sites with cost at most
/// `threshold`.
///
/// Scan order: single drops, single swaps, single adds, then compound moves
/// by total size. Facility location keeps at least one site open; k-median
/// also respects [`ClusteringInstance::median_cap`].
pub fn swap_improving_neighbor(
    inst: &ClusteringInstance,
    sol: &OpenSites,
    p: usize,
    threshold: f64,
    objective: Objective,
) -> Result<Option<OpenSites>> {
    check_budget(p)?;
    check_open(inst, sol)?;
    let (f, cap) = match objective {
        Objective::FacilityLocation => (inst.facility_cost, inst.sites.len()),
        Objective::KMedian => {
            check_cap(inst, sol)?;
            (0.0, inst.median_cap())
        }
    };
    let open = &sol.open;
    let closed: Vec<usize> = (0..inst.sites.len()).filter(|s| open.binary_search(s).is_err()).collect();
    let nearest = Nearest::build(inst, open, p + 1);

    let mut shapes: Vec<(usize, usize)> = vec![(1, 0), (1, 1), (0, 1)];
    for size in 2..=p {
        for drops in (0..=size).rev() {
            let shape = (drops, size - drops);
            if shape != (1, 1) {
                shapes.push(shape);
            }
        }
    }
    shapes.retain(|&(d, a)| d + a <= p);

    for (nd, na) in shapes {
        if nd > open.len() || na > closed.len() {
            continue;
        }
        let after = open.len() + na - nd;
        if after == 0 || after > cap {
            continue;
        }
        let combos = binomial(open.len(), nd).saturating_mul(binomial(closed.len(), na));
        if nd + na > 1 && combos > MULTI_MOVE_LIMIT {
            continue;
        }
        let found = open.iter().copied().combinations(nd).try_for_each(|drops| {
            closed.iter().copied().combinations(na).try_for_each(|adds| {
                let cost = f * after as f64 + nearest.connection_after(inst, &drops, &adds);
                if cost <= threshold {
                    ControlFlow::Break((drops.clone(), adds))
                } else {
                    ControlFlow::Continue(())
                }
            })
        });
        if let ControlFlow::Break((drops, adds)) = found {
            let next: Vec<usize> = open
                .iter()
                .copied()
                .filter(|s| !drops.contains(s))
                .chain(adds)
                .collect();
            return Ok(Some(OpenSites::new(next)));
        }
    }
    Ok(None)
}

/// Every client's own site open.
pub fn all_clients_open(inst: &ClusteringInstance) -> FacilitySolution {
    OpenSites::new((0..inst.clients.len().min(inst.sites.len())).collect())
}

/// `k` distinct sites drawn uniformly with the given seed.
pub fn random_medians(inst: &ClusteringInstance, seed: u64) -> KMedianSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OpenSites::new(sample(&mut rng, inst.sites.len(), inst.k).into_vec())
}

pub struct FacilityLocationProblem<'a> {
    inst: &'a ClusteringInstance,
}

impl<'a> FacilityLocationProblem<'a> {
    pub fn new(inst: &'a ClusteringInstance) -> Self {
        FacilityLocationProblem { inst }
    }
}

impl LocalSearchProblem for FacilityLocationProblem<'_> {
    type Solution = FacilitySolution;

    fn size(&self) -> usize {
        self.inst.clients.len()
    }

    fn validate(&self, sol: &FacilitySolution) -> Result<()> {
        check_open(self.inst, sol)
    }

    fn validate_budget(&self, budget: usize) -> Result<()> {
        check_budget(budget)
    }

    fn cost(&self, sol: &FacilitySolution) -> f64 {
        self.inst.facility_cost * sol.len() as f64 + connection_cost(self.inst, &sol.open)
    }

    fn improving_neighbor(
        &self,
        sol: &FacilitySolution,
        budget: usize,
        threshold: f64,
        _rng: &mut SearchRng,
    ) -> Result<Option<FacilitySolution>> {
        swap_improving_neighbor(self.inst, sol, budget, threshold, Objective::FacilityLocation)
    }
}

pub struct KMedianProblem<'a> {
    inst: &'a ClusteringInstance,
}

impl<'a> KMedianProblem<'a> {
    pub fn new(inst: &'a ClusteringInstance) -> Self {
        KMedianProblem { inst }
    }
}

impl LocalSearchProblem for KMedianProblem<'_> {
    type Solution = KMedianSolution;

    fn size(&self) -> usize {
        self.inst.clients.len()
    }

    fn validate(&self, sol: &KMedianSolution) -> Result<()> {
        check_open(self.inst, sol)?;
        check_cap(self.inst, sol)
    }

    fn validate_budget(&self, budget: usize) -> Result<()> {
        check_budget(budget)
    }

    fn cost(&self, sol: &KMedianSolution) -> f64 {
        connection_cost(self.inst, &sol.open)
    }

    fn improving_neighbor(
        &self,
        sol: &KMedianSolution,
        budget: usize,
        threshold: f64,
        _rng: &mut SearchRng,
    ) -> Result<Option<KMedianSolution>> {
        swap_improving_neighbor(self.inst, sol, budget, threshold, Objective::KMedian)
    }
}
