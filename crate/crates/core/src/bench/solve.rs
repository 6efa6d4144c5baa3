use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{
    all_clients_open, random_medians, ClusteringInstance, FacilityLocationProblem, KMedianProblem, OpenSites,
};
use crate::engine::{run_local_search, SearchConfig, SearchTrace};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::oracles::{brute_force_fl, brute_force_kmedian, held_karp_tsp, small_steiner_opt};
use crate::steiner::{SteinerInstance, SteinerProblem, SteinerSolution};
use crate::tsp::{nearest_neighbor_tour, Tour, TspInstance, TspProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Tsp,
    Steiner,
    Fl,
    Kmedian,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Tsp => "tsp",
            Problem::Steiner => "steiner",
            Problem::Fl => "fl",
            Problem::Kmedian => "kmedian",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsp" => Ok(Problem::Tsp),
            "steiner" => Ok(Problem::Steiner),
            "fl" => Ok(Problem::Fl),
            "kmedian" | "k-median" => Ok(Problem::Kmedian),
            other => Err(Error::validation(format!("unknown problem {other:?}"))),
        }
    }
}

/// Everything needed to run one search besides the points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub problem: Problem,
    pub epsilon: f64,
    pub swap_budget: usize,
    /// Facility opening cost.
    #[serde(default = "one")]
    pub f: f64,
    #[serde(default = "one_usize")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub improvement_factor: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl SolveParams {
    pub fn new(problem: Problem, epsilon: f64, swap_budget: usize) -> Self {
        SolveParams {
            problem,
            epsilon,
            swap_budget,
            f: 1.0,
            k: 1,
            seed: 0,
            improvement_factor: None,
        }
    }

    fn search_config(&self) -> SearchConfig {
        let c = SearchConfig::new(self.epsilon, self.swap_budget).with_seed(self.seed);
        match self.improvement_factor {
            Some(f) => c.with_improvement_factor(f),
            None => c,
        }
    }

    fn clustering(&self, points: &[Point]) -> Result<ClusteringInstance> {
        let inst = ClusteringInstance::on_clients(points.to_vec(), None)?;
        match self.problem {
            Problem::Fl => inst.with_facility_cost(self.f),
            _ => inst.with_k(self.k, self.epsilon),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Solution {
    Tour(Tour),
    Steiner(SteinerSolution),
    Open(OpenSites),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solution: Solution,
    pub cost: f64,
    pub trace: SearchTrace,
}

/// Local search from the default start: a nearest-neighbor tour, no Steiner
/// points, every client's site open, or `k` random medians.
pub fn solve(points: &[Point], params: &SolveParams) -> Result<SolveOutcome> {
    let config = params.search_config();
    let (solution, trace) = match params.problem {
        Problem::Tsp => {
            let inst = TspInstance::new(points.to_vec())?;
            let start = nearest_neighbor_tour(&inst);
            let (t, trace) = run_local_search(&TspProblem::new(&inst), start, &config)?;
            (Solution::Tour(t), trace)
        }
        Problem::Steiner => {
            let inst = SteinerInstance::new(points.to_vec())?;
            let (s, trace) = run_local_search(&SteinerProblem::new(&inst), SteinerSolution::empty(), &config)?;
            (Solution::Steiner(s), trace)
        }
        Problem::Fl => {
            let inst = params.clustering(points)?;
            let start = all_clients_open(&inst);
            let (s, trace) = run_local_search(&FacilityLocationProblem::new(&inst), start, &config)?;
            (Solution::Open(s), trace)
        }
        Problem::Kmedian => {
            let inst = params.clustering(points)?;
            let start = random_medians(&inst, params.seed);
            let (s, trace) = run_local_search(&KMedianProblem::new(&inst), start, &config)?;
            (Solution::Open(s), trace)
        }
    };
    Ok(SolveOutcome {
        cost: trace.final_cost(),
        solution,
        trace,
    })
}

/// Exact optimum from the matching oracle. k-median is solved with the same
/// number of medians the local search may open.
pub fn oracle_cost(points: &[Point], params: &SolveParams) -> Result<f64> {
    Ok(match params.problem {
        Problem::Tsp => held_karp_tsp(points)?.optimal_cost,
        Problem::Steiner => small_steiner_opt(points)?.optimal_cost,
        Problem::Fl => brute_force_fl(points, points, params.f)?.optimal_cost,
        Problem::Kmedian => {
            let inst = params.clustering(points)?;
            brute_force_kmedian(points, points, inst.median_cap())?.optimal_cost
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::gen_uniform;

    #[test]
    fn problem_names_roundtrip() {
        for p in [Problem::Tsp, Problem::Steiner, Problem::Fl, Problem::Kmedian] {
            assert_eq!(p.name().parse::<Problem>().unwrap(), p);
        }
        assert!("tree".parse::<Problem>().is_err());
    }

    #[test]
    fn every_problem_solves_and_stays_above_oracle() {
        let pts = gen_uniform(8, 3);
        for problem in [Problem::Tsp, Problem::Fl, Problem::Kmedian] {
            let mut params = SolveParams::new(problem, 0.0, 2);
            params.k = 2;
            let out = solve(&pts, &params).unwrap();
            let opt = oracle_cost(&pts, &params).unwrap();
            assert!(out.cost >= opt - 1e-9, "{problem}");
        }
        let four = gen_uniform(4, 9);
        let params = SolveParams::new(Problem::Steiner, 0.5, 2);
        let out = solve(&four, &params).unwrap();
        assert!(out.cost >= oracle_cost(&four, &params).unwrap() - 1e-9);
    }

    #[test]
    fn oracle_capacity_is_reported() {
        let pts = gen_uniform(30, 1);
        let params = SolveParams::new(Problem::Tsp, 0.5, 2);
        assert!(matches!(oracle_cost(&pts, &params), Err(Error::Capacity(_))));
    }
}
