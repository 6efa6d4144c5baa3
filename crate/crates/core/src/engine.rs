//! First-improvement local search driver.
//!
//! A run repeatedly asks the problem for a neighbor inside its swap budget
//! whose cost is at most `improvement_factor * cost(S)`, accepts the first
//! one found and stops when none exists. With the default factor
//! `1 - 1/n`, the number of accepted moves is bounded by
//! [`iteration_bound`].

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic generator handed to neighborhoods for scan ordering.
pub type SearchRng = ChaCha8Rng;

/// Absolute slack subtracted from the acceptance threshold so that ties are
/// rejected and floating-point noise cannot produce an endless run.
pub const ACCEPT_SLACK: f64 = 1e-12;

/// Default cap applied by [`swap_budget_from_epsilon`].
pub const DEFAULT_BUDGET_CAP: usize = 4;

/// A problem exposes its cost function and an improving-neighbor oracle.
pub trait LocalSearchProblem {
    type Solution: Clone;

    /// Instance size `n` used by the default improvement factor.
    fn size(&self) -> usize;

    fn validate(&self, sol: &Self::Solution) -> Result<()>;

    fn validate_budget(&self, budget: usize) -> Result<()>;

    fn cost(&self, sol: &Self::Solution) -> f64;

    /// Normalization applied to the initial solution before searching
    /// (uncrossing a tour, trimming surplus Steiner points).
    fn prepare(&self, sol: Self::Solution) -> Self::Solution {
        sol
    }

    /// Some neighbor within `budget` whose cost is at most `threshold`.
    fn improving_neighbor(
        &self,
        sol: &Self::Solution,
        budget: usize,
        threshold: f64,
        rng: &mut SearchRng,
    ) -> Result<Option<Self::Solution>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub epsilon: f64,
    pub swap_budget: usize,
    pub max_iterations: usize,
    /// Defaults to `1 - 1/n` when unset.
    pub improvement_factor: Option<f64>,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            epsilon: 0.5,
            swap_budget: 2,
            max_iterations: 1_000_000,
            improvement_factor: None,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn new(epsilon: f64, swap_budget: usize) -> Self {
        SearchConfig {
            epsilon,
            swap_budget,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_improvement_factor(mut self, factor: f64) -> Self {
        self.improvement_factor = Some(factor);
        self
    }

    pub fn with_max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::validation(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if self.swap_budget == 0 {
            return Err(Error::validation("swap budget must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("max_iterations must be positive"));
        }
        if let Some(f) = self.improvement_factor {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::validation(format!(
                    "improvement factor must lie in (0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }

    /// Factor actually used for an instance of size `n`.
    pub fn factor_for(&self, n: usize) -> f64 {
        self.improvement_factor
            .unwrap_or_else(|| default_improvement_factor(n))
    }
}

/// `1 - 1/n`, which is 0 for `n <= 1` (no move can ever be accepted).
pub fn default_improvement_factor(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        1.0 - 1.0 / n as f64
    }
}

/// `ceil(1 / epsilon^exponent)` clamped to `[1, cap]`.
pub fn swap_budget_from_epsilon(epsilon: f64, exponent: u32, cap: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::validation(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let raw = (1.0 / epsilon.powi(exponent as i32) - 1e-9).ceil();
    let raw = if raw.is_finite() && raw < usize::MAX as f64 {
        raw as usize
    } else {
        usize::MAX
    };
    Ok(raw.clamp(1, cap.max(1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    LocalOptimum,
    IterationCap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchTrace {
    pub iterations: usize,
    pub initial_cost: f64,
    /// Cost after each accepted move.
    pub costs: Vec<f64>,
    pub improvement_factor: f64,
    pub wall_time: Duration,
    pub termination: Termination,
}

impl SearchTrace {
    pub fn final_cost(&self) -> f64 {
        self.costs.last().copied().unwrap_or(self.initial_cost)
    }

    /// Every accepted move satisfied `cost' <= factor * cost`.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial_cost;
        for &c in &self.costs {
            if c > self.improvement_factor * prev {
                return false;
            }
            prev = c;
        }
        true
    }
}

pub fn run_local_search<P: LocalSearchProblem>(
    problem: &P,
    initial: P::Solution,
    config: &SearchConfig,
) -> Result<(P::Solution, SearchTrace)> {
    run_local_search_observed(problem, initial, config, |_, _| {})
}

/// As [`run_local_search`], calling `on_accept` with every accepted solution
/// and its cost.
pub fn run_local_search_observed<P, F>(
    problem: &P,
    initial: P::Solution,
    config: &SearchConfig,
    mut on_accept: F,
) -> Result<(P::Solution, SearchTrace)>
where
    P: LocalSearchProblem,
    F: FnMut(&P::Solution, f64),
{
    config.validate()?;
    problem.validate_budget(config.swap_budget)?;
    problem.validate(&initial)?;

    let start = Instant::now();
    let mut rng = SearchRng::seed_from_u64(config.seed);
    let factor = config.factor_for(problem.size());

    let mut current = problem.prepare(initial);
    problem.validate(&current)?;
    let initial_cost = problem.cost(&current);
    let mut cost = initial_cost;
    let mut costs = Vec::new();
    let mut termination = Termination::LocalOptimum;

    loop {
        if costs.len() >= config.max_iterations {
            termination = Termination::IterationCap;
            break;
        }
        let threshold = factor * cost - ACCEPT_SLACK;
        if threshold < 0.0 {
            break;
        }
        let Some(next) =
            problem.improving_neighbor(&current, config.swap_budget, threshold, &mut rng)?
        else {
            break;
        };
        let next_cost = problem.cost(&next);
        if next_cost > threshold {
            return Err(Error::validation(format!(
                "neighborhood returned cost {next_cost} above threshold {threshold}"
            )));
        }
        on_accept(&next, next_cost);
        current = next;
        cost = next_cost;
        costs.push(cost);
    }

    let trace = SearchTrace {
        iterations: costs.len(),
        initial_cost,
        costs,
        improvement_factor: factor,
        wall_time: start.elapsed(),
        termination,
    };
    Ok((current, trace))
}

/// `ceil(log(initial / final) / log(1 / (1 - 1/n)))`.
pub fn iteration_bound(initial_cost: f64, final_cost: f64, n: usize) -> Result<u64> {
    iteration_bound_for_factor(initial_cost, final_cost, default_improvement_factor(n))
}

/// Maximum number of accepted moves when each move multiplies the cost by at
/// most `factor`.
pub fn iteration_bound_for_factor(initial_cost: f64, final_cost: f64, factor: f64) -> Result<u64> {
    if !(final_cost > 0.0) || !(initial_cost > 0.0) {
        return Err(Error::validation(format!(
            "costs must be positive, got {initial_cost} and {final_cost}"
        )));
    }
    if initial_cost < final_cost {
        return Err(Error::validation(format!(
            "initial cost {initial_cost} below final cost {final_cost}"
        )));
    }
    if factor <= 0.0 {
        return Ok(0);
    }
    if factor >= 1.0 {
        return Err(Error::validation(format!(
            "no iteration bound for improvement factor {factor}"
        )));
    }
    let steps = (initial_cost / final_cost).ln() / (1.0 / factor).ln();
    // Absorbs rounding when the ratio is an exact power of 1/factor.
    Ok((steps - 1e-9).ceil().max(0.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Toy problem: reach 1 from an integer by halving or decrementing.
    struct Countdown;

    impl LocalSearchProblem for Countdown {
        type Solution = u64;
        fn size(&self) -> usize {
            4
        }
        fn validate(&self, s: &u64) -> Result<()> {
            if *s == 0 {
                Err(Error::validation("zero"))
            } else {
                Ok(())
            }
        }
        fn validate_budget(&self, b: usize) -> Result<()> {
            if b > 2 {
                Err(Error::validation("budget"))
            } else {
                Ok(())
            }
        }
        fn cost(&self, s: &u64) -> f64 {
            *s as f64
        }
        fn improving_neighbor(
            &self,
            s: &u64,
            _budget: usize,
            threshold: f64,
            _rng: &mut SearchRng,
        ) -> Result<Option<u64>> {
            Ok([s - 1, s / 2]
                .into_iter()
                .find(|&c| c >= 1 && (c as f64) <= threshold))
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(iteration_bound(100.0, 100.0, 10).unwrap(), 0);
        assert_eq!(iteration_bound(200.0, 100.0, 2).unwrap(), 1);
        // (e c, c, n): log(e) / log(n / (n - 1))
        for n in [10usize, 100] {
            let expect = (1.0 / (n as f64 / (n as f64 - 1.0)).ln()).ceil() as u64;
            let got = iteration_bound(std::f64::consts::E * 3.0, 3.0, n).unwrap();
            assert_eq!(got, expect);
            assert!((got as f64 - n as f64).abs() <= 1.0);
        }
        assert!(iteration_bound(0.0, 0.0, 3).is_err());
        assert!(iteration_bound(1.0, 2.0, 3).is_err());
    }

    #[test]
    fn run_respects_bound_and_monotonicity() {
        let cfg = SearchConfig::new(0.5, 2);
        let (sol, trace) = run_local_search(&Countdown, 1000, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::LocalOptimum);
        assert!(trace.is_monotone());
        let bound = iteration_bound(1000.0, sol as f64, 4).unwrap();
        assert!(trace.iterations as u64 <= bound);
        // 1 - 1/4 = 0.75: decrement is never enough, halving always is
        assert_eq!(sol, 1);
    }

    #[test]
    fn iteration_cap_is_recorded() {
        let cfg = SearchConfig::new(0.5, 2).with_max_iterations(2);
        let (_, trace) = run_local_search(&Countdown, 1000, &cfg).unwrap();
        assert_eq!(trace.iterations, 2);
        assert_eq!(trace.termination, Termination::IterationCap);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = SearchConfig::new(0.5, 2);
        assert!(run_local_search(&Countdown, 0, &cfg).is_err());
        assert!(run_local_search(&Countdown, 5, &SearchConfig::new(0.5, 3)).is_err());
        assert!(run_local_search(&Countdown, 5, &SearchConfig::new(1.5, 2)).is_err());
        let bad = SearchConfig::new(0.5, 2).with_improvement_factor(1.5);
        assert!(run_local_search(&Countdown, 5, &bad).is_err());
    }

    #[test]
    fn budget_from_epsilon() {
        assert_eq!(swap_budget_from_epsilon(0.5, 2, 4).unwrap(), 4);
        assert_eq!(swap_budget_from_epsilon(0.9, 2, 4).unwrap(), 2);
        assert_eq!(swap_budget_from_epsilon(0.5, 9, 4).unwrap(), 4);
        assert_eq!(swap_budget_from_epsilon(1.0 / 3.0f64.sqrt(), 2, 4).unwrap(), 3);
        assert!(swap_budget_from_epsilon(0.0, 2, 4).is_err());
    }
}
