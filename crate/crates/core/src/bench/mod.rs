//! Instance generation, solver dispatch, experiment orchestration and the
//! tour-constant trend estimate.

mod experiment;
mod generate;
mod solve;

pub use experiment::{
    beta_sample, beta_swap_budget, estimate_beta, records_from_csv, records_to_csv, run_experiment, run_one,
    write_csv, write_json, BHHEstimate, BetaRow, ExperimentConfig, InstanceSpec, ResultRecord, CSV_HEADER,
};
pub use generate::{derive_seed, gen_poisson, gen_uniform};
#[cfg(test)]
pub(crate) use generate::uniform_points;
pub use solve::{oracle_cost, solve, Problem, SolveOutcome, SolveParams, Solution};
