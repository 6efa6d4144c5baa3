use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{derive_seed, gen_poisson, gen_uniform};
use super::solve::{oracle_cost, solve, Problem, SolveParams};
use crate::engine::swap_budget_from_epsilon;
use crate::error::{Error, Result};
use crate::geom::{read_points, Point};
use crate::tsp::{lower_bound_instance, nearest_neighbor_tour, tour_length, TspInstance, TspProblem};

pub const CSV_HEADER: [&str; 8] = ["problem", "n", "seed", "cost", "oracle_cost", "ratio", "iterations", "wall_ms"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum InstanceSpec {
    Uniform { n: usize },
    Poisson { intensity: f64 },
    File { path: PathBuf },
    /// The comb with `k` teeth on which 2-opt can be far from optimal.
    Comb { k: usize },
}

impl InstanceSpec {
    pub fn points(&self, seed: u64) -> Result<Vec<Point>> {
        let pts = match self {
            InstanceSpec::Uniform { n } => gen_uniform(*n, seed),
            InstanceSpec::Poisson { intensity } => gen_poisson(*intensity, seed),
            InstanceSpec::File { path } => read_points(path)?,
            InstanceSpec::Comb { k } => lower_bound_instance(*k)?.instance.points().to_vec(),
        };
        if pts.is_empty() {
            return Err(Error::validation(format!("instance {self:?} with seed {seed} has no points")));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub instance: InstanceSpec,
    pub epsilon: f64,
    pub swap_budget: usize,
    #[serde(default)]
    pub f: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub oracle: bool,
    /// CSV destination; the JSON copy goes next to it with a `.json` extension.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub improvement_factor: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::validation(format!("epsilon {} outside [0, 1)", self.epsilon)));
        }
        if self.swap_budget == 0 {
            return Err(Error::validation("swap budget must be positive"));
        }
        match self.problem {
            Problem::Fl if self.f.is_none() => Err(Error::validation("facility location needs f")),
            Problem::Kmedian if self.k.is_none() => Err(Error::validation("k-median needs k")),
            _ => Ok(()),
        }
    }

    pub fn params(&self, seed: u64) -> SolveParams {
        SolveParams {
            problem: self.problem,
            epsilon: self.epsilon,
            swap_budget: self.swap_budget,
            f: self.f.unwrap_or(1.0),
            k: self.k.unwrap_or(1),
            seed,
            improvement_factor: self.improvement_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub problem: Problem,
    pub n: usize,
    pub seed: u64,
    pub cost: f64,
    pub oracle_cost: Option<f64>,
    pub ratio: Option<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
    /// Why the oracle was skipped; kept out of the CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn run_one(config: &ExperimentConfig, seed: u64) -> Result<ResultRecord> {
    let points = config.instance.points(seed)?;
    let params = config.params(seed);
    let out = solve(&points, &params)?;
    let mut record = ResultRecord {
        problem: config.problem,
        n: points.len(),
        seed,
        cost: out.cost,
        oracle_cost: None,
        ratio: None,
        iterations: out.trace.iterations,
        wall_ms: out.trace.wall_time.as_secs_f64() * 1e3,
        note: None,
    };
    if config.oracle {
        match oracle_cost(&points, &params) {
            Ok(opt) => {
                record.oracle_cost = Some(opt);
                record.ratio = Some(if opt > 0.0 { out.cost / opt } else { 1.0 });
            }
            Err(e @ (Error::Capacity(_) | Error::Validation(_))) => record.note = Some(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    Ok(record)
}

/// Runs every seed in parallel, sorts the records by `(n, seed)` and writes
/// CSV and JSON when an output path is configured.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let mut records = config
        .seeds
        .par_iter()
        .map(|&seed| run_one(config, seed))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.n, r.seed));
    if let Some(path) = &config.output {
        write_csv(path, &records)?;
        write_json(path.with_extension("json"), &records)?;
    }
    Ok(records)
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn records_to_csv(records: &[ResultRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in records {
        w.write_record([
            r.problem.name().to_string(),
            r.n.to_string(),
            r.seed.to_string(),
            r.cost.to_string(),
            opt_field(r.oracle_cost),
            opt_field(r.ratio),
            r.iterations.to_string(),
            r.wall_ms.to_string(),
        ])
        .map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn records_from_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Serialization(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    rdr.records()
        .enumerate()
        .map(|(i, row)| {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let bad = |what: &str| Error::Parse {
                line,
                message: format!("bad {what}"),
            };
            let num = |j: usize| row[j].parse::<f64>().map_err(|_| bad(CSV_HEADER[j]));
            let opt = |j: usize| -> Result<Option<f64>> {
                if row[j].is_empty() {
                    Ok(None)
                } else {
                    num(j).map(Some)
                }
            };
            Ok(ResultRecord {
                problem: row[0].parse()?,
                n: row[1].parse().map_err(|_| bad("n"))?,
                seed: row[2].parse().map_err(|_| bad("seed"))?,
                cost: num(3)?,
                oracle_cost: opt(4)?,
                ratio: opt(5)?,
                iterations: row[6].parse().map_err(|_| bad("iterations"))?,
                wall_ms: num(7)?,
                note: None,
            })
        })
        .collect()
}

pub fn write_csv(path: impl AsRef<Path>, records: &[ResultRecord]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, records_to_csv(records)?).map_err(|e| Error::io(path, e))
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub n: usize,
    /// Local-optimum tour length over `sqrt(n)`, one per trial.
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

impl BetaRow {
    fn from_samples(n: usize, samples: Vec<f64>) -> Self {
        let t = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / t;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        BetaRow {
            n,
            samples,
            mean,
            std_dev: var.sqrt(),
        }
    }

    pub fn standard_error(&self) -> f64 {
        self.std_dev / (self.samples.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BHHEstimate {
    pub epsilon: f64,
    pub swap_budget: usize,
    pub rows: Vec<BetaRow>,
}

impl BHHEstimate {
    /// Each mean exceeds the previous one by at most `k` pooled standard
    /// errors of the pair.
    pub fn is_non_increasing(&self, k: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let pooled = (w[0].standard_error().powi(2) + w[1].standard_error().powi(2)).sqrt();
            w[1].mean <= w[0].mean + k * pooled
        })
    }
}

/// Swap budget used by [`estimate_beta`]: `ceil(1/eps)` kept within 2..=3.
pub fn beta_swap_budget(epsilon: f64) -> Result<usize> {
    Ok(swap_budget_from_epsilon(epsilon, 1, 3)?.max(2))
}

/// Local-optimum tour length over `sqrt(n)` from a nearest-neighbor start.
pub fn beta_sample(points: &[Point], swap_budget: usize, seed: u64) -> Result<f64> {
    let inst = TspInstance::new(points.to_vec())?;
    let config = crate::engine::SearchConfig::new(0.0, swap_budget).with_seed(seed);
    let (tour, _) = crate::engine::run_local_search(&TspProblem::new(&inst), nearest_neighbor_tour(&inst), &config)?;
    Ok(tour_length(&inst, &tour)? / (points.len() as f64).sqrt())
}

pub fn estimate_beta(n_values: &[usize], trials_per_n: usize, epsilon: f64, seed: u64) -> Result<BHHEstimate> {
    if trials_per_n == 0 {
        return Err(Error::validation("need at least one trial per n"));
    }
    let swap_budget = beta_swap_budget(epsilon)?;
    let rows = n_values
        .iter()
        .map(|&n| {
            let base = derive_seed(seed, n as u64);
            let samples = (0..trials_per_n)
                .into_par_iter()
                .map(|t| {
                    let s = derive_seed(base, t as u64);
                    beta_sample(&gen_uniform(n, s), swap_budget, s)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BetaRow::from_samples(n, samples))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BHHEstimate {
        epsilon,
        swap_budget,
        rows,
    })
}
