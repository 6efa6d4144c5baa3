use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use geols::bench::{
    gen_uniform, oracle_cost, records_to_csv, run_experiment, solve, write_json, ExperimentConfig, InstanceSpec,
    Problem, SolveParams,
};
use geols::dissection::{adaptive_dissection, verify_structure_bound};
use geols::geom::read_points;
use geols::tsp::lower_bound_instance;

#[derive(Parser)]
#[command(name = "geols", version, about = "Local search for Euclidean TSP, Steiner tree, facility location and k-median")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run local search on one instance.
    Solve(SolveArgs),
    /// Run a seeded experiment and write CSV and JSON records.
    Bench(BenchArgs),
    /// Build an adaptive dissection, or measure the portal assignment cost with --trials.
    Dissect(DissectArgs),
    /// Solve one small instance exactly.
    Oracle(SolveArgs),
    /// Emit the comb instance with its bad and good tours.
    Lowerbound(LowerboundArgs),
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_parser = clap::value_parser!(Problem))]
    problem: Problem,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 2)]
    swap_budget: usize,
    /// Facility opening cost.
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of uniform random points; ignored with --input.
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Point file, one `x y` pair per line.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Also compute the exact optimum (solve only).
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolveArgs {
    fn points(&self) -> Result<Vec<geols::Point>> {
        match &self.input {
            Some(p) => Ok(read_points(p)?),
            None => Ok(gen_uniform(self.n, self.seed)),
        }
    }

    fn params(&self) -> SolveParams {
        SolveParams {
            problem: self.problem.problem,
            epsilon: self.problem.epsilon,
            swap_budget: self.problem.swap_budget,
            f: self.problem.f,
            k: self.problem.k,
            seed: self.seed,
            improvement_factor: None,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// JSON experiment config; overrides every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(Problem))]
    problem: Option<Problem>,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 2)]
    swap_budget: usize,
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    oracle: bool,
    /// CSV path; the JSON copy is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DissectArgs {
    /// Size of each random facility set L and G.
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Number of clients for --trials.
    #[arg(long, default_value_t = 500)]
    clients: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    epsilon: f64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LowerboundArgs {
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => {
            let pts = args.points()?;
            let params = args.params();
            let out = solve(&pts, &params)?;
            println!("cost {}", out.cost);
            println!("iterations {}", out.trace.iterations);
            if args.oracle {
                let opt = oracle_cost(&pts, &params)?;
                println!("oracle {opt}");
                println!("ratio {}", out.cost / opt);
            }
            if let Some(path) = &args.out {
                write_json(path, &out)?;
            }
        }
        Command::Oracle(args) => {
            let pts = args.points()?;
            println!("{}", oracle_cost(&pts, &args.params())?);
        }
        Command::Bench(args) => {
            let config = match &args.config {
                Some(path) => ExperimentConfig::from_json_file(path)?,
                None => {
                    let Some(problem) = args.problem else {
                        bail!("bench needs --problem or --config");
                    };
                    ExperimentConfig {
                        problem,
                        instance: InstanceSpec::Uniform { n: args.n },
                        epsilon: args.epsilon,
                        swap_budget: args.swap_budget,
                        f: args.f.or((problem == Problem::Fl).then_some(1.0)),
                        k: args.k.or((problem == Problem::Kmedian).then_some(1)),
                        seeds: args.seeds.clone(),
                        oracle: args.oracle,
                        output: args.out.clone(),
                        improvement_factor: None,
                    }
                }
            };
            let records = run_experiment(&config)?;
            if config.output.is_none() {
                print!("{}", records_to_csv(&records)?);
            }
        }
        Command::Dissect(args) => {
            let l = gen_uniform(args.n, args.seed);
            let g = gen_uniform(args.n, args.seed.wrapping_add(1));
            match args.trials {
                Some(trials) => {
                    let clients = gen_uniform(args.clients, args.seed.wrapping_add(2));
                    let stats = verify_structure_bound(&clients, &l, &g, args.epsilon, trials, args.seed)?;
                    let mut text = String::from("trial,cost_e,cost_e0,ratio\n");
                    for r in &stats.rows {
                        text += &format!("{},{},{},{}\n", r.trial, r.cost_e, r.cost_e0, r.ratio);
                    }
                    match &args.out {
                        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
                        None => print!("{text}"),
                    }
                    eprintln!("mean ratio {} max ratio {}", stats.mean_ratio, stats.max_ratio);
                }
                None => {
                    let tree = adaptive_dissection(&l, &g, args.epsilon, args.seed)?;
                    match &args.out {
                        Some(path) => write_json(path, &tree)?,
                        None => println!("{}", serde_json::to_string(&tree)?),
                    }
                }
            }
        }
        Command::Lowerbound(args) => {
            let lb = lower_bound_instance(args.k)?;
            println!("points {}", lb.instance.len());
            println!("ratio {}", lb.ratio);
            if let Some(path) = &args.out {
                write_json(path, &lb)?;
            }
        }
    }
    Ok(())
}
