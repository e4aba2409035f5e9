use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use coflowdag::gdm::{run_algorithm, simulate_online, Algorithm, RunConfig};
use coflowdag::verify::{metrics, verify_schedule, Metrics};
use coflowdag::workload::{synthetic_instance, Shape, SyntheticConfig, WeightMode};
use coflowdag::{Beta, Instance};
use rayon::prelude::*;

use crate::{load_instance, parse_algo, parse_beta, write, CmdResult, Failure};

#[derive(Args)]
pub struct BenchArgs {
    /// Instance JSON to run on
    #[arg(long, conflicts_with = "gen")]
    instance: Option<PathBuf>,
    /// Random instance parameters, e.g. `m=20,n=20,mu=5,shape=dag,weights=uniform01,seed=1`
    #[arg(long)]
    gen: Option<String>,
    /// Comma-separated algorithms
    #[arg(long, value_delimiter = ',', default_value = "gdm")]
    algos: Vec<String>,
    /// Comma-separated betas
    #[arg(long, value_delimiter = ',', default_value = "2")]
    betas: Vec<String>,
    /// Comma-separated seeds; each is expanded to `repeats` consecutive seeds
    #[arg(long, value_delimiter = ',', env = "SCHED_SEED", default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    #[arg(long)]
    backfill: bool,
    #[arg(long)]
    online: bool,
    /// CSV output; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

pub const HEADER: &str = "algo,beta,seed,m,mean_mu,makespan,total_weighted_ct,runtime_ms";

struct Row {
    algo: Algorithm,
    beta: Beta,
    seed: u64,
    metrics: Metrics,
    runtime_ms: f64,
}

fn parse_gen(params: &str) -> Result<SyntheticConfig, Failure> {
    let mut s = SyntheticConfig { m: 20, jobs: 20, mean_mu: 5.0, shape: Shape::Dag, weights: WeightMode::Uniform01, arrival_factor: None, seed: 0 };
    for part in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Failure::Invalid(format!("bad --gen entry {part:?}")))?;
        let bad = || Failure::Invalid(format!("bad value for {k}: {v:?}"));
        match k {
            "m" => s.m = v.parse().map_err(|_| bad())?,
            "n" | "jobs" => s.jobs = v.parse().map_err(|_| bad())?,
            "mu" | "mean_mu" => s.mean_mu = v.parse().map_err(|_| bad())?,
            "shape" => s.shape = v.parse()?,
            "weights" => s.weights = v.parse()?,
            "a" => s.arrival_factor = Some(v.parse().map_err(|_| bad())?),
            "seed" => s.seed = v.parse().map_err(|_| bad())?,
            _ => return Err(Failure::Invalid(format!("unknown --gen key {k:?}"))),
        }
    }
    Ok(s)
}

/// Sample standard deviation over mean; 0 for fewer than two values.
pub fn rsd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 || mean == 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt() / mean
}

pub fn cmd_bench(a: BenchArgs) -> CmdResult {
    if a.algos.iter().all(|s| s.trim().is_empty()) {
        return Err(Failure::Invalid("empty algorithm list".into()));
    }
    let algos = a.algos.iter().map(|s| parse_algo(s)).collect::<Result<Vec<_>, _>>()?;
    let betas = a.betas.iter().map(|s| parse_beta(s)).collect::<Result<Vec<_>, _>>()?;
    if betas.is_empty() || a.seeds.is_empty() || a.repeats == 0 {
        return Err(Failure::Invalid("need at least one beta, one seed and repeats >= 1".into()));
    }
    let (inst, mean_mu): (Instance, f64) = match (&a.instance, &a.gen) {
        (Some(p), _) => {
            let inst = load_instance(p)?;
            let mu = inst.total_coflows() as f64 / inst.jobs.len().max(1) as f64;
            (inst, mu)
        }
        (None, Some(g)) => {
            let params = parse_gen(g)?;
            (synthetic_instance(&params)?, params.mean_mu)
        }
        (None, None) => return Err(Failure::Invalid("one of --instance or --gen is required".into())),
    };
    let seeds: Vec<u64> = a.seeds.iter().flat_map(|&s| s..s + a.repeats).collect();
    let mut configs = Vec::new();
    for &algo in &algos {
        for &beta in &betas {
            for &seed in &seeds {
                configs.push((algo, beta, seed));
            }
        }
    }
    let (backfill, online) = (a.backfill, a.online);
    let rows: Vec<Result<Row, Failure>> = configs
        .par_iter()
        .map(|&(algo, beta, seed)| {
            let cfg = RunConfig { beta, seed, backfill };
            let t0 = Instant::now();
            let metrics = if online {
                simulate_online(&inst, algo, &cfg)?.metrics
            } else {
                let s = run_algorithm(&inst, algo, &cfg)?;
                let v = verify_schedule(&inst, &s);
                if !v.is_empty() {
                    return Err(Failure::Infeasible(format!("{algo} beta={beta} seed={seed}: {}", v[0])));
                }
                metrics(&inst, &s)?
            };
            Ok(Row { algo, beta, seed, metrics, runtime_ms: t0.elapsed().as_secs_f64() * 1e3 })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in &rows {
        let twct = r.metrics.total_weighted_f64();
        writeln!(out, "{},{},{},{},{},{},{},{:.3}", r.algo, r.beta, r.seed, inst.m, mean_mu, r.metrics.makespan, twct, r.runtime_ms).unwrap();
        let ai = algos.iter().position(|&x| x == r.algo).unwrap();
        let bi = betas.iter().position(|&x| x == r.beta).unwrap();
        groups.entry((ai, bi)).or_default().push(twct);
    }
    for ((ai, bi), v) in &groups {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        writeln!(out, "# rsd algo={} beta={} runs={} mean_total_weighted_ct={} rsd={:.6}", algos[*ai], betas[*bi], v.len(), mean, rsd(v)).unwrap();
    }
    match &a.out {
        Some(p) => write(p, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}
