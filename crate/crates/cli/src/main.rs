mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coflowdag::baseline;
use coflowdag::gdm::{run_algorithm, simulate_online, Algorithm, RunConfig};
use coflowdag::oracle::{tightness, tightness_witness};
use coflowdag::verify::{lower_bounds, metrics, verify_schedule, Metrics};
use coflowdag::workload::{gen_arrivals, gen_weights, load_flow_trace, partition_into_jobs, synthetic_instance, Shape, SyntheticConfig, WeightMode};
use coflowdag::{Beta, Error, Instance, Schedule};
use serde_json::json;

#[derive(Parser)]
#[command(name = "coflowdag", version, about = "Schedule DAGs of coflows on a non-blocking switch")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scheduler on an instance and write the schedule and its metrics
    Schedule(ScheduleArgs),
    /// Sweep algorithms, betas and seeds and print CSV rows
    Bench(bench::BenchArgs),
    /// Check a schedule against an instance
    Verify(VerifyArgs),
    /// Generate an instance from a trace or at random
    Gen(GenArgs),
    /// Emit a tightness instance and its witness schedule
    Tightness(TightnessArgs),
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// dma, dma-rt, gdm, gdm-rt or baseline
    #[arg(long)]
    algo: String,
    /// Delay parameter, e.g. 2, 3/2 or 0.75
    #[arg(long, default_value = "2")]
    beta: String,
    #[arg(long, env = "SCHED_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    backfill: bool,
    /// Reschedule at every arrival and measure completion from arrival
    #[arg(long)]
    online: bool,
    /// Redraw releases as Poisson arrivals with this load factor (needs --online)
    #[arg(long, requires = "online")]
    a: Option<f64>,
    /// Schedule JSON output
    #[arg(long)]
    out: PathBuf,
    /// Metrics JSON output; defaults to the schedule path with a `.metrics.json` suffix
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Flow trace to partition into jobs; random coflows are drawn when absent
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Number of jobs (random mode only)
    #[arg(long, default_value_t = 20)]
    jobs: usize,
    #[arg(long, default_value_t = 5.0)]
    mean_mu: f64,
    /// dag or tree
    #[arg(long, default_value = "dag")]
    shape: String,
    /// equal or uniform01
    #[arg(long, default_value = "equal")]
    weights: String,
    /// Poisson arrival load factor; all releases are 0 when absent
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, env = "SCHED_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TightnessArgs {
    #[arg(long, short = 'k')]
    k: u64,
    #[arg(long, short = 'd', default_value_t = 1)]
    d: u64,
    #[arg(long)]
    out_instance: Option<PathBuf>,
    #[arg(long)]
    out_schedule: Option<PathBuf>,
}

/// Exit 1 for bad input, exit 2 when a produced or supplied schedule is infeasible.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Infeasible(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) | Error::Internal(_) => Failure::Infeasible(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.cmd {
        Cmd::Schedule(a) => cmd_schedule(a),
        Cmd::Bench(a) => bench::cmd_bench(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Tightness(a) => cmd_tightness(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let inst = Instance::from_json_str(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    inst.ensure_valid()?;
    Ok(inst)
}

pub fn parse_beta(s: &str) -> Result<Beta, Failure> {
    Ok(s.parse::<Beta>()?)
}

pub fn parse_algo(s: &str) -> Result<Algorithm, Failure> {
    Ok(s.parse::<Algorithm>()?)
}

fn check_feasible(inst: &Instance, sched: &Schedule) -> CmdResult {
    let v = verify_schedule(inst, sched);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Failure::Infeasible(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")))
    }
}

fn metrics_json(m: &Metrics) -> serde_json::Value {
    let per_job: serde_json::Map<String, serde_json::Value> =
        m.per_job_completion.iter().map(|(id, c)| (id.0.to_string(), json!(c))).collect();
    json!({
        "makespan": m.makespan,
        "total_weighted_completion": m.total_weighted_f64(),
        "total_weighted_completion_exact": m.total_weighted_completion.to_string(),
        "per_job_completion": per_job,
    })
}

fn cmd_schedule(a: ScheduleArgs) -> CmdResult {
    let algo = parse_algo(&a.algo)?;
    let beta = parse_beta(&a.beta)?;
    let mut inst = load_instance(&a.instance)?;
    let cfg = RunConfig { beta, seed: a.seed, backfill: a.backfill };
    let (sched, m) = if a.online {
        if let Some(factor) = a.a {
            let releases = gen_arrivals(&inst.jobs, factor, a.seed)?;
            for (j, r) in inst.jobs.iter_mut().zip(releases) {
                j.release = r;
            }
        }
        let r = simulate_online(&inst, algo, &cfg)?;
        (r.schedule, r.metrics)
    } else {
        let s = run_algorithm(&inst, algo, &cfg)?;
        check_feasible(&inst, &s)?;
        let m = metrics(&inst, &s)?;
        (s, m)
    };
    check_feasible(&inst, &sched)?;
    let mut report = metrics_json(&m);
    let obj = report.as_object_mut().expect("object");
    obj.insert("algorithm".into(), json!(algo.name()));
    if algo == Algorithm::Baseline {
        obj.insert("label".into(), json!(baseline::LABEL));
    }
    obj.insert("beta".into(), json!(beta.to_string()));
    obj.insert("seed".into(), json!(a.seed));
    obj.insert("backfill".into(), json!(a.backfill));
    obj.insert("online".into(), json!(a.online));
    let metrics_path = a.metrics.unwrap_or_else(|| a.out.with_extension("metrics.json"));
    write(&a.out, &sched.to_json_string())?;
    write(&metrics_path, &serde_json::to_string_pretty(&report).expect("json"))?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let sched = Schedule::from_json_str(&read(&a.schedule)?).map_err(|e| Failure::Invalid(format!("{}: {e}", a.schedule.display())))?;
    if sched.m != inst.m {
        return Err(Failure::Invalid(format!("schedule has {} servers, instance has {}", sched.m, inst.m)));
    }
    let v = verify_schedule(&inst, &sched);
    if !v.is_empty() {
        for x in &v {
            println!("{x}");
        }
        return Err(Failure::Infeasible(format!("{} violation(s)", v.len())));
    }
    let m = metrics(&inst, &sched)?;
    println!("{}", serde_json::to_string_pretty(&metrics_json(&m)).expect("json"));
    Ok(())
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let shape: Shape = a.shape.parse()?;
    let weights: WeightMode = a.weights.parse()?;
    let inst = match &a.trace {
        Some(path) => {
            let coflows = load_flow_trace(path, a.m)?;
            let mut jobs = partition_into_jobs(&coflows, a.mean_mu, shape, a.seed)?;
            let ws = gen_weights(jobs.len(), weights, a.seed);
            for (j, w) in jobs.iter_mut().zip(ws) {
                j.weight = w;
            }
            if let Some(factor) = a.a {
                let releases = gen_arrivals(&jobs, factor, a.seed)?;
                for (j, r) in jobs.iter_mut().zip(releases) {
                    j.release = r;
                }
            }
            Instance { m: a.m, jobs }
        }
        None => synthetic_instance(&SyntheticConfig {
            m: a.m,
            jobs: a.jobs,
            mean_mu: a.mean_mu,
            shape,
            weights,
            arrival_factor: a.a,
            seed: a.seed,
        })?,
    };
    inst.ensure_valid()?;
    let text = inst.to_json_string();
    match a.out {
        Some(p) => write(&p, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_tightness(a: TightnessArgs) -> CmdResult {
    let inst = tightness(a.k, a.d)?;
    let sched = tightness_witness(a.k, a.d)?;
    check_feasible(&inst, &sched)?;
    let span = metrics(&inst, &sched)?.makespan;
    let (delta, t) = lower_bounds(&inst);
    let bound = delta.max(t);
    let report = json!({
        "k": a.k,
        "d": a.d,
        "m": inst.m,
        "coflows": inst.total_coflows(),
        "aggregate_size": delta,
        "critical_path": t,
        "span": span,
        "ratio": format!("{span}/{bound}"),
        "ratio_value": span as f64 / bound as f64,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    if let Some(p) = a.out_instance {
        write(&p, &inst.to_json_string())?;
    }
    if let Some(p) = a.out_schedule {
        write(&p, &sched.to_json_string())?;
    }
    Ok(())
}
