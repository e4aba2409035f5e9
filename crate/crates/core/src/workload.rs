//! Trace ingestion and random instance generation.
//!
//! Trace format: one flow per line, `coflow_id src dst size`, whitespace
//! separated. Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric};

use crate::bna::effective_size;
use crate::error::{Error, Result};
use crate::model::{Coflow, CoflowId, DemandMatrix, Instance, Job, JobId};
use crate::params::{rng_for, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Dag,
    Tree,
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dag" => Ok(Shape::Dag),
            "tree" => Ok(Shape::Tree),
            _ => Err(Error::InvalidParameter(format!("unknown shape {s:?} (expected dag or tree)"))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Dag => "dag",
            Shape::Tree => "tree",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Equal,
    Uniform01,
}

impl FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(WeightMode::Equal),
            "uniform01" => Ok(WeightMode::Uniform01),
            _ => Err(Error::InvalidParameter(format!("unknown weight mode {s:?} (expected equal or uniform01)"))),
        }
    }
}

pub fn load_flow_trace(path: impl AsRef<Path>, m: usize) -> Result<Vec<Coflow>> {
    parse_flow_trace(&std::fs::read_to_string(path)?, m)
}

/// Groups flows by coflow id (ascending). Port numbers larger than `m` are
/// folded onto `1..=m` modulo `m`.
pub fn parse_flow_trace(text: &str, m: usize) -> Result<Vec<Coflow>> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut by_id: BTreeMap<u32, DemandMatrix> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Trace { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |k: usize, what: &str| -> Result<u64> {
            fields[k].parse::<u64>().map_err(|_| err(format!("bad {what} {:?}", fields[k])))
        };
        let id = u32::try_from(num(0, "coflow id")?).map_err(|_| err("coflow id too large".into()))?;
        let (src, dst, size) = (num(1, "source")?, num(2, "destination")?, num(3, "size")?);
        if src == 0 || dst == 0 {
            return Err(err("ports are numbered from 1".into()));
        }
        let fold = |x: u64| ((x - 1) % m as u64) as usize + 1;
        by_id.entry(id).or_insert_with(|| DemandMatrix::new(m)).add(fold(src), fold(dst), size);
    }
    Ok(by_id.into_iter().map(|(id, demand)| Coflow { id: CoflowId(id), demand }).collect())
}

/// Block size `1 + Geometric(1 / mean_mu)`, clamped to `[1, 2 * mean_mu]`.
fn block_size(rng: &mut ChaCha8Rng, mean_mu: f64) -> usize {
    let extra = Geometric::new(1.0 / mean_mu).expect("mean_mu >= 1").sample(rng) as f64;
    (1.0 + extra).min((2.0 * mean_mu).floor()).max(1.0) as usize
}

fn check_mean(mean_mu: f64) -> Result<()> {
    if !(mean_mu >= 1.0 && mean_mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mean_mu must be >= 1, got {mean_mu}")));
    }
    Ok(())
}

/// Builds job `id` from coflows in the given order, renumbering them `1..`.
/// Each forward pair gets an edge with probability 1/2. In tree mode every
/// coflow but the last keeps one of its drawn out-edges (or points at the last
/// coflow when it drew none), giving a fan-in tree rooted at the last coflow.
fn make_job(id: u32, demands: Vec<DemandMatrix>, shape: Shape, rng: &mut ChaCha8Rng) -> Job {
    let n = demands.len();
    let coflows: Vec<Coflow> = demands
        .into_iter()
        .enumerate()
        .map(|(i, demand)| Coflow { id: CoflowId(i as u32 + 1), demand })
        .collect();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, succ) in out.iter_mut().enumerate() {
        for b in a + 1..n {
            if rng.random_bool(0.5) {
                succ.push(b);
            }
        }
    }
    let cid = |i: usize| CoflowId(i as u32 + 1);
    let edges = match shape {
        Shape::Dag => out.iter().enumerate().flat_map(|(a, bs)| bs.iter().map(move |&b| (cid(a), cid(b)))).collect(),
        Shape::Tree => (0..n.saturating_sub(1))
            .map(|a| {
                let to = if out[a].is_empty() { n - 1 } else { out[a][rng.random_range(0..out[a].len())] };
                (cid(a), cid(to))
            })
            .collect(),
    };
    Job { id: JobId(id), weight: 1.0, release: 0, coflows, edges }
}

/// Shuffles the coflows and cuts them into consecutive blocks, one job per block.
pub fn partition_into_jobs(coflows: &[Coflow], mean_mu: f64, shape: Shape, seed: u64) -> Result<Vec<Job>> {
    check_mean(mean_mu)?;
    let mut rng = rng_for(seed, Stream::Workload, &[0]);
    let mut pool: Vec<&Coflow> = coflows.iter().collect();
    pool.shuffle(&mut rng);
    let mut jobs = Vec::new();
    let mut i = 0;
    while i < pool.len() {
        let k = block_size(&mut rng, mean_mu).min(pool.len() - i);
        let demands = pool[i..i + k].iter().map(|c| c.demand.clone()).collect();
        jobs.push(make_job(jobs.len() as u32 + 1, demands, shape, &mut rng));
        i += k;
    }
    Ok(jobs)
}

/// Random coflow: `1..=m` flows with random ports and sizes in `1..=10`.
fn random_demand(rng: &mut ChaCha8Rng, m: usize) -> DemandMatrix {
    let mut d = DemandMatrix::new(m);
    for _ in 0..rng.random_range(1..=m) {
        d.add(rng.random_range(1..=m), rng.random_range(1..=m), rng.random_range(1..=10));
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub m: usize,
    pub jobs: usize,
    pub mean_mu: f64,
    pub shape: Shape,
    pub weights: WeightMode,
    /// Arrival load factor; `None` releases every job at 0.
    pub arrival_factor: Option<f64>,
    pub seed: u64,
}

/// Exactly `params.jobs` jobs with geometric coflow counts and random demands.
pub fn synthetic_instance(params: &SyntheticConfig) -> Result<Instance> {
    check_mean(params.mean_mu)?;
    if params.m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut rng = rng_for(params.seed, Stream::Workload, &[1]);
    let mut jobs = Vec::with_capacity(params.jobs);
    for id in 1..=params.jobs {
        let k = block_size(&mut rng, params.mean_mu);
        let demands = (0..k).map(|_| random_demand(&mut rng, params.m)).collect();
        jobs.push(make_job(id as u32, demands, params.shape, &mut rng));
    }
    let weights = gen_weights(jobs.len(), params.weights, params.seed);
    for (j, w) in jobs.iter_mut().zip(weights) {
        j.weight = w;
    }
    if let Some(a) = params.arrival_factor {
        let rel = gen_arrivals(&jobs, a, params.seed)?;
        for (j, r) in jobs.iter_mut().zip(rel) {
            j.release = r;
        }
    }
    Ok(Instance { m: params.m, jobs })
}

/// Base arrival rate: total coflows over total coflow effective size.
pub fn base_rate(jobs: &[Job]) -> Option<f64> {
    let mu: usize = jobs.iter().map(|j| j.coflows.len()).sum();
    let size: u64 = jobs.iter().flat_map(|j| j.coflows.iter()).map(|c| effective_size(&c.demand)).sum();
    (size > 0).then(|| mu as f64 / size as f64)
}

/// Poisson arrivals at rate `a * base_rate`, rounded to the nearest slot.
/// The first job arrives at the first event, not at 0.
pub fn gen_arrivals(jobs: &[Job], a: f64, seed: u64) -> Result<Vec<u64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("arrival factor must be positive, got {a}")));
    }
    let Some(theta0) = base_rate(jobs) else {
        return Ok(vec![0; jobs.len()]);
    };
    let exp = Exp::new(a * theta0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = rng_for(seed, Stream::Arrivals, &[]);
    let mut t = 0.0;
    Ok(jobs
        .iter()
        .map(|_| {
            t += exp.sample(&mut rng);
            t.round() as u64
        })
        .collect())
}

/// `Equal` gives 1. `Uniform01` gives `k / 10^6` with `k` uniform on `1..=10^6`.
pub fn gen_weights(n: usize, mode: WeightMode, seed: u64) -> Vec<f64> {
    match mode {
        WeightMode::Equal => vec![1.0; n],
        WeightMode::Uniform01 => {
            let mut rng = rng_for(seed, Stream::Weights, &[]);
            (0..n).map(|_| rng.random_range(1..=1_000_000u32) as f64 / 1e6).collect()
        }
    }
}
