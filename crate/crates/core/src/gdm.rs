//! Group-then-delay-and-merge pipelines for total weighted completion time,
//! backfilling, and the online arrival driver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::baseline::sequential_baseline;
use crate::dagstats::JobGraph;
use crate::dma::{dma, DmaConfig};
use crate::error::{Error, Result};
use crate::grouping::{group_jobs, Grouping};
use crate::model::{Assignment, Coflow, DemandMatrix, FlowKey, Instance, Job, JobId, Schedule, TimedMatching};
use crate::ordering::{order_jobs, OrderingResult};
use crate::params::Beta;
use crate::rooted::dma_rt;
use crate::verify::{metrics, metrics_with, Metrics};

#[derive(Debug, Clone)]
pub struct GdmResult {
    pub schedule: Schedule,
    pub metrics: Metrics,
    pub ordering: OrderingResult,
    pub grouping: Grouping,
    /// Start slot of each non-empty group.
    pub group_starts: BTreeMap<usize, u64>,
}

pub fn g_dm(inst: &Instance, beta: Beta, seed: u64) -> Result<GdmResult> {
    grouped(inst, beta, seed, dma)
}

pub fn g_dm_rt(inst: &Instance, beta: Beta, seed: u64) -> Result<GdmResult> {
    grouped(inst, beta, seed, dma_rt)
}

fn grouped(inst: &Instance, beta: Beta, seed: u64, sub: fn(&Instance, &DmaConfig) -> Result<Schedule>) -> Result<GdmResult> {
    let ordering = order_jobs(inst)?;
    let grouping = group_jobs(inst, &ordering.sigma)?;
    let cfg = DmaConfig::new(beta, seed);
    let mut schedule = Schedule::new(inst.m);
    let mut group_starts = BTreeMap::new();
    let mut finish = 0;
    for (b, ids) in grouping.groups.iter().enumerate() {
        if ids.is_empty() {
            continue;
        }
        let part = inst.subset(ids);
        let start = finish.max(part.jobs.iter().map(|j| j.release).max().unwrap_or(0));
        let s = sub(&part, &cfg)?;
        finish = start + s.span();
        schedule.extend(s.shifted(start));
        group_starts.insert(b, start);
    }
    schedule.sort();
    let metrics = metrics(inst, &schedule)?;
    Ok(GdmResult { schedule, metrics, ordering, grouping, group_starts })
}

/// Fills port pairs the base schedule leaves idle with packets from released,
/// precedence-ready, unfinished flows, in `priority` job order, then
/// topological coflow order, then `(src, dst)` order. Base assignments whose
/// flow has already finished free their ports as well.
pub fn backfill(inst: &Instance, base: &Schedule, priority: &[JobId]) -> Result<Schedule> {
    let m = inst.m;
    let mut state = FlowState::new(inst)?;
    // Candidate flows in priority order.
    let mut rank: Vec<JobId> = priority.to_vec();
    let mut rest: Vec<JobId> = inst.jobs.iter().map(|j| j.id).filter(|id| !priority.contains(id)).collect();
    rest.sort();
    rank.extend(rest);
    let mut candidates: Vec<FlowKey> = Vec::new();
    for id in &rank {
        let Some(job) = inst.job(*id) else { continue };
        for ci in &state.topo[id] {
            let c = &job.coflows[*ci];
            for (src, dst, _) in c.demand.flows() {
                candidates.push(FlowKey { job: job.id, coflow: c.id, src, dst });
            }
        }
    }

    let mut items: Vec<&TimedMatching> = base.items.iter().filter(|it| it.duration > 0).collect();
    items.sort_by_key(|it| it.start);
    let mut events: BTreeSet<u64> = BTreeSet::new();
    for it in &items {
        events.insert(it.start);
        events.insert(it.end());
    }
    events.extend(inst.jobs.iter().map(|j| j.release));

    let mut out = Schedule::new(m);
    let mut t = 0;
    while state.unfinished > 0 {
        let base_now: Vec<&Assignment> = items
            .iter()
            .filter(|it| it.start <= t && t < it.end())
            .flat_map(|it| it.assignments.iter())
            .collect();
        let mut send_used = vec![false; m + 1];
        let mut recv_used = vec![false; m + 1];
        let mut sending: Vec<FlowKey> = Vec::new();
        for a in base_now {
            let k = FlowKey::from(a);
            if state.remaining.get(&k).copied().unwrap_or(0) > 0 {
                send_used[a.src] = true;
                recv_used[a.dst] = true;
                sending.push(k);
            }
        }
        for k in &candidates {
            if send_used[k.src] || recv_used[k.dst] || state.remaining[k] == 0 || !state.ready(inst, k, t) {
                continue;
            }
            send_used[k.src] = true;
            recv_used[k.dst] = true;
            sending.push(*k);
        }
        let next_event = events.range(t + 1..).next().copied();
        if sending.is_empty() {
            match next_event {
                Some(e) => {
                    t = e;
                    continue;
                }
                None => return Err(Error::Internal("backfill stalled with unfinished flows".into())),
            }
        }
        let mut step = sending.iter().map(|k| state.remaining[k]).min().unwrap_or(1);
        if let Some(e) = next_event {
            step = step.min(e - t);
        }
        for k in &sending {
            state.send(k, step);
        }
        out.push(TimedMatching {
            start: t,
            duration: step,
            assignments: sending
                .iter()
                .map(|k| Assignment { src: k.src, dst: k.dst, job: k.job, coflow: k.coflow })
                .collect(),
        });
        t += step;
    }
    Ok(out)
}

/// Remaining packets per flow plus enough structure to answer readiness.
struct FlowState {
    remaining: BTreeMap<FlowKey, u64>,
    coflow_left: BTreeMap<(JobId, usize), u64>,
    graphs: BTreeMap<JobId, JobGraph>,
    topo: BTreeMap<JobId, Vec<usize>>,
    unfinished: usize,
}

impl FlowState {
    fn new(inst: &Instance) -> Result<Self> {
        let mut remaining = BTreeMap::new();
        let mut coflow_left = BTreeMap::new();
        let mut graphs = BTreeMap::new();
        let mut topo = BTreeMap::new();
        for job in &inst.jobs {
            let g = JobGraph::new(job);
            topo.insert(job.id, g.topo_indices(job.id)?);
            for (i, c) in job.coflows.iter().enumerate() {
                for (src, dst, v) in c.demand.flows() {
                    remaining.insert(FlowKey { job: job.id, coflow: c.id, src, dst }, v);
                }
                coflow_left.insert((job.id, i), c.demand.total());
            }
            graphs.insert(job.id, g);
        }
        let unfinished = remaining.len();
        Ok(Self { remaining, coflow_left, graphs, topo, unfinished })
    }

    fn send(&mut self, k: &FlowKey, n: u64) {
        let r = self.remaining.get_mut(k).expect("known flow");
        *r -= n;
        if *r == 0 {
            self.unfinished -= 1;
        }
        let i = self.graphs[&k.job].index_of(k.coflow).expect("known coflow");
        *self.coflow_left.get_mut(&(k.job, i)).unwrap() -= n;
    }

    /// A coflow is done once it and all its ancestors have no packets left.
    fn done(&self, job: JobId, i: usize) -> bool {
        self.coflow_left[&(job, i)] == 0 && self.graphs[&job].preds[i].iter().all(|&p| self.done(job, p))
    }

    fn ready(&self, inst: &Instance, k: &FlowKey, t: u64) -> bool {
        let job = inst.job(k.job).expect("known job");
        let g = &self.graphs[&k.job];
        let i = g.index_of(k.coflow).expect("known coflow");
        t >= job.release && g.preds[i].iter().all(|&p| self.done(k.job, p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Dma,
    DmaRt,
    Gdm,
    GdmRt,
    Baseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Dma, Algorithm::DmaRt, Algorithm::Gdm, Algorithm::GdmRt, Algorithm::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dma => "dma",
            Algorithm::DmaRt => "dma-rt",
            Algorithm::Gdm => "gdm",
            Algorithm::GdmRt => "gdm-rt",
            Algorithm::Baseline => "baseline",
        }
    }

    pub fn needs_trees(self) -> bool {
        matches!(self, Algorithm::DmaRt | Algorithm::GdmRt)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub beta: Beta,
    pub seed: u64,
    pub backfill: bool,
}

/// Runs one algorithm offline. Makespan-only algorithms start after the
/// latest release so that every job is available.
pub fn run_algorithm(inst: &Instance, algo: Algorithm, cfg: &RunConfig) -> Result<Schedule> {
    let dcfg = DmaConfig { beta: cfg.beta, seed: cfg.seed, gate_releases: true };
    let (sched, priority) = match algo {
        Algorithm::Dma => (dma(inst, &dcfg)?, None),
        Algorithm::DmaRt => (dma_rt(inst, &dcfg)?, None),
        Algorithm::Gdm => {
            let r = g_dm(inst, cfg.beta, cfg.seed)?;
            (r.schedule, Some(r.ordering.sigma))
        }
        Algorithm::GdmRt => {
            let r = g_dm_rt(inst, cfg.beta, cfg.seed)?;
            (r.schedule, Some(r.ordering.sigma))
        }
        Algorithm::Baseline => (sequential_baseline(inst, true)?.0, None),
    };
    if !cfg.backfill {
        return Ok(sched);
    }
    let priority = match priority {
        Some(p) => p,
        None => order_jobs(inst)?.sigma,
    };
    backfill(inst, &sched, &priority)
}

#[derive(Debug, Clone)]
pub struct OnlineResult {
    /// Everything actually transmitted, in absolute time.
    pub schedule: Schedule,
    /// Completion times measured from each job's arrival.
    pub metrics: Metrics,
    pub epochs: Vec<u64>,
}

/// Reschedules all arrived, unfinished jobs at every arrival epoch and
/// executes the result until the next epoch.
pub fn simulate_online(inst: &Instance, algo: Algorithm, cfg: &RunConfig) -> Result<OnlineResult> {
    let epochs: Vec<u64> = inst.jobs.iter().map(|j| j.release).collect::<BTreeSet<_>>().into_iter().collect();
    let mut sent: BTreeMap<FlowKey, u64> = BTreeMap::new();
    let mut executed = Schedule::new(inst.m);
    for (i, &now) in epochs.iter().enumerate() {
        let next = epochs.get(i + 1).copied();
        let residual = residual_instance(inst, &sent, now);
        if residual.jobs.is_empty() {
            continue;
        }
        let s = run_algorithm(&residual, algo, cfg)?.shifted(now);
        let s = match next {
            Some(n) => s.truncated(n),
            None => s,
        };
        for (k, v) in s.flow_totals() {
            *sent.entry(k).or_insert(0) += v;
        }
        executed.extend(s);
    }
    executed.sort();
    let metrics = metrics_with(inst, &executed, true)?;
    Ok(OnlineResult { schedule: executed, metrics, epochs })
}

/// Jobs released by `now` with packets left, each with its remaining demand
/// and release 0. Finished coflows stay as empty nodes so the graph shape is kept.
fn residual_instance(inst: &Instance, sent: &BTreeMap<FlowKey, u64>, now: u64) -> Instance {
    let mut jobs = Vec::new();
    for job in inst.jobs.iter().filter(|j| j.release <= now) {
        let coflows: Vec<Coflow> = job
            .coflows
            .iter()
            .map(|c| {
                let left = c.demand.flows().map(|(src, dst, v)| {
                    let k = FlowKey { job: job.id, coflow: c.id, src, dst };
                    (src, dst, v - sent.get(&k).copied().unwrap_or(0))
                });
                Coflow { id: c.id, demand: DemandMatrix::from_flows(inst.m, left) }
            })
            .collect();
        if coflows.iter().all(|c| c.demand.is_empty()) {
            continue;
        }
        jobs.push(Job { id: job.id, weight: job.weight, release: 0, coflows, edges: job.edges.clone() });
    }
    Instance { m: inst.m, jobs }
}
