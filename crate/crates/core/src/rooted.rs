//! Randomized delay-and-merge for rooted-tree jobs.
//!
//! A fan-in tree is split into path sub-jobs (leaf to root). Each path gets its
//! own random delay, and every coflow starts at the earliest path-induced
//! candidate time that respects its parents. Fan-out trees are scheduled as
//! their mirror image and the start times are reflected back.

use std::collections::BTreeMap;

use rand::Rng;

use crate::bna::{bna_decompose, effective_size};
use crate::dagstats::{aggregate_size, path_sub_jobs, rooted_tree_kind, JobGraph, PathSubJob, TreeKind};
use crate::dma::{draw_delays_on, feasibilize, gate, merge, segment_runs, CoflowSegment, DmaConfig};
use crate::error::{Error, Result};
use crate::model::{CoflowId, Instance, Job, Schedule, TimedMatching};
use crate::params::{rng_for, Beta, Stream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoflowStartPlan {
    /// Set when the job is a fan-out tree; `paths` and `candidates` then
    /// describe the mirrored fan-in tree while `starts` are in real time.
    pub mirrored: bool,
    pub paths: Vec<PathSubJob>,
    pub path_delays: Vec<u64>,
    pub candidates: BTreeMap<(CoflowId, usize), u64>,
    pub starts: BTreeMap<CoflowId, u64>,
    /// Lowest-indexed path whose candidate was chosen.
    pub attributed: BTreeMap<CoflowId, usize>,
    pub sizes: BTreeMap<CoflowId, u64>,
}

fn mirror(job: &Job) -> Job {
    let mut j = job.clone();
    j.edges = job.edges.iter().map(|&(a, b)| (b, a)).collect();
    j
}

/// Per-path delays and coflow starts for one rooted-tree job.
pub fn srt_plan(job: &Job, beta: Beta, seed: u64) -> Result<CoflowStartPlan> {
    let (kind, _) = rooted_tree_kind(job).ok_or(Error::NotRootedTree(job.id))?;
    let m = job.coflows.iter().map(|c| c.demand.m()).max().unwrap_or(0);
    let hi = beta.max_delay(aggregate_size(m, job.coflows.iter()));
    let tree = match kind {
        TreeKind::FanIn => job.clone(),
        TreeKind::FanOut => mirror(job),
    };
    let sizes: BTreeMap<CoflowId, u64> = job.coflows.iter().map(|c| (c.id, effective_size(&c.demand))).collect();
    let paths = path_sub_jobs(&tree)?;
    let path_delays: Vec<u64> = (0..paths.len())
        .map(|i| rng_for(seed, Stream::PathDelay, &[job.id.0 as u64, i as u64]).random_range(0..=hi))
        .collect();

    let mut candidates = BTreeMap::new();
    let mut on_paths: BTreeMap<CoflowId, Vec<usize>> = BTreeMap::new();
    for (p, path) in paths.iter().enumerate() {
        let mut t = path_delays[p];
        for &c in &path.coflows {
            candidates.insert((c, p), t);
            on_paths.entry(c).or_default().push(p);
            t += sizes[&c];
        }
    }

    let g = JobGraph::new(&tree);
    let mut starts = BTreeMap::new();
    let mut attributed = BTreeMap::new();
    for i in g.topo_indices(job.id)? {
        let c = g.ids[i];
        let ready = g.preds[i].iter().map(|&p| starts[&g.ids[p]] + sizes[&g.ids[p]]).max().unwrap_or(0);
        let best = on_paths[&c]
            .iter()
            .map(|&p| (candidates[&(c, p)], p))
            .filter(|&(t, _)| t >= ready)
            .min()
            .ok_or_else(|| Error::Internal(format!("{}: no start candidate for {c}", job.id)))?;
        starts.insert(c, best.0);
        attributed.insert(c, best.1);
    }

    if kind == TreeKind::FanOut {
        let end = starts.iter().map(|(c, t)| t + sizes[c]).max().unwrap_or(0);
        for (c, t) in starts.iter_mut() {
            *t = end - (*t + sizes[c]);
        }
    }
    Ok(CoflowStartPlan { mirrored: kind == TreeKind::FanOut, paths, path_delays, candidates, starts, attributed, sizes })
}

/// Unmerged runs of every coflow placed at its planned start.
fn srt_runs(job: &Job, plan: &CoflowStartPlan) -> Result<Vec<TimedMatching>> {
    let mut segments = Vec::with_capacity(job.coflows.len());
    for c in &job.coflows {
        segments.push(CoflowSegment { coflow: c.id, start: plan.starts[&c.id], bna: bna_decompose(&c.demand)? });
    }
    Ok(segment_runs(job.id, &segments, 0))
}

/// Schedules a single rooted-tree job on an `m x m` switch, ignoring its release.
pub fn dma_srt(job: &Job, m: usize, beta: Beta, seed: u64) -> Result<Schedule> {
    let plan = srt_plan(job, beta, seed)?;
    feasibilize(&merge(m, &srt_runs(job, &plan)?))
}

/// Per-job DMA-SRT schedules, shifted by job-level delays and merged.
pub fn dma_rt(inst: &Instance, cfg: &DmaConfig) -> Result<Schedule> {
    if let Some(j) = inst.jobs.iter().find(|j| rooted_tree_kind(j).is_none()) {
        return Err(Error::NotRootedTree(j.id));
    }
    let delta = aggregate_size(inst.m, inst.jobs.iter().flat_map(|j| j.coflows.iter()));
    let delays = draw_delays_on(inst.jobs.iter().map(|j| j.id), delta, cfg.beta, cfg.seed, Stream::TreeJobDelay);
    let mut runs = Vec::new();
    for job in &inst.jobs {
        let s = dma_srt(job, inst.m, cfg.beta, cfg.seed)?;
        runs.extend(s.shifted(delays[&job.id]).items);
    }
    let sched = feasibilize(&merge(inst.m, &runs))?;
    Ok(gate(inst, sched, cfg.gate_releases))
}
