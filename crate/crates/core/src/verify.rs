//! Independent feasibility checking and completion-time metrics.
//!
//! Everything here is derived from the raw assignments of a [`Schedule`]; no
//! scheduler bookkeeping is trusted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dagstats::{aggregate_size, critical_path_size, JobGraph};
use crate::error::{Error, Result};
use crate::model::{CoflowId, FlowKey, Instance, JobId, Schedule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    EmptyItem { start: u64 },
    PortOutOfRange { start: u64, src: usize, dst: usize },
    SenderConflict { slot: u64, src: usize },
    ReceiverConflict { slot: u64, dst: usize },
    UnknownFlow(FlowKey),
    DemandMismatch { flow: FlowKey, demand: u64, sent: u64 },
    Precedence { job: JobId, before: CoflowId, after: CoflowId, completes: u64, starts: u64 },
    BeforeRelease { job: JobId, release: u64, starts: u64 },
    BadInstance(String),
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            EmptyItem { start } => write!(f, "item at {start} has zero duration"),
            PortOutOfRange { start, src, dst } => write!(f, "item at {start}: pair {src}->{dst} out of range"),
            SenderConflict { slot, src } => write!(f, "slot {slot}: sender {src} used twice"),
            ReceiverConflict { slot, dst } => write!(f, "slot {slot}: receiver {dst} used twice"),
            UnknownFlow(k) => write!(f, "{}/{} {}->{}: no such flow", k.job, k.coflow, k.src, k.dst),
            DemandMismatch { flow: k, demand, sent } => {
                write!(f, "{}/{} {}->{}: demand {demand}, sent {sent}", k.job, k.coflow, k.src, k.dst)
            }
            Precedence { job, before, after, completes, starts } => {
                write!(f, "{job}: {after} starts at {starts} before {before} completes at {completes}")
            }
            BeforeRelease { job, release, starts } => write!(f, "{job} starts at {starts}, released at {release}"),
            BadInstance(s) => write!(f, "instance: {s}"),
        }
    }
}

/// Checks capacity, demand exactness, precedence and release gating.
/// An empty list means the schedule is feasible.
pub fn verify_schedule(inst: &Instance, sched: &Schedule) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let m = inst.m;
    for it in &sched.items {
        if it.duration == 0 {
            out.push(ScheduleViolation::EmptyItem { start: it.start });
        }
        for a in &it.assignments {
            if !(1..=m).contains(&a.src) || !(1..=m).contains(&a.dst) {
                out.push(ScheduleViolation::PortOutOfRange { start: it.start, src: a.src, dst: a.dst });
            }
        }
    }
    check_capacity(sched, &mut out);

    // demand exactness
    let mut sent: BTreeMap<FlowKey, u64> = BTreeMap::new();
    for it in &sched.items {
        for a in &it.assignments {
            *sent.entry(FlowKey::from(a)).or_insert(0) += it.duration;
        }
    }
    let mut demand: BTreeMap<FlowKey, u64> = BTreeMap::new();
    for job in &inst.jobs {
        for c in &job.coflows {
            for (src, dst, v) in c.demand.flows() {
                demand.insert(FlowKey { job: job.id, coflow: c.id, src, dst }, v);
            }
        }
    }
    for (k, &s) in &sent {
        if !demand.contains_key(k) {
            out.push(ScheduleViolation::UnknownFlow(*k));
        }
        let _ = s;
    }
    for (k, &d) in &demand {
        let s = sent.get(k).copied().unwrap_or(0);
        if s != d {
            out.push(ScheduleViolation::DemandMismatch { flow: *k, demand: d, sent: s });
        }
    }

    // precedence and release
    let spans = sched.coflow_spans();
    match coflow_completions(inst, sched) {
        Ok(done) => {
            for job in &inst.jobs {
                for &(a, b) in &job.edges {
                    if let Some(&(first_b, _)) = spans.get(&(job.id, b)) {
                        let ca = done[&(job.id, a)];
                        if first_b < ca {
                            out.push(ScheduleViolation::Precedence {
                                job: job.id,
                                before: a,
                                after: b,
                                completes: ca,
                                starts: first_b,
                            });
                        }
                    }
                }
                let first = job.coflows.iter().filter_map(|c| spans.get(&(job.id, c.id))).map(|x| x.0).min();
                if let Some(first) = first {
                    if first < job.release {
                        out.push(ScheduleViolation::BeforeRelease { job: job.id, release: job.release, starts: first });
                    }
                }
            }
        }
        Err(e) => out.push(ScheduleViolation::BadInstance(e.to_string())),
    }
    out
}

fn check_capacity(sched: &Schedule, out: &mut Vec<ScheduleViolation>) {
    let mut bounds: BTreeSet<u64> = BTreeSet::new();
    for it in sched.items.iter().filter(|it| it.duration > 0) {
        bounds.insert(it.start);
        bounds.insert(it.end());
    }
    let bounds: Vec<u64> = bounds.into_iter().collect();
    let mut items: Vec<_> = sched.items.iter().filter(|it| it.duration > 0).collect();
    items.sort_by_key(|it| it.start);
    let mut next = 0;
    let mut active = Vec::new();
    let mut reported: BTreeSet<(bool, usize)> = BTreeSet::new();
    for w in bounds.windows(2) {
        let lo = w[0];
        active.retain(|it: &&crate::model::TimedMatching| it.end() > lo);
        while next < items.len() && items[next].start <= lo {
            active.push(items[next]);
            next += 1;
        }
        let mut srcs = HashMap::new();
        let mut dsts = HashMap::new();
        for it in &active {
            for a in &it.assignments {
                *srcs.entry(a.src).or_insert(0) += 1;
                *dsts.entry(a.dst).or_insert(0) += 1;
            }
        }
        for (&s, &n) in &srcs {
            if n > 1 && reported.insert((true, s)) {
                out.push(ScheduleViolation::SenderConflict { slot: lo, src: s });
            }
        }
        for (&r, &n) in &dsts {
            if n > 1 && reported.insert((false, r)) {
                out.push(ScheduleViolation::ReceiverConflict { slot: lo, dst: r });
            }
        }
    }
}

/// Completion slot (exclusive end) of every coflow.
///
/// A coflow completes at the latest of its job's release, its predecessors'
/// completions, and one past its last packet. Empty coflows therefore finish
/// the moment their predecessors do.
pub fn coflow_completions(inst: &Instance, sched: &Schedule) -> Result<BTreeMap<(JobId, CoflowId), u64>> {
    let spans = sched.coflow_spans();
    let mut out = BTreeMap::new();
    for job in &inst.jobs {
        let g = JobGraph::new(job);
        let order = g.topo_indices(job.id)?;
        let mut done = vec![0u64; g.len()];
        for i in order {
            let own = spans.get(&(job.id, g.ids[i])).map(|x| x.1).unwrap_or(0);
            let preds = g.preds[i].iter().map(|&p| done[p]).max().unwrap_or(0);
            done[i] = job.release.max(preds).max(own);
            out.insert((job.id, g.ids[i]), done[i]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub makespan: u64,
    pub per_job_completion: BTreeMap<JobId, u64>,
    /// Exact sum of `weight * completion`.
    pub total_weighted_completion: BigRational,
}

impl Metrics {
    pub fn total_weighted_f64(&self) -> f64 {
        self.total_weighted_completion.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact rational value of an `f64` weight.
pub fn weight_ratio(w: f64) -> BigRational {
    BigRational::from_float(w).unwrap_or_else(BigRational::zero)
}

/// Completion-time metrics for a feasible schedule.
pub fn metrics(inst: &Instance, sched: &Schedule) -> Result<Metrics> {
    metrics_with(inst, sched, false)
}

/// With `from_arrival`, each job's completion is measured from its release.
pub fn metrics_with(inst: &Instance, sched: &Schedule, from_arrival: bool) -> Result<Metrics> {
    let v = verify_schedule(inst, sched);
    if !v.is_empty() {
        return Err(Error::Infeasible(v.iter().map(|x| x.to_string()).collect()));
    }
    let done = coflow_completions(inst, sched)?;
    let mut per_job = BTreeMap::new();
    let mut total = BigRational::zero();
    let mut makespan = 0;
    for job in &inst.jobs {
        let c = job.coflows.iter().map(|c| done[&(job.id, c.id)]).max().unwrap_or(job.release);
        makespan = makespan.max(c);
        let c = if from_arrival { c - job.release } else { c };
        per_job.insert(job.id, c);
        total += weight_ratio(job.weight) * BigRational::from_integer(BigInt::from(c));
    }
    Ok(Metrics { makespan, per_job_completion: per_job, total_weighted_completion: total })
}

/// `(aggregate size over all jobs, largest critical path)`; both bound the makespan from below.
pub fn lower_bounds(inst: &Instance) -> (u64, u64) {
    let delta = aggregate_size(inst.m, inst.jobs.iter().flat_map(|j| j.coflows.iter()));
    let t = inst.jobs.iter().map(|j| critical_path_size(j).unwrap_or(0)).max().unwrap_or(0);
    (delta, t)
}
