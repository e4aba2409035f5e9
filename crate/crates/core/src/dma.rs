//! Delay-and-merge makespan scheduling for jobs with general DAGs.
//!
//! Each job is first scheduled on its own by running its coflows back to back
//! in topological order. Those isolated schedules are shifted by random
//! delays, overlaid, and every resulting over-subscribed interval is expanded
//! into a feasible sequence of matchings.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use crate::bna::{bna_decompose, decompose_dense, effective_size, BnaResult};
use crate::dagstats::{aggregate_size, JobGraph};
use crate::error::Result;
use crate::model::{Assignment, CoflowId, Instance, Job, JobId, Schedule, TimedMatching};
use crate::params::{rng_for, Beta, Stream};

/// One coflow's decomposition placed at `start` (relative to the job, before delay).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoflowSegment {
    pub coflow: CoflowId,
    pub start: u64,
    pub bna: BnaResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolatedSchedule {
    pub job: JobId,
    pub segments: Vec<CoflowSegment>,
    pub delay: u64,
}

impl IsolatedSchedule {
    /// Length before the delay is applied.
    pub fn span(&self) -> u64 {
        self.segments.last().map(|s| s.start + s.bna.span()).unwrap_or(0)
    }

    pub fn runs(&self) -> Vec<TimedMatching> {
        segment_runs(self.job, &self.segments, self.delay)
    }
}

pub(crate) fn segment_runs(job: JobId, segments: &[CoflowSegment], offset: u64) -> Vec<TimedMatching> {
    let mut out = Vec::new();
    for seg in segments {
        for (t, dur, mt) in seg.bna.steps() {
            out.push(TimedMatching {
                start: offset + seg.start + t,
                duration: dur,
                assignments: mt
                    .iter()
                    .map(|&(src, dst)| Assignment { src, dst, job, coflow: seg.coflow })
                    .collect(),
            });
        }
    }
    out
}

pub fn isolated_schedule(job: &Job) -> Result<IsolatedSchedule> {
    let g = JobGraph::new(job);
    let order = g.topo_indices(job.id)?;
    let mut segments = Vec::with_capacity(order.len());
    let mut cursor = 0;
    for i in order {
        let c = &job.coflows[i];
        let bna = bna_decompose(&c.demand)?;
        let span = bna.span();
        segments.push(CoflowSegment { coflow: c.id, start: cursor, bna });
        cursor += span;
    }
    Ok(IsolatedSchedule { job: job.id, segments, delay: 0 })
}

/// Independent uniform delays on `0..=floor(delta / beta)`, one stream per job id.
pub fn draw_delays(jobs: &[Job], delta: u64, beta: Beta, seed: u64) -> BTreeMap<JobId, u64> {
    draw_delays_on(jobs.iter().map(|j| j.id), delta, beta, seed, Stream::JobDelay)
}

pub(crate) fn draw_delays_on(
    ids: impl Iterator<Item = JobId>,
    delta: u64,
    beta: Beta,
    seed: u64,
    stream: Stream,
) -> BTreeMap<JobId, u64> {
    let hi = beta.max_delay(delta);
    ids.map(|id| {
        let mut rng = rng_for(seed, stream, &[id.0 as u64]);
        (id, rng.random_range(0..=hi))
    })
    .collect()
}

/// Which flow a packet in a merged cell belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlowTag {
    pub job: JobId,
    pub coflow: CoflowId,
}

/// Elementary interval `[start, start + len)` of the overlaid schedule. Each
/// cell lists one tag per run that uses the port pair during the interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedInterval {
    pub start: u64,
    pub len: u64,
    pub cells: BTreeMap<(usize, usize), Vec<FlowTag>>,
}

impl MergedInterval {
    /// Largest number of packets any port must handle per slot in this interval.
    pub fn alpha(&self, m: usize) -> u64 {
        let mut send = vec![0u64; m + 1];
        let mut recv = vec![0u64; m + 1];
        for (&(s, r), tags) in &self.cells {
            send[s] += tags.len() as u64;
            recv[r] += tags.len() as u64;
        }
        send.into_iter().chain(recv).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedTimeline {
    pub m: usize,
    pub breakpoints: Vec<u64>,
    pub intervals: Vec<MergedInterval>,
}

impl MergedTimeline {
    /// End of the last busy interval, measured from slot 0.
    pub fn span(&self) -> u64 {
        self.intervals.iter().filter(|i| !i.cells.is_empty()).map(|i| i.start + i.len).max().unwrap_or(0)
    }
}

/// Overlays runs that may collide on ports. Run boundaries become breakpoints,
/// so every run is either fully active or inactive within each interval.
pub fn merge(m: usize, runs: &[TimedMatching]) -> MergedTimeline {
    let bp: BTreeSet<u64> = runs.iter().filter(|r| r.duration > 0).flat_map(|r| [r.start, r.end()]).collect();
    let breakpoints: Vec<u64> = bp.into_iter().collect();
    let mut starts: Vec<&TimedMatching> = runs.iter().filter(|r| r.duration > 0).collect();
    starts.sort_by_key(|r| r.start);
    let mut next = 0;
    let mut active: Vec<&TimedMatching> = Vec::new();
    let mut intervals = Vec::with_capacity(breakpoints.len().saturating_sub(1));
    for w in breakpoints.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        active.retain(|r| r.end() > lo);
        while next < starts.len() && starts[next].start <= lo {
            active.push(starts[next]);
            next += 1;
        }
        let mut cells: BTreeMap<(usize, usize), Vec<FlowTag>> = BTreeMap::new();
        for r in &active {
            for a in &r.assignments {
                cells.entry((a.src, a.dst)).or_default().push(FlowTag { job: a.job, coflow: a.coflow });
            }
        }
        intervals.push(MergedInterval { start: lo, len: hi - lo, cells });
    }
    MergedTimeline { m, breakpoints, intervals }
}

/// Turns the overlay into a feasible schedule starting at slot 0. Intervals are
/// handled in time order; each non-empty interval is scaled by its length and
/// decomposed, and empty intervals are dropped.
pub fn feasibilize(timeline: &MergedTimeline) -> Result<Schedule> {
    let m = timeline.m;
    let mut out = Schedule::new(m);
    let mut cursor = 0u64;
    for iv in timeline.intervals.iter().filter(|i| !i.cells.is_empty()) {
        let mut dense = vec![0u64; m * m];
        let mut queues: BTreeMap<(usize, usize), VecDeque<(FlowTag, u64)>> = BTreeMap::new();
        for (&(s, r), tags) in &iv.cells {
            dense[(s - 1) * m + (r - 1)] += iv.len * tags.len() as u64;
            queues.insert((s, r), tags.iter().map(|&t| (t, iv.len)).collect());
        }
        let res = decompose_dense(m, &mut dense)?;
        for (t0, dur, mt) in res.steps() {
            lay_out_step(&mut out, &mut queues, cursor + t0, dur, mt);
        }
        cursor += res.span();
    }
    Ok(out)
}

/// Emits one decomposition step, splitting it wherever a port pair moves on
/// to the next flow sharing that pair.
fn lay_out_step(
    out: &mut Schedule,
    queues: &mut BTreeMap<(usize, usize), VecDeque<(FlowTag, u64)>>,
    start: u64,
    dur: u64,
    mt: &[(usize, usize)],
) {
    let mut t = start;
    let end = start + dur;
    while t < end {
        let step = mt
            .iter()
            .map(|p| queues[p].front().expect("packets remain for a scheduled pair").1)
            .min()
            .unwrap_or(end - t)
            .min(end - t);
        let mut assignments = Vec::with_capacity(mt.len());
        for p in mt {
            let q = queues.get_mut(p).unwrap();
            let front = q.front_mut().unwrap();
            assignments.push(Assignment { src: p.0, dst: p.1, job: front.0.job, coflow: front.0.coflow });
            front.1 -= step;
            if front.1 == 0 {
                q.pop_front();
            }
        }
        out.push(TimedMatching { start: t, duration: step, assignments });
        t += step;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DmaConfig {
    pub beta: Beta,
    pub seed: u64,
    /// Shift the whole output so nothing starts before the latest release.
    pub gate_releases: bool,
}

impl DmaConfig {
    pub fn new(beta: Beta, seed: u64) -> Self {
        Self { beta, seed, gate_releases: false }
    }
}

/// Intermediate products of a run, kept for inspection and bound checks.
#[derive(Debug, Clone)]
pub struct DmaPlan {
    pub isolated: Vec<IsolatedSchedule>,
    /// Aggregate size over all jobs.
    pub delta: u64,
    pub timeline: MergedTimeline,
}

pub fn dma_plan(inst: &Instance, cfg: &DmaConfig) -> Result<DmaPlan> {
    let mut isolated = inst.jobs.iter().map(isolated_schedule).collect::<Result<Vec<_>>>()?;
    let delta = aggregate_size(inst.m, inst.jobs.iter().flat_map(|j| j.coflows.iter()));
    let delays = draw_delays(&inst.jobs, delta, cfg.beta, cfg.seed);
    let mut runs = Vec::new();
    for iso in &mut isolated {
        iso.delay = delays[&iso.job];
        runs.extend(iso.runs());
    }
    let timeline = merge(inst.m, &runs);
    Ok(DmaPlan { isolated, delta, timeline })
}

pub fn dma(inst: &Instance, cfg: &DmaConfig) -> Result<Schedule> {
    let plan = dma_plan(inst, cfg)?;
    let sched = feasibilize(&plan.timeline)?;
    Ok(gate(inst, sched, cfg.gate_releases))
}

pub(crate) fn gate(inst: &Instance, sched: Schedule, on: bool) -> Schedule {
    if on {
        let start = inst.jobs.iter().map(|j| j.release).max().unwrap_or(0);
        sched.shifted(start)
    } else {
        sched
    }
}

/// Sum of coflow effective sizes of a job (its isolated span).
pub fn isolated_span(job: &Job) -> u64 {
    job.coflows.iter().map(|c| effective_size(&c.demand)).sum()
}
