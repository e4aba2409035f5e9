//! Naive comparison scheduler: one job at a time, never interleaving jobs.
//!
//! This is a simple sequential baseline. It is not the LP-based
//! O(m)-approximation from the literature.

use crate::dma::isolated_schedule;
use crate::error::Result;
use crate::model::{Instance, JobId, Schedule};
use crate::ordering::order_jobs;
use crate::verify::{metrics, Metrics};

pub const LABEL: &str = "sequential baseline (not the LP-based O(m) algorithm)";

/// Runs jobs serially in the primal-dual order (or by id), each as its
/// coflows back to back in topological order, starting no earlier than its release.
pub fn sequential_baseline(inst: &Instance, use_ordering: bool) -> Result<(Schedule, Metrics)> {
    let order: Vec<JobId> = if use_ordering {
        order_jobs(inst)?.sigma
    } else {
        let mut ids: Vec<JobId> = inst.jobs.iter().map(|j| j.id).collect();
        ids.sort();
        ids
    };
    let mut sched = Schedule::new(inst.m);
    let mut cursor = 0;
    for id in order {
        let job = inst.job(id).expect("order covers instance jobs");
        let iso = isolated_schedule(job)?;
        let start = cursor.max(job.release);
        for run in crate::dma::segment_runs(id, &iso.segments, start) {
            sched.push(run);
        }
        cursor = start + iso.span();
    }
    let m = metrics(inst, &sched)?;
    Ok((sched, m))
}
