//! Geometric grouping of ordered jobs.
//!
//! Group `b` collects the jobs whose key `T_j + rho_j + D_j` lies in
//! `(gamma * 2^(b-1), gamma * 2^b]`, where `D_j` is the effective size of
//! everything up to and including `j` in the order.

use std::collections::BTreeMap;

use crate::bna::effective_size;
use crate::dagstats::critical_path_size;
use crate::error::{Error, Result};
use crate::model::{DemandMatrix, Instance, JobId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub gamma: u64,
    pub horizon: u64,
    pub b_max: usize,
    /// `groups[b]` holds the jobs of group `b`, in the order they were given.
    pub groups: Vec<Vec<JobId>>,
    pub keys: BTreeMap<JobId, u64>,
    /// Jobs with no demand and key 0; they complete at their release.
    pub trivial: Vec<JobId>,
}

/// `D_j` for each job: effective size of the summed demand of `sigma[..=pos(j)]`.
pub fn prefix_effective_sizes(inst: &Instance, sigma: &[JobId]) -> Result<BTreeMap<JobId, u64>> {
    let mut acc = DemandMatrix::new(inst.m);
    let mut out = BTreeMap::new();
    for &id in sigma {
        let job = inst.job(id).ok_or_else(|| Error::InvalidParameter(format!("{id} not in instance")))?;
        for c in &job.coflows {
            acc.accumulate(&c.demand);
        }
        out.insert(id, effective_size(&acc));
    }
    Ok(out)
}

/// Smallest `b >= 0` with `key <= gamma * 2^b`.
pub fn group_index(key: u64, gamma: u64) -> usize {
    let mut b = 0;
    let mut a = gamma.max(1) as u128;
    while (key as u128) > a {
        a *= 2;
        b += 1;
    }
    b
}

/// Smallest positive flow size in the instance, or 1 if there is none.
pub fn min_flow_size(inst: &Instance) -> u64 {
    inst.jobs.iter().flat_map(|j| j.coflows.iter()).filter_map(|c| c.demand.min_flow()).min().unwrap_or(1)
}

/// `max rho_j + total packets`.
pub fn horizon(inst: &Instance) -> u64 {
    inst.jobs.iter().map(|j| j.release).max().unwrap_or(0) + inst.total_packets()
}

/// Keys `T_j + rho_j + D_j` under the order `sigma`; jobs without demand use `T_j + rho_j`.
pub fn job_keys(inst: &Instance, sigma: &[JobId]) -> Result<BTreeMap<JobId, u64>> {
    let prefix = prefix_effective_sizes(inst, sigma)?;
    let mut keys = BTreeMap::new();
    for &id in sigma {
        let job = inst.job(id).expect("checked by prefix_effective_sizes");
        let base = critical_path_size(job)? + job.release;
        let key = if job.total_packets() == 0 { base } else { base + prefix[&id] };
        keys.insert(id, key);
    }
    Ok(keys)
}

/// Partitions `order` by key. The number of groups covers both the horizon
/// and the largest key, so every job lands in some group.
pub fn partition(gamma: u64, horizon: u64, order: &[JobId], keys: &BTreeMap<JobId, u64>) -> Grouping {
    let top = order.iter().map(|id| keys[id]).max().unwrap_or(0).max(horizon);
    let b_max = group_index(top, gamma);
    let mut groups = vec![Vec::new(); b_max + 1];
    let mut trivial = Vec::new();
    for &id in order {
        let k = keys[&id];
        if k == 0 {
            trivial.push(id);
        } else {
            groups[group_index(k, gamma)].push(id);
        }
    }
    Grouping { gamma, horizon, b_max, groups, keys: keys.clone(), trivial }
}

pub fn group_jobs(inst: &Instance, sigma: &[JobId]) -> Result<Grouping> {
    let keys = job_keys(inst, sigma)?;
    Ok(partition(min_flow_size(inst), horizon(inst), sigma, &keys))
}
