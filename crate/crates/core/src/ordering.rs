//! Primal-dual job ordering for total weighted completion time.
//!
//! Positions are filled from last to first. In each round the most loaded
//! server (senders are `0..m`, receivers `m..2m`) is compared with the largest
//! `T_j + rho_j`. Either that job's own dual `eta_j` absorbs its remaining
//! weight, or a set dual `lambda` is raised on the most loaded server until
//! some job's constraint becomes tight. The tight job takes the position.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::dagstats::critical_path_size;
use crate::error::Result;
use crate::model::{Instance, Job, JobId};
use crate::verify::weight_ratio;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaRecord {
    /// 1-based position filled in this round.
    pub k: usize,
    /// Server index: senders `0..m`, receivers `m..2m`.
    pub server: usize,
    /// Number of unscheduled jobs when the dual was raised (the set is `sigma[..k]`).
    pub active: usize,
    pub value: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingResult {
    /// `sigma[k - 1]` is the job in position `k`.
    pub sigma: Vec<JobId>,
    pub eta: BTreeMap<JobId, BigRational>,
    pub lambdas: Vec<LambdaRecord>,
    /// Most loaded server in each round, keyed by position.
    pub phi: BTreeMap<usize, usize>,
}

impl OrderingResult {
    pub fn position(&self, id: JobId) -> Option<usize> {
        self.sigma.iter().position(|&j| j == id).map(|p| p + 1)
    }
}

/// Per-server load of a job, length `2m`.
pub fn server_loads(job: &Job, m: usize) -> Vec<u64> {
    let mut d = vec![0u64; 2 * m];
    for c in &job.coflows {
        for (s, r, v) in c.demand.flows() {
            d[s - 1] += v;
            d[m + r - 1] += v;
        }
    }
    d
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn order_jobs(inst: &Instance) -> Result<OrderingResult> {
    let m = inst.m;
    let n = inst.jobs.len();
    let loads: Vec<Vec<u64>> = inst.jobs.iter().map(|j| server_loads(j, m)).collect();
    let horizon: Vec<u64> = inst
        .jobs
        .iter()
        .map(|j| Ok(critical_path_size(j)? + j.release))
        .collect::<Result<_>>()?;
    let mut residual: Vec<BigRational> = inst.jobs.iter().map(|j| weight_ratio(j.weight)).collect();
    let mut total = vec![0u64; 2 * m];
    for l in &loads {
        for (t, v) in total.iter_mut().zip(l) {
            *t += v;
        }
    }
    // unscheduled job indices, sorted by id for tie-breaking
    let mut active: Vec<usize> = (0..n).collect();
    active.sort_by_key(|&i| inst.jobs[i].id);

    let mut sigma = vec![JobId(0); n];
    let mut eta = BTreeMap::new();
    let mut lambdas = Vec::new();
    let mut phi = BTreeMap::new();
    for k in (1..=n).rev() {
        let srv = (0..2 * m).fold(0, |best, i| if total[i] > total[best] { i } else { best });
        let load = total.get(srv).copied().unwrap_or(0);
        phi.insert(k, srv);
        let far = active.iter().copied().fold(active[0], |b, i| if horizon[i] > horizon[b] { i } else { b });
        let tight = active
            .iter()
            .copied()
            .filter(|&i| loads[i].get(srv).copied().unwrap_or(0) > 0)
            .map(|i| (residual[i].clone() / int(loads[i][srv]), i))
            .fold(None::<(BigRational, usize)>, |b, (r, i)| match b {
                Some((br, bi)) if br <= r => Some((br, bi)),
                _ => Some((r, i)),
            });
        let chosen = match tight {
            Some((lambda, i)) if horizon[far] <= load => {
                for &l in &active {
                    let d = loads[l][srv];
                    if d > 0 {
                        residual[l] -= &lambda * int(d);
                    }
                }
                lambdas.push(LambdaRecord { k, server: srv, active: active.len(), value: lambda });
                i
            }
            _ => {
                eta.insert(inst.jobs[far].id, std::mem::replace(&mut residual[far], BigRational::zero()));
                far
            }
        };
        sigma[k - 1] = inst.jobs[chosen].id;
        active.retain(|&i| i != chosen);
        for (t, v) in total.iter_mut().zip(&loads[chosen]) {
            *t -= v;
        }
    }
    Ok(OrderingResult { sigma, eta, lambdas, phi })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualReport {
    /// Jobs whose weight is not exactly recovered by their duals, or that are
    /// missing from or repeated in the order.
    pub violations: Vec<JobId>,
    pub negative_duals: bool,
    pub objective: BigRational,
}

impl DualReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty() && !self.negative_duals
    }
}

impl fmt::Display for DualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_feasible() {
            write!(f, "dual feasible, objective {}", self.objective)
        } else {
            let ids: Vec<String> = self.violations.iter().map(|j| j.to_string()).collect();
            write!(f, "dual infeasible: jobs [{}], negative duals: {}", ids.join(", "), self.negative_duals)
        }
    }
}

/// `0.5 * (sum of squares + square of sum)` of the loads on one server.
fn f_server(loads: impl Iterator<Item = u64>) -> BigRational {
    let (mut sq, mut sum) = (BigInt::zero(), BigInt::zero());
    for v in loads {
        let v = BigInt::from(v);
        sq += &v * &v;
        sum += v;
    }
    BigRational::new(sq + &sum * &sum, BigInt::from(2))
}

/// Checks that every job's weight is exactly `eta_j + sum over k >= pos(j) of
/// d_{phi(k)}^j * lambda_k`, that all duals are nonnegative, and evaluates the
/// dual objective.
pub fn check_dual_feasibility(inst: &Instance, res: &OrderingResult) -> DualReport {
    let m = inst.m;
    let by_id: BTreeMap<JobId, &Job> = inst.jobs.iter().map(|j| (j.id, j)).collect();
    let loads: BTreeMap<JobId, Vec<u64>> = inst.jobs.iter().map(|j| (j.id, server_loads(j, m))).collect();
    let mut violations = Vec::new();
    let mut seen = BTreeMap::new();
    for &id in &res.sigma {
        *seen.entry(id).or_insert(0) += 1;
    }
    for j in &inst.jobs {
        if seen.get(&j.id) != Some(&1) {
            violations.push(j.id);
        }
    }
    violations.extend(seen.keys().filter(|id| !by_id.contains_key(id)));
    let negative_duals = res.eta.values().any(|v| v.is_negative()) || res.lambdas.iter().any(|l| l.value.is_negative());

    for (pos, &id) in res.sigma.iter().enumerate() {
        let Some(job) = by_id.get(&id) else { continue };
        let mut got = res.eta.get(&id).cloned().unwrap_or_else(BigRational::zero);
        for l in res.lambdas.iter().filter(|l| l.k > pos) {
            got += &l.value * int(loads[&id].get(l.server).copied().unwrap_or(0));
        }
        if got != weight_ratio(job.weight) && !violations.contains(&id) {
            violations.push(id);
        }
    }
    violations.sort();

    let mut objective = BigRational::zero();
    for l in &res.lambdas {
        let members = res.sigma.iter().take(l.k).filter_map(|id| loads.get(id));
        objective += &l.value * f_server(members.map(|d| d.get(l.server).copied().unwrap_or(0)));
    }
    for (id, v) in &res.eta {
        if let Some(job) = by_id.get(id) {
            let t = critical_path_size(job).unwrap_or(0) + job.release;
            objective += v * int(t);
        }
    }
    DualReport { violations, negative_duals, objective }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dagstats::tests::job_from;
    use proptest::prelude::*;

    fn job(id: u32, flows: &[(usize, usize, u64)], edges: &[(u32, u32)], w: f64, release: u64, m: usize) -> Job {
        let mut j = job_from(flows, edges, m);
        j.id = JobId(id);
        j.weight = w;
        j.release = release;
        j
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_job_is_tight() {
        let inst = Instance { m: 2, jobs: vec![job(4, &[(1, 2, 3)], &[], 2.5, 0, 2)] };
        let res = order_jobs(&inst).unwrap();
        assert_eq!(res.sigma, vec![JobId(4)]);
        let rep = check_dual_feasibility(&inst, &res);
        assert!(rep.is_feasible(), "{rep}");
    }

    #[test]
    fn identical_jobs_fill_last_position_with_lowest_id() {
        let inst = Instance { m: 1, jobs: vec![job(1, &[(1, 1, 2)], &[], 1.0, 0, 1), job(2, &[(1, 1, 2)], &[], 1.0, 0, 1)] };
        let res = order_jobs(&inst).unwrap();
        assert_eq!(res.sigma, vec![JobId(2), JobId(1)]);
        assert!(check_dual_feasibility(&inst, &res).is_feasible());
    }

    #[test]
    fn hand_traced_two_jobs() {
        // A: load 4 on sender 1 / receiver 1, T+rho = 4. B: load 1, T+rho = 1.
        // k=2: server load 5 >= 4, lambda = min(1/4, 1/1) = 1/4 -> A last; B keeps 3/4.
        // k=1: load 1 >= 1, lambda = 3/4 -> B.
        let inst = Instance { m: 1, jobs: vec![job(1, &[(1, 1, 4)], &[], 1.0, 0, 1), job(2, &[(1, 1, 1)], &[], 1.0, 0, 1)] };
        let res = order_jobs(&inst).unwrap();
        assert_eq!(res.sigma, vec![JobId(2), JobId(1)]);
        assert!(res.eta.is_empty());
        assert_eq!(res.lambdas.iter().map(|l| (l.k, l.server, l.value.clone())).collect::<Vec<_>>(), vec![(2, 0, q(1, 4)), (1, 0, q(3, 4))]);
        let rep = check_dual_feasibility(&inst, &res);
        assert!(rep.is_feasible());
        // 1/4 * 0.5*(16+1+25) + 3/4 * 0.5*(1+1)
        assert_eq!(rep.objective, q(21, 4) + q(3, 4));
    }

    #[test]
    fn long_critical_path_takes_eta_branch() {
        // A chain of two coflows on different ports: T = 4 > max server load 2.
        let inst = Instance { m: 2, jobs: vec![job(1, &[(1, 1, 2), (2, 2, 2)], &[(1, 2)], 3.0, 0, 2)] };
        let res = order_jobs(&inst).unwrap();
        assert_eq!(res.eta[&JobId(1)], q(3, 1));
        assert!(res.lambdas.is_empty());
        assert_eq!(check_dual_feasibility(&inst, &res).objective, q(12, 1));
    }

    #[test]
    fn release_counts_toward_horizon() {
        let inst = Instance { m: 1, jobs: vec![job(1, &[(1, 1, 1)], &[], 1.0, 10, 1), job(2, &[(1, 1, 3)], &[], 1.0, 0, 1)] };
        let res = order_jobs(&inst).unwrap();
        assert_eq!(res.sigma.last(), Some(&JobId(1)));
        assert!(res.eta.contains_key(&JobId(1)));
    }

    #[test]
    fn corrupted_duals_reported() {
        let inst = Instance { m: 1, jobs: vec![job(1, &[(1, 1, 2)], &[], 1.0, 0, 1)] };
        let mut res = order_jobs(&inst).unwrap();
        res.eta.insert(JobId(1), q(2, 1));
        let rep = check_dual_feasibility(&inst, &res);
        assert_eq!(rep.violations, vec![JobId(1)]);
        assert!(!rep.to_string().is_empty());
    }

    #[test]
    fn empty_instance() {
        let inst = Instance { m: 2, jobs: vec![] };
        let res = order_jobs(&inst).unwrap();
        assert!(res.sigma.is_empty());
        let rep = check_dual_feasibility(&inst, &res);
        assert!(rep.is_feasible());
        assert!(rep.objective.is_zero());
    }

    #[test]
    fn zero_demand_jobs_are_ordered() {
        let mut a = job(1, &[(1, 1, 1)], &[], 1.0, 0, 2);
        a.coflows[0].demand = crate::model::DemandMatrix::new(2);
        let b = job(2, &[(2, 1, 2)], &[], 0.5, 0, 2);
        let inst = Instance { m: 2, jobs: vec![a, b] };
        let res = order_jobs(&inst).unwrap();
        assert_eq!(res.sigma.len(), 2);
        assert!(check_dual_feasibility(&inst, &res).is_feasible());
    }

    #[test]
    fn scales_to_many_jobs() {
        let jobs: Vec<Job> = (1..=400)
            .map(|i| job(i, &[(1 + i as usize % 10, 1 + (i as usize * 7) % 10, 1 + i as u64 % 5)], &[], (i % 13) as f64 + 0.5, (i % 17) as u64, 10))
            .collect();
        let inst = Instance { m: 10, jobs };
        let res = order_jobs(&inst).unwrap();
        assert!(check_dual_feasibility(&inst, &res).is_feasible());
    }

    proptest! {
        #[test]
        fn duals_are_exactly_tight(
            params in proptest::collection::vec(
                (proptest::collection::vec((1usize..=3, 1usize..=3, 0u64..=5), 1..=3), 1u32..=1000, 0u64..=8, any::<bool>()),
                1..=8,
            )
        ) {
            let jobs: Vec<Job> = params
                .iter()
                .enumerate()
                .map(|(i, (flows, w, rel, chain))| {
                    let edges: Vec<(u32, u32)> = if *chain { (1..flows.len() as u32).map(|c| (c, c + 1)).collect() } else { vec![] };
                    job(i as u32 + 1, flows, &edges, *w as f64 / 7.0, *rel, 3)
                })
                .collect();
            let inst = Instance { m: 3, jobs };
            let res = order_jobs(&inst).unwrap();
            let rep = check_dual_feasibility(&inst, &res);
            prop_assert!(rep.is_feasible(), "{}", rep);
            prop_assert!(!rep.objective.is_negative());
        }
    }
}
