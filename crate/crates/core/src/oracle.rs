//! Exact optimum for tiny instances by exhaustive search, and the tightness
//! family of jobs on which delay-and-merge loses a factor of order `sqrt(mu)`.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::dagstats::JobGraph;
use crate::error::{Error, Result};
use crate::model::{Assignment, Coflow, CoflowId, DemandMatrix, Instance, Job, JobId, Schedule, TimedMatching};
use crate::verify::weight_ratio;

pub const MAX_SERVERS: usize = 3;
pub const MAX_PACKETS: u64 = 10;
pub const MAX_COFLOWS: usize = 5;

fn guard(inst: &Instance) -> Result<()> {
    let (m, p, c) = (inst.m, inst.total_packets(), inst.total_coflows());
    if m > MAX_SERVERS || p > MAX_PACKETS || c > MAX_COFLOWS {
        return Err(Error::OracleGuard(format!(
            "m={m}, packets={p}, coflows={c} exceeds m<={MAX_SERVERS}, packets<={MAX_PACKETS}, coflows<={MAX_COFLOWS}"
        )));
    }
    Ok(())
}

struct FlowRef {
    job: usize,
    coflow: usize,
    src: usize,
    dst: usize,
}

/// Flattened view of an instance for state-space search.
struct Search<'a> {
    inst: &'a Instance,
    flows: Vec<FlowRef>,
    graphs: Vec<JobGraph>,
    /// Flow indices of each (job, coflow).
    members: Vec<Vec<Vec<usize>>>,
    max_release: u64,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance) -> Result<(Self, Vec<u64>)> {
        let mut flows = Vec::new();
        let mut init = Vec::new();
        let mut members = Vec::new();
        let mut graphs = Vec::new();
        for (ji, job) in inst.jobs.iter().enumerate() {
            let g = JobGraph::new(job);
            g.topo_indices(job.id)?;
            graphs.push(g);
            let mut per = Vec::new();
            for (ci, c) in job.coflows.iter().enumerate() {
                let mut ids = Vec::new();
                for (src, dst, v) in c.demand.flows() {
                    ids.push(flows.len());
                    flows.push(FlowRef { job: ji, coflow: ci, src, dst });
                    init.push(v);
                }
                per.push(ids);
            }
            members.push(per);
        }
        let max_release = inst.jobs.iter().map(|j| j.release).max().unwrap_or(0);
        Ok((Self { inst, flows, graphs, members, max_release }, init))
    }

    fn coflow_done(&self, left: &[u64], j: usize, c: usize) -> bool {
        self.members[j][c].iter().all(|&f| left[f] == 0) && self.graphs[j].preds[c].iter().all(|&p| self.coflow_done(left, j, p))
    }

    fn job_done(&self, left: &[u64], j: usize) -> bool {
        self.members[j].iter().flatten().all(|&f| left[f] == 0)
    }

    fn ready(&self, left: &[u64], t: u64) -> Vec<usize> {
        (0..self.flows.len())
            .filter(|&f| {
                let fr = &self.flows[f];
                left[f] > 0
                    && t >= self.inst.jobs[fr.job].release
                    && self.graphs[fr.job].preds[fr.coflow].iter().all(|&p| self.coflow_done(left, fr.job, p))
            })
            .collect()
    }

    /// Every maximal matching over the ready flows (a multigraph on ports).
    fn maximal_matchings(&self, ready: &[usize]) -> Vec<Vec<usize>> {
        fn rec(s: &Search, ready: &[usize], i: usize, used_s: &mut [bool], used_r: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == ready.len() {
                let maximal = ready.iter().all(|&f| used_s[s.flows[f].src] || used_r[s.flows[f].dst]);
                if maximal {
                    out.push(cur.clone());
                }
                return;
            }
            let f = &s.flows[ready[i]];
            if !used_s[f.src] && !used_r[f.dst] {
                used_s[f.src] = true;
                used_r[f.dst] = true;
                cur.push(ready[i]);
                rec(s, ready, i + 1, used_s, used_r, cur, out);
                cur.pop();
                used_s[f.src] = false;
                used_r[f.dst] = false;
            }
            rec(s, ready, i + 1, used_s, used_r, cur, out);
        }
        let m = self.inst.m;
        let mut out = Vec::new();
        rec(self, ready, 0, &mut vec![false; m + 1], &mut vec![false; m + 1], &mut Vec::new(), &mut out);
        out
    }

    fn moves(&self, left: &[u64], t: u64) -> Vec<Vec<usize>> {
        let ready = self.ready(left, t);
        if ready.is_empty() {
            vec![Vec::new()]
        } else {
            self.maximal_matchings(&ready)
        }
    }

    fn apply(left: &[u64], mv: &[usize]) -> Vec<u64> {
        let mut n = left.to_vec();
        for &f in mv {
            n[f] -= 1;
        }
        n
    }

    fn witness(&self, slots: &[Vec<usize>]) -> Schedule {
        let mut s = Schedule::new(self.inst.m);
        for (t, mv) in slots.iter().enumerate() {
            let assignments = mv
                .iter()
                .map(|&f| {
                    let fr = &self.flows[f];
                    let job = &self.inst.jobs[fr.job];
                    Assignment { src: fr.src, dst: fr.dst, job: job.id, coflow: job.coflows[fr.coflow].id }
                })
                .collect();
            s.push(TimedMatching { start: t as u64, duration: 1, assignments });
        }
        s
    }
}

/// Minimum makespan and a schedule achieving it.
pub fn optimal_makespan(inst: &Instance) -> Result<(u64, Schedule)> {
    guard(inst)?;
    let (search, init) = Search::new(inst)?;
    // Reaching a residual earlier is never worse, so each (residual, time
    // clamped at the last release) is expanded once.
    type Key = (Vec<u64>, u64);
    let clamp = |t: u64| t.min(search.max_release);
    let start: Key = (init.clone(), 0);
    let mut parent: HashMap<Key, (Key, Vec<usize>)> = HashMap::new();
    let mut seen: HashSet<Key> = HashSet::from([start.clone()]);
    let mut frontier = vec![start];
    let mut t = 0u64;
    let goal = loop {
        if let Some(g) = frontier.iter().find(|k| k.0.iter().all(|&v| v == 0)) {
            break g.clone();
        }
        if frontier.is_empty() {
            return Err(Error::Internal("oracle search exhausted".into()));
        }
        let mut next = Vec::new();
        for key in &frontier {
            for mv in search.moves(&key.0, t) {
                let n = (Search::apply(&key.0, &mv), clamp(t + 1));
                if seen.insert(n.clone()) {
                    parent.insert(n.clone(), (key.clone(), mv));
                    next.push(n);
                }
            }
        }
        frontier = next;
        t += 1;
    };
    let mut slots = Vec::new();
    let mut cur = goal;
    while let Some((prev, mv)) = parent.get(&cur) {
        slots.push(mv.clone());
        cur = prev.clone();
    }
    slots.reverse();
    Ok((t.max(search.max_release), search.witness(&slots)))
}

/// Minimum total weighted completion time and a schedule achieving it.
pub fn optimal_weighted_completion(inst: &Instance) -> Result<(BigRational, Schedule)> {
    guard(inst)?;
    let (search, init) = Search::new(inst)?;
    let mut memo: HashMap<(u64, Vec<u64>), (BigRational, Vec<usize>)> = HashMap::new();
    let future = best_future(&search, &mut memo, 0, &init);
    // Jobs without packets complete at their release.
    let mut total = future;
    for (j, job) in inst.jobs.iter().enumerate() {
        if search.job_done(&init, j) {
            total += weight_ratio(job.weight) * BigRational::from_integer(BigInt::from(job.release));
        }
    }
    let mut slots = Vec::new();
    let (mut t, mut left) = (0u64, init);
    while !left.iter().all(|&v| v == 0) {
        let mv = memo[&(t.min(search.max_release), left.clone())].1.clone();
        left = Search::apply(&left, &mv);
        slots.push(mv);
        t += 1;
    }
    Ok((total, search.witness(&slots)))
}

type Memo = HashMap<(u64, Vec<u64>), (BigRational, Vec<usize>)>;

/// `sum over unfinished jobs of w_j * (C_j - t)`, minimized. Past the last
/// release the value no longer depends on `t`, hence the clamped key.
fn best_future(
    s: &Search,
    memo: &mut Memo,
    t: u64,
    left: &[u64],
) -> BigRational {
    if left.iter().all(|&v| v == 0) {
        return BigRational::zero();
    }
    let key = (t.min(s.max_release), left.to_vec());
    if let Some((v, _)) = memo.get(&key) {
        return v.clone();
    }
    let open: BigRational = (0..s.inst.jobs.len())
        .filter(|&j| !s.job_done(left, j))
        .map(|j| weight_ratio(s.inst.jobs[j].weight))
        .sum();
    let mut best: Option<(BigRational, Vec<usize>)> = None;
    for mv in s.moves(left, t) {
        let n = Search::apply(left, &mv);
        let v = best_future(s, memo, t + 1, &n);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, mv));
        }
    }
    let (v, mv) = best.expect("at least the idle move");
    let v = v + open;
    memo.insert(key, (v.clone(), mv));
    v
}

fn check_family(k: u64, d: u64) -> Result<()> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("tightness family needs K >= 1 and d >= 1, got K={k}, d={d}")));
    }
    Ok(())
}

/// Switch size used by the family: `2K + 1`.
pub fn tightness_servers(k: u64) -> usize {
    2 * k as usize + 1
}

/// `(2K)^2` unit-width coflows of size `d` in `2K` levels; level `i` sends
/// from server `i + 1` to `i + 2`.
pub fn tightness_instance(k: u64, d: u64) -> Result<Job> {
    check_family(k, d)?;
    let m = tightness_servers(k);
    let w = 2 * k;
    let mut coflows = Vec::new();
    let mut edges = Vec::new();
    for c in 1..=w * w {
        let level = (c - 1) / w;
        let src = level as usize + 1;
        coflows.push(Coflow { id: CoflowId(c as u32), demand: DemandMatrix::from_flows(m, [(src, src + 1, d)]) });
        if level == 0 {
            continue;
        }
        let parents = if c <= level * w + k { c - w..=c - k - 1 } else { c + 1 - 3 * k..=c - w };
        edges.extend(parents.map(|p| (CoflowId(p as u32), CoflowId(c as u32))));
    }
    Ok(Job { id: JobId(1), weight: 1.0, release: 0, coflows, edges })
}

pub fn tightness(k: u64, d: u64) -> Result<Instance> {
    Ok(Instance { m: tightness_servers(k), jobs: vec![tightness_instance(k, d)?] })
}

/// Hand-built optimal schedule of length `(2K + 1) K d`.
pub fn tightness_witness(k: u64, d: u64) -> Result<Schedule> {
    check_family(k, d)?;
    let job = tightness_instance(k, d)?;
    let m = tightness_servers(k);
    let run = |cs: &[u64], slot: u64| TimedMatching {
        start: slot * d,
        duration: d,
        assignments: cs
            .iter()
            .map(|&c| {
                let (src, dst, _) = job.coflows[c as usize - 1].demand.flows().next().expect("one flow");
                Assignment { src, dst, job: job.id, coflow: CoflowId(c as u32) }
            })
            .collect(),
    };
    let mut s = Schedule::new(m);
    let mut slot = 0;
    for c in 1..=k {
        s.push(run(&[c], slot));
        slot += 1;
    }
    for i in 1..2 * k {
        for c in 1..=k {
            s.push(run(&[(2 * i - 1) * k + c, 2 * i * k + c], slot));
            slot += 1;
        }
    }
    let total = 4 * k * k;
    for c in total - k + 1..=total {
        s.push(run(&[c], slot));
        slot += 1;
    }
    Ok(s)
}
