//! Domain types: demand matrices, coflows, jobs, instances and schedules.
//!
//! Ports (senders and receivers) are 1-based throughout, matching the
//! instance file format. Time is measured in integer slots starting at 0.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Job identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

/// Coflow identifier, unique within its job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoflowId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{}", self.0)
    }
}

impl fmt::Display for CoflowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Sparse `m x m` matrix of flow sizes in packets. Absent entries are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandMatrix {
    m: usize,
    flows: BTreeMap<(usize, usize), u64>,
}

impl DemandMatrix {
    pub fn new(m: usize) -> Self {
        Self { m, flows: BTreeMap::new() }
    }

    /// Builds a matrix from `(src, dst, size)` triples. Repeated pairs are summed
    /// and zero sizes are dropped.
    pub fn from_flows(m: usize, flows: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        let mut d = Self::new(m);
        for (s, r, size) in flows {
            d.add(s, r, size);
        }
        d
    }

    /// Builds a matrix from dense rows (`rows[s-1][r-1]`).
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let m = rows.len();
        let mut d = Self::new(m);
        for (s, row) in rows.iter().enumerate() {
            for (r, &v) in row.iter().enumerate() {
                d.add(s + 1, r + 1, v);
            }
        }
        d
    }

    pub fn add(&mut self, src: usize, dst: usize, size: u64) {
        if size > 0 {
            *self.flows.entry((src, dst)).or_insert(0) += size;
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, src: usize, dst: usize) -> u64 {
        self.flows.get(&(src, dst)).copied().unwrap_or(0)
    }

    /// Positive entries in `(src, dst)` order.
    pub fn flows(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.flows.iter().map(|(&(s, r), &v)| (s, r, v))
    }

    pub fn num_flows(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.flows.values().sum()
    }

    pub fn min_flow(&self) -> Option<u64> {
        self.flows.values().copied().min()
    }

    /// Entry-wise sum. Dimensions are taken from `self`.
    pub fn accumulate(&mut self, other: &DemandMatrix) {
        for (s, r, v) in other.flows() {
            self.add(s, r, v);
        }
    }

    pub fn sum<'a>(m: usize, mats: impl IntoIterator<Item = &'a DemandMatrix>) -> Self {
        let mut acc = Self::new(m);
        for d in mats {
            acc.accumulate(d);
        }
        acc
    }

    /// Row-major dense copy, `out[(s-1)*m + (r-1)]`. Out-of-range entries are ignored.
    pub fn to_dense(&self) -> Vec<u64> {
        let m = self.m;
        let mut out = vec![0; m * m];
        for (s, r, v) in self.flows() {
            if (1..=m).contains(&s) && (1..=m).contains(&r) {
                out[(s - 1) * m + (r - 1)] = v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coflow {
    pub id: CoflowId,
    pub demand: DemandMatrix,
}

/// A multi-stage job: a DAG of coflows with a weight and a release slot.
///
/// An edge `(a, b)` means coflow `b` may start only after coflow `a` has completed.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: JobId,
    pub weight: f64,
    pub release: u64,
    pub coflows: Vec<Coflow>,
    pub edges: Vec<(CoflowId, CoflowId)>,
}

impl Job {
    pub fn coflow(&self, id: CoflowId) -> Option<&Coflow> {
        self.coflows.iter().find(|c| c.id == id)
    }

    /// Sum of all coflow matrices of the job.
    pub fn aggregate_demand(&self, m: usize) -> DemandMatrix {
        DemandMatrix::sum(m, self.coflows.iter().map(|c| &c.demand))
    }

    pub fn total_packets(&self) -> u64 {
        self.coflows.iter().map(|c| c.demand.total()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub m: usize,
    pub jobs: Vec<Job>,
}

/// A validation finding for an [`Instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroServers,
    DuplicateJob(JobId),
    NonPositiveWeight(JobId),
    DuplicateCoflow(JobId, CoflowId),
    DimensionMismatch { job: JobId, coflow: CoflowId, m: usize },
    PortOutOfRange { job: JobId, coflow: CoflowId, src: usize, dst: usize },
    UnknownEdgeEndpoint { job: JobId, from: CoflowId, to: CoflowId },
    SelfLoop { job: JobId, coflow: CoflowId },
    Cycle(JobId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroServers => write!(f, "instance has no servers"),
            Violation::DuplicateJob(j) => write!(f, "duplicate job id {j}"),
            Violation::NonPositiveWeight(j) => write!(f, "job {j} has a non-positive or non-finite weight"),
            Violation::DuplicateCoflow(j, c) => write!(f, "job {j} repeats coflow id {c}"),
            Violation::DimensionMismatch { job, coflow, m } => {
                write!(f, "{job}/{coflow}: demand matrix is {m}x{m}, not the instance dimension")
            }
            Violation::PortOutOfRange { job, coflow, src, dst } => {
                write!(f, "{job}/{coflow}: flow {src}->{dst} has a port outside 1..=m")
            }
            Violation::UnknownEdgeEndpoint { job, from, to } => {
                write!(f, "{job}: edge {from}->{to} references an unknown coflow")
            }
            Violation::SelfLoop { job, coflow } => write!(f, "{job}: self loop on {coflow}"),
            Violation::Cycle(j) => write!(f, "job {j} has a precedence cycle"),
        }
    }
}

/// Reports every structural problem of `inst`. An empty result means the instance is valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.m == 0 {
        out.push(Violation::ZeroServers);
    }
    let mut seen_jobs = HashSet::new();
    for job in &inst.jobs {
        if !seen_jobs.insert(job.id) {
            out.push(Violation::DuplicateJob(job.id));
        }
        if !(job.weight.is_finite() && job.weight > 0.0) {
            out.push(Violation::NonPositiveWeight(job.id));
        }
        let mut ids = HashSet::new();
        for c in &job.coflows {
            if !ids.insert(c.id) {
                out.push(Violation::DuplicateCoflow(job.id, c.id));
            }
            if c.demand.m() != inst.m {
                out.push(Violation::DimensionMismatch { job: job.id, coflow: c.id, m: c.demand.m() });
            }
            for (s, r, _) in c.demand.flows() {
                if !(1..=inst.m).contains(&s) || !(1..=inst.m).contains(&r) {
                    out.push(Violation::PortOutOfRange { job: job.id, coflow: c.id, src: s, dst: r });
                }
            }
        }
        let mut edges_ok = true;
        for &(a, b) in &job.edges {
            if !ids.contains(&a) || !ids.contains(&b) {
                out.push(Violation::UnknownEdgeEndpoint { job: job.id, from: a, to: b });
                edges_ok = false;
            } else if a == b {
                out.push(Violation::SelfLoop { job: job.id, coflow: a });
                edges_ok = false;
            }
        }
        if edges_ok && has_cycle(job) {
            out.push(Violation::Cycle(job.id));
        }
    }
    out
}

fn has_cycle(job: &Job) -> bool {
    let mut indeg: HashMap<CoflowId, usize> = job.coflows.iter().map(|c| (c.id, 0)).collect();
    let mut succ: HashMap<CoflowId, Vec<CoflowId>> = HashMap::new();
    for &(a, b) in &job.edges {
        *indeg.get_mut(&b).unwrap() += 1;
        succ.entry(a).or_default().push(b);
    }
    let mut stack: Vec<CoflowId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&c, _)| c).collect();
    let mut visited = 0;
    while let Some(c) = stack.pop() {
        visited += 1;
        for &n in succ.get(&c).into_iter().flatten() {
            let d = indeg.get_mut(&n).unwrap();
            *d -= 1;
            if *d == 0 {
                stack.push(n);
            }
        }
    }
    visited != indeg.len()
}

impl Instance {
    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    /// Returns an error listing every violation, or `Ok(())`.
    pub fn ensure_valid(&self) -> Result<(), Error> {
        let v = validate_instance(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v.iter().map(|x| x.to_string()).collect()))
        }
    }

    /// Sub-instance containing only the listed jobs, in the listed order.
    pub fn subset(&self, ids: &[JobId]) -> Instance {
        let by_id: HashMap<JobId, &Job> = self.jobs.iter().map(|j| (j.id, j)).collect();
        Instance { m: self.m, jobs: ids.iter().filter_map(|id| by_id.get(id).map(|j| (*j).clone())).collect() }
    }

    pub fn max_coflows_per_job(&self) -> usize {
        self.jobs.iter().map(|j| j.coflows.len()).max().unwrap_or(0)
    }

    pub fn total_packets(&self) -> u64 {
        self.jobs.iter().map(Job::total_packets).sum()
    }

    pub fn total_coflows(&self) -> usize {
        self.jobs.iter().map(|j| j.coflows.len()).sum()
    }

    pub fn from_json_str(s: &str) -> Result<Instance, Error> {
        let file: InstanceFile = serde_json::from_str(s)?;
        Ok(file.into())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }
}

// ---- instance file format ----

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    num_servers: usize,
    jobs: Vec<JobFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JobFile {
    id: JobId,
    weight: f64,
    #[serde(default)]
    release_time: u64,
    coflows: Vec<CoflowFile>,
    #[serde(default)]
    edges: Vec<(CoflowId, CoflowId)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CoflowFile {
    id: CoflowId,
    flows: Vec<FlowFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FlowFile {
    src: usize,
    dst: usize,
    size: u64,
}

impl From<InstanceFile> for Instance {
    fn from(f: InstanceFile) -> Self {
        let m = f.num_servers;
        Instance {
            m,
            jobs: f
                .jobs
                .into_iter()
                .map(|j| Job {
                    id: j.id,
                    weight: j.weight,
                    release: j.release_time,
                    coflows: j
                        .coflows
                        .into_iter()
                        .map(|c| Coflow {
                            id: c.id,
                            demand: DemandMatrix::from_flows(m, c.flows.into_iter().map(|x| (x.src, x.dst, x.size))),
                        })
                        .collect(),
                    edges: j.edges,
                })
                .collect(),
        }
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            num_servers: inst.m,
            jobs: inst
                .jobs
                .iter()
                .map(|j| JobFile {
                    id: j.id,
                    weight: j.weight,
                    release_time: j.release,
                    coflows: j
                        .coflows
                        .iter()
                        .map(|c| CoflowFile {
                            id: c.id,
                            flows: c.demand.flows().map(|(src, dst, size)| FlowFile { src, dst, size }).collect(),
                        })
                        .collect(),
                    edges: j.edges.clone(),
                })
                .collect(),
        }
    }
}

// ---- schedules ----

/// One packet stream on the switch: `src -> dst` carrying flow `(job, coflow)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub src: usize,
    pub dst: usize,
    pub job: JobId,
    pub coflow: CoflowId,
}

/// Key of a single flow of the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowKey {
    pub job: JobId,
    pub coflow: CoflowId,
    pub src: usize,
    pub dst: usize,
}

impl From<&Assignment> for FlowKey {
    fn from(a: &Assignment) -> Self {
        FlowKey { job: a.job, coflow: a.coflow, src: a.src, dst: a.dst }
    }
}

/// A set of assignments held for `duration` consecutive slots starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedMatching {
    pub start: u64,
    pub duration: u64,
    pub assignments: Vec<Assignment>,
}

impl TimedMatching {
    pub fn end(&self) -> u64 {
        self.start + self.duration
    }

    /// True when no sender and no receiver appears twice.
    pub fn is_matching(&self) -> bool {
        let mut srcs = HashSet::new();
        let mut dsts = HashSet::new();
        self.assignments.iter().all(|a| srcs.insert(a.src) && dsts.insert(a.dst))
    }
}

/// Run-length encoded schedule. Items may overlap in time; feasibility
/// means the union of assignments active at each slot is a matching.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(rename = "num_servers")]
    pub m: usize,
    #[serde(rename = "matchings")]
    pub items: Vec<TimedMatching>,
}

impl Schedule {
    pub fn new(m: usize) -> Self {
        Self { m, items: Vec::new() }
    }

    pub fn push(&mut self, item: TimedMatching) {
        if item.duration > 0 && !item.assignments.is_empty() {
            self.items.push(item);
        }
    }

    /// One past the last busy slot (0 for an empty schedule).
    pub fn span(&self) -> u64 {
        self.items.iter().map(TimedMatching::end).max().unwrap_or(0)
    }

    pub fn shift(&mut self, by: u64) {
        for it in &mut self.items {
            it.start += by;
        }
    }

    pub fn shifted(mut self, by: u64) -> Self {
        self.shift(by);
        self
    }

    pub fn extend(&mut self, other: Schedule) {
        self.items.extend(other.items);
    }

    pub fn sort(&mut self) {
        self.items.sort_by(|a, b| a.start.cmp(&b.start).then(a.duration.cmp(&b.duration)));
        for it in &mut self.items {
            it.assignments.sort();
        }
    }

    /// Packets transmitted per flow.
    pub fn flow_totals(&self) -> BTreeMap<FlowKey, u64> {
        let mut out = BTreeMap::new();
        for it in &self.items {
            for a in &it.assignments {
                *out.entry(FlowKey::from(a)).or_insert(0) += it.duration;
            }
        }
        out
    }

    /// Packets sent by each sender and received by each receiver in slot `t`
    /// (indexed `port - 1`).
    pub fn port_load_at(&self, t: u64) -> (Vec<u32>, Vec<u32>) {
        let mut send = vec![0; self.m];
        let mut recv = vec![0; self.m];
        for it in self.items.iter().filter(|it| it.start <= t && t < it.end()) {
            for a in &it.assignments {
                if (1..=self.m).contains(&a.src) {
                    send[a.src - 1] += 1;
                }
                if (1..=self.m).contains(&a.dst) {
                    recv[a.dst - 1] += 1;
                }
            }
        }
        (send, recv)
    }

    /// `(first slot, one past last slot)` of each coflow that sends at least one packet.
    pub fn coflow_spans(&self) -> BTreeMap<(JobId, CoflowId), (u64, u64)> {
        let mut out: BTreeMap<(JobId, CoflowId), (u64, u64)> = BTreeMap::new();
        for it in &self.items {
            for a in &it.assignments {
                let e = out.entry((a.job, a.coflow)).or_insert((it.start, it.end()));
                e.0 = e.0.min(it.start);
                e.1 = e.1.max(it.end());
            }
        }
        out
    }

    /// One past the last slot in which the job sends a packet.
    pub fn job_last_slots(&self) -> BTreeMap<JobId, u64> {
        let mut out = BTreeMap::new();
        for ((j, _), (_, end)) in self.coflow_spans() {
            let e = out.entry(j).or_insert(0);
            *e = (*e).max(end);
        }
        out
    }

    /// Sorted, deduplicated item boundaries.
    pub fn breakpoints(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.items.iter().flat_map(|it| [it.start, it.end()]).collect();
        set.into_iter().collect()
    }

    /// Cuts the schedule at slot `t`: everything before `t` is kept, the rest dropped.
    pub fn truncated(&self, t: u64) -> Schedule {
        let mut out = Schedule::new(self.m);
        for it in &self.items {
            if it.start >= t {
                continue;
            }
            let mut it = it.clone();
            it.duration = it.duration.min(t - it.start);
            out.push(it);
        }
        out
    }

    pub fn from_json_str(s: &str) -> Result<Schedule, Error> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}
