//! Structural quantities of a job's DAG.

use std::collections::{BTreeSet, HashMap};

use crate::bna::effective_size;
use crate::error::{Error, Result};
use crate::model::{Coflow, CoflowId, DemandMatrix, Job};

/// Index-based view of a job's precedence graph (positions into `job.coflows`).
#[derive(Debug, Clone)]
pub struct JobGraph {
    pub ids: Vec<CoflowId>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    index: HashMap<CoflowId, usize>,
}

impl JobGraph {
    pub fn new(job: &Job) -> Self {
        let ids: Vec<CoflowId> = job.coflows.iter().map(|c| c.id).collect();
        let index: HashMap<CoflowId, usize> = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let n = ids.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &job.edges {
            if let (Some(&a), Some(&b)) = (index.get(&a), index.get(&b)) {
                if !succs[a].contains(&b) {
                    succs[a].push(b);
                    preds[b].push(a);
                }
            }
        }
        Self { ids, preds, succs, index }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: CoflowId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Kahn's algorithm, always releasing the lowest coflow id first.
    pub fn topo_indices(&self, job_id: crate::model::JobId) -> Result<Vec<usize>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<(CoflowId, usize)> =
            (0..n).filter(|&i| indeg[i] == 0).map(|i| (self.ids[i], i)).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(first) = ready.iter().next().copied() {
            ready.remove(&first);
            let i = first.1;
            order.push(i);
            for &s in &self.succs[i] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert((self.ids[s], s));
                }
            }
        }
        if order.len() != n {
            return Err(Error::Cycle(job_id));
        }
        Ok(order)
    }
}

/// Summary statistics of one job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobStats {
    pub topo_order: Vec<CoflowId>,
    /// Critical path size: largest sum of effective sizes along a directed path.
    pub critical_path: u64,
    /// Effective size of the job's aggregate demand.
    pub aggregate: u64,
    pub height: usize,
    pub levels: Vec<Vec<CoflowId>>,
}

pub fn job_stats(job: &Job, m: usize) -> Result<JobStats> {
    let (height, levels) = levels(job)?;
    Ok(JobStats {
        topo_order: topological_order(job)?,
        critical_path: critical_path_size(job)?,
        aggregate: aggregate_size(m, &job.coflows),
        height,
        levels,
    })
}

pub fn topological_order(job: &Job) -> Result<Vec<CoflowId>> {
    let g = JobGraph::new(job);
    Ok(g.topo_indices(job.id)?.into_iter().map(|i| g.ids[i]).collect())
}

pub fn critical_path_size(job: &Job) -> Result<u64> {
    let g = JobGraph::new(job);
    let order = g.topo_indices(job.id)?;
    let sizes: Vec<u64> = job.coflows.iter().map(|c| effective_size(&c.demand)).collect();
    let mut best = vec![0u64; g.len()];
    for &i in &order {
        let before = g.preds[i].iter().map(|&p| best[p]).max().unwrap_or(0);
        best[i] = before + sizes[i];
    }
    Ok(best.into_iter().max().unwrap_or(0))
}

/// Effective size of the sum of the given coflows.
pub fn aggregate_size<'a>(m: usize, coflows: impl IntoIterator<Item = &'a Coflow>) -> u64 {
    effective_size(&DemandMatrix::sum(m, coflows.into_iter().map(|c| &c.demand)))
}

/// Height and coflow sets: level `i` holds coflows whose longest path from a
/// source has `i` edges.
pub fn levels(job: &Job) -> Result<(usize, Vec<Vec<CoflowId>>)> {
    let g = JobGraph::new(job);
    let order = g.topo_indices(job.id)?;
    let mut lvl = vec![0usize; g.len()];
    for &i in &order {
        lvl[i] = g.preds[i].iter().map(|&p| lvl[p] + 1).max().unwrap_or(0);
    }
    let height = lvl.iter().map(|&l| l + 1).max().unwrap_or(0);
    let mut sets = vec![Vec::new(); height];
    for &i in &order {
        sets[lvl[i]].push(g.ids[i]);
    }
    for s in &mut sets {
        s.sort();
    }
    Ok((height, sets))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// Every non-root coflow has exactly one successor; the root has none.
    FanIn,
    /// Every non-root coflow has exactly one predecessor; the root has none.
    FanOut,
}

/// Rooted-tree detection by degree counting. Single coflows and paths are
/// reported as fan-in.
pub fn rooted_tree_kind(job: &Job) -> Option<(TreeKind, CoflowId)> {
    let g = JobGraph::new(job);
    if g.is_empty() || g.topo_indices(job.id).is_err() {
        return None;
    }
    let check = |deg: &dyn Fn(usize) -> usize| -> Option<usize> {
        let roots: Vec<usize> = (0..g.len()).filter(|&i| deg(i) == 0).collect();
        let ok = roots.len() == 1 && (0..g.len()).all(|i| deg(i) <= 1);
        ok.then(|| roots[0])
    };
    if let Some(r) = check(&|i| g.succs[i].len()) {
        return Some((TreeKind::FanIn, g.ids[r]));
    }
    check(&|i| g.preds[i].len()).map(|r| (TreeKind::FanOut, g.ids[r]))
}

/// A directed path from a leaf to the root of a rooted tree (for fan-out trees,
/// from the root to a leaf, in edge direction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSubJob {
    pub coflows: Vec<CoflowId>,
}

pub fn path_sub_jobs(job: &Job) -> Result<Vec<PathSubJob>> {
    let (kind, _) = rooted_tree_kind(job).ok_or(Error::NotRootedTree(job.id))?;
    let g = JobGraph::new(job);
    // In fan-in orientation each coflow has one outgoing edge; mirror fan-out.
    let (starts_from, next): (&Vec<Vec<usize>>, &Vec<Vec<usize>>) = match kind {
        TreeKind::FanIn => (&g.preds, &g.succs),
        TreeKind::FanOut => (&g.succs, &g.preds),
    };
    let mut sources: Vec<usize> = (0..g.len()).filter(|&i| starts_from[i].is_empty()).collect();
    sources.sort_by_key(|&i| g.ids[i]);
    let paths = sources
        .into_iter()
        .map(|s| {
            let mut p = vec![g.ids[s]];
            let mut cur = s;
            while let Some(&n) = next[cur].first() {
                p.push(g.ids[n]);
                cur = n;
            }
            if kind == TreeKind::FanOut {
                p.reverse();
            }
            PathSubJob { coflows: p }
        })
        .collect();
    Ok(paths)
}
