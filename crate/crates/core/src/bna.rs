//! Optimal single-coflow scheduling by repeated tight-node-covering matchings.
//!
//! Every step picks a matching that touches all ports whose load equals the
//! current effective size, then holds it until a flow drains or another port
//! becomes tight. The total span equals the effective size of the coflow.

use crate::error::{Error, Result};
use crate::model::DemandMatrix;

/// Per-port loads: `(sender loads, receiver loads)`, indexed `port - 1`.
pub fn server_loads(d: &DemandMatrix) -> (Vec<u64>, Vec<u64>) {
    let m = d.m();
    let mut send = vec![0; m];
    let mut recv = vec![0; m];
    for (s, r, v) in d.flows() {
        if s >= 1 && s <= m {
            send[s - 1] += v;
        }
        if r >= 1 && r <= m {
            recv[r - 1] += v;
        }
    }
    (send, recv)
}

/// Largest load any single port must send or receive.
pub fn effective_size(d: &DemandMatrix) -> u64 {
    let (s, r) = server_loads(d);
    s.into_iter().chain(r).max().unwrap_or(0)
}

/// Decomposition result: matching `k` is used during `[times[k], times[k+1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnaResult {
    /// Each matching is a list of 1-based `(src, dst)` pairs.
    pub matchings: Vec<Vec<(usize, usize)>>,
    pub times: Vec<u64>,
}

impl BnaResult {
    pub fn span(&self) -> u64 {
        *self.times.last().unwrap_or(&0)
    }

    /// `(start, duration, matching)` triples.
    pub fn steps(&self) -> impl Iterator<Item = (u64, u64, &[(usize, usize)])> + '_ {
        self.matchings
            .iter()
            .enumerate()
            .map(|(k, mt)| (self.times[k], self.times[k + 1] - self.times[k], mt.as_slice()))
    }
}

pub fn bna_decompose(d: &DemandMatrix) -> Result<BnaResult> {
    let m = d.m();
    let mut dense = d.to_dense();
    decompose_dense(m, &mut dense)
}

/// Decomposes a dense row-major `m x m` matrix in place (it ends all zero).
pub fn decompose_dense(m: usize, d: &mut [u64]) -> Result<BnaResult> {
    debug_assert_eq!(d.len(), m * m);
    let mut matchings = Vec::new();
    let mut times = vec![0u64];
    let mut send = vec![0u64; m];
    let mut recv = vec![0u64; m];
    loop {
        send.iter_mut().for_each(|x| *x = 0);
        recv.iter_mut().for_each(|x| *x = 0);
        for s in 0..m {
            for r in 0..m {
                send[s] += d[s * m + r];
                recv[r] += d[s * m + r];
            }
        }
        let big_d = send.iter().chain(recv.iter()).copied().max().unwrap_or(0);
        if big_d == 0 {
            break;
        }
        let tight_s: Vec<bool> = send.iter().map(|&x| x == big_d).collect();
        let tight_r: Vec<bool> = recv.iter().map(|&x| x == big_d).collect();
        let (mate_s, mate_r) = tight_covering_matching(m, d, &tight_s, &tight_r)?;

        let mut t = u64::MAX;
        for s in 0..m {
            match mate_s[s] {
                Some(r) => t = t.min(d[s * m + r]),
                None => t = t.min(big_d - send[s]),
            }
        }
        for r in 0..m {
            if mate_r[r].is_none() {
                t = t.min(big_d - recv[r]);
            }
        }
        if t == 0 || t == u64::MAX {
            return Err(Error::Internal(format!("decomposition step length {t}")));
        }
        let mut mt = Vec::new();
        for s in 0..m {
            if let Some(r) = mate_s[s] {
                d[s * m + r] -= t;
                mt.push((s + 1, r + 1));
            }
        }
        matchings.push(mt);
        times.push(times.last().unwrap() + t);
    }
    Ok(BnaResult { matchings, times })
}

/// `(mate of each sender, mate of each receiver)`.
type Mates = (Vec<Option<usize>>, Vec<Option<usize>>);

/// Finds a matching over positive entries that covers every tight sender and
/// every tight receiver, then extends it greedily (lowest index first).
fn tight_covering_matching(
    m: usize,
    d: &[u64],
    tight_s: &[bool],
    tight_r: &[bool],
) -> Result<Mates> {
    let mut mate_s: Vec<Option<usize>> = vec![None; m];
    let mut mate_r: Vec<Option<usize>> = vec![None; m];

    // Tight senders: plain augmenting paths keep matched vertices matched.
    for s in (0..m).filter(|&s| tight_s[s]) {
        let mut seen = vec![false; m];
        if !augment_from_sender(s, m, d, &mut mate_s, &mut mate_r, &mut seen) {
            return Err(Error::Internal(format!("no matching covers tight sender {}", s + 1)));
        }
    }
    // Tight receivers: an alternating path may end at a free sender or may
    // release a non-tight receiver. Matched senders stay matched either way.
    for r in 0..m {
        if !tight_r[r] || mate_r[r].is_some() {
            continue;
        }
        let mut seen = vec![false; m];
        if !cover_receiver(r, m, d, tight_r, &mut mate_s, &mut mate_r, &mut seen) {
            return Err(Error::Internal(format!("no matching covers tight receiver {}", r + 1)));
        }
    }
    for s in 0..m {
        if mate_s[s].is_some() {
            continue;
        }
        if let Some(r) = (0..m).find(|&r| mate_r[r].is_none() && d[s * m + r] > 0) {
            mate_s[s] = Some(r);
            mate_r[r] = Some(s);
        }
    }
    Ok((mate_s, mate_r))
}

fn augment_from_sender(
    s: usize,
    m: usize,
    d: &[u64],
    mate_s: &mut [Option<usize>],
    mate_r: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for r in 0..m {
        if d[s * m + r] == 0 || seen[r] {
            continue;
        }
        seen[r] = true;
        let free = match mate_r[r] {
            None => true,
            Some(s2) => augment_from_sender(s2, m, d, mate_s, mate_r, seen),
        };
        if free {
            mate_s[s] = Some(r);
            mate_r[r] = Some(s);
            return true;
        }
    }
    false
}

/// Tries to match receiver `r`; `seen` marks visited senders.
fn cover_receiver(
    r: usize,
    m: usize,
    d: &[u64],
    tight_r: &[bool],
    mate_s: &mut [Option<usize>],
    mate_r: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for s in 0..m {
        if d[s * m + r] == 0 || seen[s] {
            continue;
        }
        seen[s] = true;
        let ok = match mate_s[s] {
            None => true,
            Some(r2) if !tight_r[r2] => {
                mate_r[r2] = None;
                true
            }
            Some(r2) => cover_receiver(r2, m, d, tight_r, mate_s, mate_r, seen),
        };
        if ok {
            mate_s[s] = Some(r);
            mate_r[r] = Some(s);
            return true;
        }
    }
    false
}
