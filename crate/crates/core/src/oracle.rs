//! Exact maximum homogeneous sets.
//!
//! A homogeneous set of colour `b` is a clique in the graph whose edges are
//! the pairs coloured `b`. The search is a bitset branch-and-bound in the
//! style of BBMC: vertices are renumbered by a degeneracy ordering, candidate
//! sets are bit vectors, and greedy colour classes bound every branch.
//! An independent subset-enumeration oracle covers `m <= 20`.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colouring::{Colouring, IndexSet};
use crate::error::{Error, Result};

/// Largest `m` accepted by [`exhaustive_max_homogeneous`].
pub const EXHAUSTIVE_CAP: usize = 20;

#[derive(Clone, Copy, Debug, Default)]
pub struct CliqueSearchConfig {
    /// Stop as soon as a homogeneous set of this size is found.
    pub target: Option<usize>,
    /// Abort after this many search nodes.
    pub node_budget: Option<u64>,
    /// Explore root branches on the rayon pool. The size is unaffected; the
    /// witness may differ between runs.
    pub parallel: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// The largest colour-`colour` homogeneous set has exactly `size` elements.
    MaxSize { colour: u8, size: usize },
    /// No homogeneous set of size `ell` in either colour.
    NoHomogeneousOfSize { ell: usize },
    /// Largest homogeneous sizes per colour.
    MaxSizes { size0: usize, size1: usize },
    /// A search stopped early at its target: only a lower bound.
    AtLeast { colour: u8, size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCertificate {
    pub colouring_hash: String,
    pub m: usize,
    pub claim: Claim,
    pub nodes: u64,
    pub elapsed_ms: f64,
    /// False only for [`Claim::AtLeast`]; budget-limited searches yield errors, not certificates.
    pub exact: bool,
}

impl OracleCertificate {
    /// Re-runs the search and checks the claim against `f`.
    pub fn recheck(&self, f: &Colouring) -> Result<bool> {
        if f.fingerprint() != self.colouring_hash || f.m() != self.m {
            return Ok(false);
        }
        let cfg = CliqueSearchConfig::default();
        Ok(match self.claim {
            Claim::MaxSize { colour, size } => max_homogeneous(f, colour == 1, &cfg)?.size == size,
            Claim::NoHomogeneousOfSize { ell } => {
                matches!(has_homogeneous_of_size(f, ell, &cfg)?, Existence::Absent(_))
            }
            Claim::MaxSizes { size0, size1 } => {
                max_homogeneous(f, false, &cfg)?.size == size0 && max_homogeneous(f, true, &cfg)?.size == size1
            }
            Claim::AtLeast { colour, size } => max_homogeneous(f, colour == 1, &cfg)?.size >= size,
        })
    }
}

#[derive(Clone, Debug)]
pub struct MaxHomogeneous {
    pub colour: bool,
    pub size: usize,
    pub set: IndexSet,
    pub certificate: OracleCertificate,
}

#[derive(Clone, Debug)]
pub enum Existence {
    Found { colour: bool, witness: IndexSet },
    Absent(OracleCertificate),
}

#[inline]
fn bit_test(set: &[u64], v: usize) -> bool {
    (set[v / 64] >> (v % 64)) & 1 == 1
}

#[inline]
fn bit_clear(set: &mut [u64], v: usize) {
    set[v / 64] &= !(1u64 << (v % 64));
}

#[inline]
fn lowest(set: &[u64]) -> Option<usize> {
    set.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

#[inline]
fn is_empty(set: &[u64]) -> bool {
    set.iter().all(|w| *w == 0)
}

/// Vertices sorted so that repeatedly deleting a minimum-degree vertex gives
/// the reverse of the returned order.
fn degeneracy_order(adj: &[Vec<u64>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj
        .iter()
        .map(|row| row.iter().map(|w| w.count_ones() as usize).sum())
        .collect();
    let mut removed = vec![false; n];
    let mut peel = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("vertices remain");
        removed[v] = true;
        peel.push(v);
        for u in 0..n {
            if !removed[u] && bit_test(&adj[v], u) {
                degree[u] -= 1;
            }
        }
    }
    peel.reverse();
    peel
}

struct Search {
    adj: Vec<Vec<u64>>,
    /// new index -> original vertex
    relabel: Vec<usize>,
    words: usize,
    best: AtomicUsize,
    best_set: Mutex<Vec<usize>>,
    nodes: AtomicU64,
    stop: AtomicBool,
    budget_hit: AtomicBool,
    cfg: CliqueSearchConfig,
}

impl Search {
    fn new(f: &Colouring, colour: bool, floor: usize, cfg: CliqueSearchConfig) -> Self {
        let raw = f.adjacency(colour);
        let relabel = degeneracy_order(&raw);
        let n = f.m();
        let words = n.div_ceil(64);
        let mut position = vec![0usize; n];
        for (new, &old) in relabel.iter().enumerate() {
            position[old] = new;
        }
        let mut adj = vec![vec![0u64; words]; n];
        for (new, &old) in relabel.iter().enumerate() {
            for (u, &pu) in position.iter().enumerate() {
                if bit_test(&raw[old], u) {
                    adj[new][pu / 64] |= 1u64 << (pu % 64);
                }
            }
        }
        Search {
            adj,
            relabel,
            words,
            best: AtomicUsize::new(floor),
            best_set: Mutex::new(Vec::new()),
            nodes: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            budget_hit: AtomicBool::new(false),
            cfg,
        }
    }

    /// Greedy sequential colouring of `p`; returns vertices in non-decreasing
    /// colour order together with their colour numbers.
    fn colour_sort(&self, p: &[u64]) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = p.to_vec();
        let mut order = Vec::new();
        let mut bounds = Vec::new();
        let mut k = 0;
        let mut q = vec![0u64; self.words];
        while !is_empty(&uncoloured) {
            k += 1;
            q.copy_from_slice(&uncoloured);
            while let Some(v) = lowest(&q) {
                bit_clear(&mut uncoloured, v);
                bit_clear(&mut q, v);
                for (qw, aw) in q.iter_mut().zip(&self.adj[v]) {
                    *qw &= !aw;
                }
                order.push(v);
                bounds.push(k);
            }
        }
        (order, bounds)
    }

    fn offer(&self, clique: &[usize]) {
        let mut guard = self.best_set.lock().expect("best-set lock poisoned");
        if clique.len() > self.best.load(Ordering::SeqCst) {
            self.best.store(clique.len(), Ordering::SeqCst);
            *guard = clique.to_vec();
            if self.cfg.target.is_some_and(|t| clique.len() >= t) {
                self.stop.store(true, Ordering::SeqCst);
            }
        }
    }

    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.cfg.node_budget.is_some_and(|b| n > b) {
            self.budget_hit.store(true, Ordering::SeqCst);
            self.stop.store(true, Ordering::SeqCst);
        }
        !self.stop.load(Ordering::Relaxed)
    }

    fn branch(&self, clique: &mut Vec<usize>, v: usize, p: &[u64]) {
        clique.push(v);
        let newp: Vec<u64> = p.iter().zip(&self.adj[v]).map(|(a, b)| a & b).collect();
        if is_empty(&newp) {
            self.offer(clique);
        } else {
            self.expand(clique, newp);
        }
        clique.pop();
    }

    fn expand(&self, clique: &mut Vec<usize>, mut p: Vec<u64>) {
        if !self.tick() {
            return;
        }
        let (order, bounds) = self.colour_sort(&p);
        for idx in (0..order.len()).rev() {
            if clique.len() + bounds[idx] <= self.best.load(Ordering::Relaxed) {
                return;
            }
            let v = order[idx];
            self.branch(clique, v, &p);
            bit_clear(&mut p, v);
            if self.stop.load(Ordering::Relaxed) {
                return;
            }
        }
    }

    fn run(&self) {
        let n = self.adj.len();
        let mut all = vec![0u64; self.words];
        for v in 0..n {
            all[v / 64] |= 1u64 << (v % 64);
        }
        if !self.cfg.parallel {
            self.expand(&mut Vec::new(), all);
            return;
        }
        if !self.tick() {
            return;
        }
        let (order, bounds) = self.colour_sort(&all);
        // Branch `idx` sees only the vertices the sequential loop would still
        // hold when it reaches `idx`.
        (0..order.len()).into_par_iter().rev().for_each(|idx| {
            if self.stop.load(Ordering::Relaxed) || bounds[idx] < self.best.load(Ordering::Relaxed) {
                return;
            }
            let mut p = vec![0u64; self.words];
            for &u in &order[..idx] {
                p[u / 64] |= 1u64 << (u % 64);
            }
            self.branch(&mut Vec::new(), order[idx], &p);
        });
    }

    fn result(&self) -> Vec<usize> {
        let set = self.best_set.lock().expect("best-set lock poisoned");
        let mut out: Vec<usize> = set.iter().map(|&v| self.relabel[v]).collect();
        out.sort_unstable();
        out
    }
}

/// Largest set whose internal pairs all have colour `colour`.
pub fn max_homogeneous(f: &Colouring, colour: bool, cfg: &CliqueSearchConfig) -> Result<MaxHomogeneous> {
    let start = Instant::now();
    let search = Search::new(f, colour, 0, *cfg);
    search.run();
    let witness = search.result();
    let nodes = search.nodes.load(Ordering::SeqCst);
    if search.budget_hit.load(Ordering::SeqCst) {
        // any single vertex is homogeneous
        let witness = if witness.is_empty() { vec![0] } else { witness };
        return Err(Error::BudgetExceeded {
            nodes,
            lower_bound: witness.len(),
            witness,
        });
    }
    let size = witness.len();
    // An early exit at `target` only proves a lower bound.
    let exact = !cfg.target.is_some_and(|t| size >= t);
    let colour_bit = colour as u8;
    Ok(MaxHomogeneous {
        colour,
        size,
        set: IndexSet::from_unsorted(witness),
        certificate: OracleCertificate {
            colouring_hash: f.fingerprint(),
            m: f.m(),
            claim: if exact {
                Claim::MaxSize {
                    colour: colour_bit,
                    size,
                }
            } else {
                Claim::AtLeast {
                    colour: colour_bit,
                    size,
                }
            },
            nodes,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            exact,
        },
    })
}

/// Searches both colours for a homogeneous set of at least `ell` elements.
pub fn has_homogeneous_of_size(f: &Colouring, ell: usize, cfg: &CliqueSearchConfig) -> Result<Existence> {
    if ell == 0 || ell > f.m() {
        return Err(Error::domain(format!("ell = {ell} outside 1..={}", f.m())));
    }
    if ell == 1 {
        return Ok(Existence::Found {
            colour: false,
            witness: IndexSet::new(vec![0])?,
        });
    }
    let start = Instant::now();
    let mut nodes = 0u64;
    for colour in [false, true] {
        let cfg = CliqueSearchConfig {
            target: Some(ell),
            node_budget: cfg.node_budget.map(|b| b.saturating_sub(nodes)),
            parallel: cfg.parallel,
        };
        let search = Search::new(f, colour, ell - 1, cfg);
        search.run();
        nodes += search.nodes.load(Ordering::SeqCst);
        let witness = search.result();
        if witness.len() >= ell {
            return Ok(Existence::Found {
                colour,
                witness: IndexSet::from_unsorted(witness),
            });
        }
        if search.budget_hit.load(Ordering::SeqCst) {
            return Err(Error::BudgetExceeded {
                nodes,
                lower_bound: 1,
                witness: vec![0],
            });
        }
    }
    Ok(Existence::Absent(OracleCertificate {
        colouring_hash: f.fingerprint(),
        m: f.m(),
        claim: Claim::NoHomogeneousOfSize { ell },
        nodes,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        exact: true,
    }))
}

/// Exact maxima `(size0, size1)` by scanning every subset of `[m]`.
pub fn exhaustive_max_homogeneous(f: &Colouring) -> Result<(usize, usize)> {
    let m = f.m();
    if m > EXHAUSTIVE_CAP {
        return Err(Error::domain(format!(
            "exhaustive search capped at m = {EXHAUSTIVE_CAP}, got {m}"
        )));
    }
    let mut out = [1usize; 2];
    for (slot, colour) in [false, true].into_iter().enumerate() {
        let nbr: Vec<u32> = (0..m)
            .map(|x| {
                (0..m)
                    .filter(|&y| y != x && f.get(x, y) == colour)
                    .fold(0u32, |acc, y| acc | 1 << y)
            })
            .collect();
        let mut ok = vec![false; 1usize << m];
        ok[0] = true;
        for s in 1usize..(1 << m) {
            let v = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            ok[s] = ok[rest] && (rest as u32 & !nbr[v]) == 0;
            if ok[s] {
                out[slot] = out[slot].max(s.count_ones() as usize);
            }
        }
    }
    Ok((out[0], out[1]))
}
