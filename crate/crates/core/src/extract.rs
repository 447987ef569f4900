//! Homogeneous sets from colourings with few alternations per row.
//!
//! [`grouping`] finds two ordered blocks `A0 < A1` with constant cross
//! colour. Applied recursively by [`build_very_simple`], it yields `2^d`
//! vertices on which the colouring is very simple, witnessed by a
//! [`VsTree`]. [`eh_extract`] then reads a homogeneous set of size at least
//! `sqrt(2^d)` off the tree.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::colouring::{block_count, Colouring, Homogeneity, IndexSet};
use crate::construct::{floor_log2, DEFAULT_SIZE_CAP};
use crate::error::{Error, Result};

/// A rectangle `A0 x A1` of constant colour.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupingOutcome {
    pub a0: IndexSet,
    pub a1: IndexSet,
    pub colour: bool,
    /// Start of the chosen window, as a position within `A1'`.
    pub window_start: usize,
    /// Rows of `A0'` constant on the chosen window.
    pub stable_count: usize,
}

fn checked_pow(k: usize, e: usize) -> Option<usize> {
    k.checked_pow(u32::try_from(e).ok()?)
}

/// Row `x` restricted to `window`, if constant.
pub fn row_constant_on(f: &Colouring, x: usize, window: &[usize]) -> Option<bool> {
    let first = f.get(x, *window.first()?);
    window.iter().all(|&y| f.get(x, y) == first).then_some(first)
}

/// For each window of `len` consecutive elements of `tail`, the number of
/// rows `x` in `head` whose colours towards the window are constant.
///
/// Per row, the change points of `f(x, -)` along `tail` are found once; the
/// windows lying strictly between consecutive change points are credited
/// through a difference array.
pub fn window_stable_counts(f: &Colouring, head: &[usize], tail: &[usize], len: usize) -> Vec<usize> {
    assert!(len >= 1 && len <= tail.len());
    let windows = tail.len() - len + 1;
    let diff = head
        .par_iter()
        .fold(
            || vec![0i64; windows + 1],
            |mut diff, &x| {
                let mut credit = |lo: usize, hi: usize| {
                    // windows lo..=hi, clipped
                    let hi = hi.min(windows - 1);
                    if lo <= hi {
                        diff[lo] += 1;
                        diff[hi + 1] -= 1;
                    }
                };
                let mut lo = 0usize;
                let mut prev = f.get(x, tail[0]);
                for p in 0..tail.len() - 1 {
                    let next = f.get(x, tail[p + 1]);
                    if next != prev {
                        // window w contains the change at p iff w <= p <= w + len - 2
                        if p + 1 >= len {
                            credit(lo, p + 1 - len);
                        }
                        lo = p + 1;
                    }
                    prev = next;
                }
                credit(lo, windows - 1);
                diff
            },
        )
        .reduce(
            || vec![0i64; windows + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut acc = 0i64;
    diff[..windows]
        .iter()
        .map(|d| {
            acc += d;
            acc as usize
        })
        .collect()
}

/// Splits `a` (of size `k^c`) into `A0`, `A1` of size `k^(c-2)` each with
/// `max A0 < min A1` and constant colour on `A0 x A1`.
///
/// `A0'` is the first `4k^(c-2)` elements and `A1'` the rest. Among all
/// windows of `k^(c-2)` consecutive elements of `A1'` the one with the most
/// rows of `A0'` constant on it is taken (earliest on ties); `A0` is the
/// first `k^(c-2)` such rows of the majority colour (0 on ties).
pub fn grouping(f: &Colouring, a: &IndexSet, k: usize, c: usize) -> Result<GroupingOutcome> {
    if c < 2 || k < 1 {
        return Err(Error::domain(format!(
            "grouping needs c >= 2 and k >= 1, got c = {c}, k = {k}"
        )));
    }
    a.check_bound(f.m())?;
    let n = checked_pow(k, c).ok_or_else(|| Error::domain(format!("{k}^{c} overflows")))?;
    if a.len() != n {
        return Err(Error::domain(format!(
            "grouping needs |A| = {k}^{c} = {n}, got {}",
            a.len()
        )));
    }
    let unit = n / (k * k);
    if n <= 5 * unit {
        return Err(Error::domain(format!(
            "grouping needs k^c > 5 k^(c-2); k = {k} is too small"
        )));
    }
    let (head, tail) = a.split_at(4 * unit);
    let counts = window_stable_counts(f, head, tail, unit);
    let (window_start, _) =
        counts.iter().enumerate().fold(
            (0usize, 0usize),
            |best, (w, &cnt)| if cnt > best.1 { (w, cnt) } else { best },
        );
    let window = &tail[window_start..window_start + unit];
    let stable: Vec<(usize, bool)> = head
        .iter()
        .filter_map(|&x| row_constant_on(f, x, window).map(|col| (x, col)))
        .collect();
    let stable_count = stable.len();
    debug_assert_eq!(stable_count, counts[window_start]);
    if stable_count < 2 * unit {
        return Err(Error::InsufficientStability {
            sigma: String::new(),
            stable_count,
            required: 2 * unit,
        });
    }
    let ones = stable.iter().filter(|(_, col)| *col).count();
    let colour = ones > stable_count - ones;
    let a0: Vec<usize> = stable
        .iter()
        .filter(|(_, col)| *col == colour)
        .map(|(x, _)| *x)
        .take(unit)
        .collect();
    Ok(GroupingOutcome {
        a0: IndexSet::new(a0)?,
        a1: IndexSet::new(window.to_vec())?,
        colour,
        window_start,
        stable_count,
    })
}

/// Binary decomposition of a very simple colouring: leaves are vertices,
/// an internal node joins two subtrees with constant cross colour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VsTree {
    Leaf(usize),
    Node {
        colour: bool,
        left: Box<VsTree>,
        right: Box<VsTree>,
    },
}

impl VsTree {
    pub fn node(colour: bool, left: VsTree, right: VsTree) -> Self {
        VsTree::Node {
            colour,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            VsTree::Leaf(v) => out.push(*v),
            VsTree::Node { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            VsTree::Leaf(_) => 1,
            VsTree::Node { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    OutOfRange { vertex: usize },
    Overlap { vertex: usize },
    Order { left_max: usize, right_min: usize },
    CrossPair { x: usize, y: usize, expected: bool },
}

/// A failed tree check; `path` is the node address as `L`/`R` steps from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeViolation {
    pub path: String,
    pub kind: ViolationKind,
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.path.is_empty() { "root" } else { &self.path };
        match &self.kind {
            ViolationKind::OutOfRange { vertex } => write!(f, "leaf {vertex} out of range at {at}"),
            ViolationKind::Overlap { vertex } => write!(f, "vertex {vertex} appears twice (at {at})"),
            ViolationKind::Order { left_max, right_min } => {
                write!(f, "left leaf {left_max} not before right leaf {right_min} at {at}")
            }
            ViolationKind::CrossPair { x, y, expected } => {
                write!(f, "cross pair ({x}, {y}) not coloured {} at {at}", *expected as u8)
            }
        }
    }
}

fn check_node(f: &Colouring, tree: &VsTree, path: &mut String) -> std::result::Result<Vec<usize>, TreeViolation> {
    match tree {
        VsTree::Leaf(v) => Ok(vec![*v]),
        VsTree::Node { colour, left, right } => {
            path.push('L');
            let l = check_node(f, left, path)?;
            path.pop();
            path.push('R');
            let r = check_node(f, right, path)?;
            path.pop();
            let violation = |kind| TreeViolation {
                path: path.clone(),
                kind,
            };
            let (lmax, rmin) = (*l.iter().max().expect("nonempty"), *r.iter().min().expect("nonempty"));
            if lmax >= rmin {
                return Err(violation(ViolationKind::Order {
                    left_max: lmax,
                    right_min: rmin,
                }));
            }
            for &x in &l {
                for &y in &r {
                    if f.get(x, y) != *colour {
                        return Err(violation(ViolationKind::CrossPair {
                            x,
                            y,
                            expected: *colour,
                        }));
                    }
                }
            }
            let mut all = l;
            all.extend(r);
            Ok(all)
        }
    }
}

/// Checks that `tree` witnesses a very simple restriction of `f`.
pub fn verify_tree(f: &Colouring, tree: &VsTree) -> std::result::Result<(), TreeViolation> {
    let mut seen = HashSet::new();
    for v in tree.leaves() {
        if v >= f.m() {
            return Err(TreeViolation {
                path: String::new(),
                kind: ViolationKind::OutOfRange { vertex: v },
            });
        }
        if !seen.insert(v) {
            return Err(TreeViolation {
                path: String::new(),
                kind: ViolationKind::Overlap { vertex: v },
            });
        }
    }
    check_node(f, tree, &mut String::new()).map(|_| ())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EhResult {
    /// Largest colour-0 homogeneous set found by the tree DP.
    pub h0: usize,
    pub h1: usize,
    /// Colour of the witness (0 on ties).
    pub colour: bool,
    pub witness: IndexSet,
    pub leaves: usize,
}

/// Best homogeneous subsets of the leaves per colour, bottom-up: a node of
/// colour `b` unites its children's colour-`b` sets and keeps the larger
/// child set of the other colour.
pub fn eh_table(tree: &VsTree) -> [Vec<usize>; 2] {
    match tree {
        VsTree::Leaf(v) => [vec![*v], vec![*v]],
        VsTree::Node { colour, left, right } => {
            let [l0, l1] = eh_table(left);
            let [r0, r1] = eh_table(right);
            let pick = |l: Vec<usize>, r: Vec<usize>| if r.len() > l.len() { r } else { l };
            let join = |mut l: Vec<usize>, r: Vec<usize>| {
                l.extend(r);
                l
            };
            if *colour {
                [pick(l0, r0), join(l1, r1)]
            } else {
                [join(l0, r0), pick(l1, r1)]
            }
        }
    }
}

/// Homogeneous set from a very simple tree; `h0 * h1 >= leaves`.
pub fn eh_extract(tree: &VsTree, f: &Colouring) -> Result<EhResult> {
    verify_tree(f, tree).map_err(Error::InvalidTree)?;
    let [w0, w1] = eh_table(tree);
    let (h0, h1) = (w0.len(), w1.len());
    let colour = h1 > h0;
    let witness = IndexSet::from_unsorted(if colour { w1 } else { w0 });
    Ok(EhResult {
        h0,
        h1,
        colour,
        witness,
        leaves: tree.leaf_count(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub sigma: String,
    pub window_start: usize,
    pub stable_count: usize,
    pub colour: bool,
}

#[derive(Clone, Debug)]
pub struct VerySimple {
    /// The `2^d` leaves.
    pub set: IndexSet,
    pub tree: VsTree,
    /// Grouping outcome per address, in preorder.
    pub trace: Vec<TraceRow>,
}

fn split(f: &Colouring, a: IndexSet, k: usize, remaining: usize, sigma: String) -> Result<(VsTree, Vec<TraceRow>)> {
    if remaining == 0 {
        debug_assert_eq!(a.len(), 1);
        return Ok((VsTree::Leaf(a[0]), Vec::new()));
    }
    let outcome = grouping(f, &a, k, 2 * remaining).map_err(|e| match e {
        Error::InsufficientStability {
            stable_count, required, ..
        } => Error::InsufficientStability {
            sigma: sigma.clone(),
            stable_count,
            required,
        },
        other => other,
    })?;
    let row = TraceRow {
        sigma: sigma.clone(),
        window_start: outcome.window_start,
        stable_count: outcome.stable_count,
        colour: outcome.colour,
    };
    let (left, right) = rayon::join(
        || split(f, outcome.a0, k, remaining - 1, format!("{sigma}0")),
        || split(f, outcome.a1, k, remaining - 1, format!("{sigma}1")),
    );
    let (left, left_trace) = left?;
    let (right, right_trace) = right?;
    let mut trace = vec![row];
    trace.extend(left_trace);
    trace.extend(right_trace);
    Ok((VsTree::node(outcome.colour, left, right), trace))
}

/// `2^d` vertices among the first `k^(2d)` on which `f` is very simple.
///
/// The set at binary address `sigma` has `k^(2d - 2|sigma|)` elements and is
/// split by [`grouping`] with exponent `2(d - |sigma|)`.
pub fn build_very_simple(f: &Colouring, k: usize, d: usize) -> Result<VerySimple> {
    if d < 1 {
        return Err(Error::domain("depth d must be at least 1"));
    }
    let n = checked_pow(k, 2 * d).ok_or_else(|| Error::domain(format!("{k}^{} overflows", 2 * d)))?;
    if n > f.m() {
        return Err(Error::domain(format!(
            "need {k}^{} = {n} vertices, colouring has {}",
            2 * d,
            f.m()
        )));
    }
    let (tree, trace) = split(f, IndexSet::full(n), k, d, String::new())?;
    Ok(VerySimple {
        set: IndexSet::from_unsorted(tree.leaves()),
        tree,
        trace,
    })
}

/// Smallest `x` with `x^2 >= 2^d`: the size every very simple `2^d`-set guarantees.
pub fn guaranteed_size(d: usize) -> usize {
    let n = 1u128 << d;
    let mut x = (n as f64).sqrt() as u128;
    while x * x < n {
        x += 1;
    }
    while x > 0 && (x - 1) * (x - 1) >= n {
        x -= 1;
    }
    x as usize
}

fn random_shape<R: Rng + ?Sized>(leaves: &[usize], rng: &mut R) -> VsTree {
    if leaves.len() == 1 {
        return VsTree::Leaf(leaves[0]);
    }
    let cut = rng.random_range(1..leaves.len());
    let colour = rng.random_bool(0.5);
    let left = random_shape(&leaves[..cut], rng);
    let right = random_shape(&leaves[cut..], rng);
    VsTree::node(colour, left, right)
}

fn paint(f: &mut Colouring, tree: &VsTree) {
    if let VsTree::Node { colour, left, right } = tree {
        for x in left.leaves() {
            for y in right.leaves() {
                f.set(x, y, *colour);
            }
        }
        paint(f, left);
        paint(f, right);
    }
}

/// A random colouring of `[m]` together with a random valid tree whose
/// `n` leaves are a random subset of `[m]`; pairs outside the leaf set are
/// coloured uniformly.
pub fn random_very_simple<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<(Colouring, VsTree)> {
    if n < 1 || n > m {
        return Err(Error::domain(format!("need 1 <= n <= m, got n = {n}, m = {m}")));
    }
    let mut f = Colouring::random(m, rng)?;
    let mut leaves = rand::seq::index::sample(rng, m, n).into_vec();
    leaves.sort_unstable();
    let tree = random_shape(&leaves, rng);
    paint(&mut f, &tree);
    Ok((f, tree))
}

#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions {
    /// Overrides the default depth `2 floor(log2 k)`.
    pub depth: Option<usize>,
    pub size_cap: u64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            depth: None,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub k: usize,
    /// Stability parameter handed to the grouping step, `max(k, 3)`.
    pub stability: usize,
    pub d: usize,
    pub very_simple: VerySimple,
    pub eh: EhResult,
}

impl Extraction {
    pub fn set(&self) -> &IndexSet {
        &self.eh.witness
    }

    pub fn reaches_k(&self) -> bool {
        self.eh.witness.len() >= self.k
    }
}

/// Vertices needed by [`extract_homogeneous`]: `max(k,3)^(2d)`, `None` on overflow.
pub fn required_vertices(k: usize, d: usize) -> Option<u64> {
    (k.max(3) as u64).checked_pow(u32::try_from(2 * d).ok()?)
}

pub fn default_depth(k: usize) -> usize {
    (2 * floor_log2(k.max(1) as u64) as usize).max(1)
}

/// Very simple set of depth `d = 2 floor(log2 k)` followed by extraction.
///
/// A colouring that is at most `k`-unstable is also at most 3-unstable when
/// `k < 3`, and grouping needs `k^2 > 5`; the stability parameter is
/// therefore `max(k, 3)`.
pub fn extract_homogeneous(f: &Colouring, k: usize, opts: &ExtractOptions) -> Result<Extraction> {
    if k < 1 {
        return Err(Error::domain("k must be at least 1"));
    }
    let d = opts.depth.unwrap_or_else(|| default_depth(k));
    let required = required_vertices(k, d);
    match required {
        Some(r) if r <= opts.size_cap => {
            if (f.m() as u64) < r {
                return Err(Error::domain(format!("need {r} vertices, colouring has {}", f.m())));
            }
        }
        _ => {
            return Err(Error::SizeBudget {
                required,
                cap: opts.size_cap,
            })
        }
    }
    let stability = k.max(3);
    let very_simple = build_very_simple(f, stability, d)?;
    let eh = eh_extract(&very_simple.tree, f)?;
    if !matches!(
        f.is_homogeneous(&eh.witness)?,
        Homogeneity::Homogeneous(_) | Homogeneity::Vacuous
    ) || eh.witness.len() < guaranteed_size(d)
    {
        return Err(Error::domain(format!(
            "extracted set {} fails its own check; this is a bug",
            eh.witness
        )));
    }
    Ok(Extraction {
        k,
        stability,
        d,
        very_simple,
        eh,
    })
}

/// Stability of `x` on `window` via the block count of the row segment.
pub fn stable_by_blocks(f: &Colouring, x: usize, window: &[usize]) -> bool {
    let seq: Vec<bool> = window.iter().map(|&y| f.get(x, y)).collect();
    block_count(&seq) <= 1
}
