//! Two-colourings of pairs, index sets and row-sequence measurements.
//!
//! A [`Colouring`] on `m` vertices stores one bit per unordered pair
//! `{i, j}` with `i < j`, packed row-major: row `i` holds the colours
//! `f(i, i+1), …, f(i, m-1)` in consecutive bits. Contiguous row segments
//! can therefore be scanned a word at a time.

use std::fmt;
use std::ops::Deref;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A 2-colouring of the pairs of `[m] = {0, …, m-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Colouring {
    m: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for Colouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Colouring {{ m: {}, ones: {} }}", self.m, self.edge_count(true))
    }
}

#[inline]
fn pair_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

impl Colouring {
    /// All pairs coloured `colour`.
    pub fn constant(m: usize, colour: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("a colouring needs at least one vertex"));
        }
        let n = pair_count(m);
        let words = n.div_ceil(64);
        let mut bits = vec![if colour { u64::MAX } else { 0 }; words];
        if colour && !n.is_multiple_of(64) {
            bits[words - 1] = (1u64 << (n % 64)) - 1;
        }
        Ok(Colouring { m, bits })
    }

    /// Builds a colouring from `colour(x, y)`, called once per pair with `x < y`.
    pub fn from_fn(m: usize, mut colour: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut f = Colouring::constant(m, false)?;
        let mut idx = 0usize;
        for x in 0..m {
            for y in x + 1..m {
                if colour(x, y) {
                    f.bits[idx / 64] |= 1u64 << (idx % 64);
                }
                idx += 1;
            }
        }
        Ok(f)
    }

    /// Uniformly random colouring: one fair coin per pair.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self> {
        let mut f = Colouring::constant(m, false)?;
        let n = pair_count(m);
        for w in f.bits.iter_mut() {
            *w = rng.random();
        }
        if !n.is_multiple_of(64) {
            let last = f.bits.len() - 1;
            f.bits[last] &= (1u64 << (n % 64)) - 1;
        }
        Ok(f)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    fn row_offset(&self, i: usize) -> usize {
        // number of pairs in rows 0..i
        i * (2 * self.m - i - 1) / 2
    }

    #[inline]
    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.m);
        self.row_offset(i) + (j - i - 1)
    }

    /// Colour of `{x, y}` without range checks beyond debug assertions.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        let (i, j) = if x < y { (x, y) } else { (y, x) };
        let idx = self.pair_index(i, j);
        (self.bits[idx / 64] >> (idx % 64)) & 1 == 1
    }

    /// Colour of the unordered pair `{x, y}`.
    pub fn colour(&self, x: usize, y: usize) -> Result<bool> {
        if x == y {
            return Err(Error::domain(format!(
                "pair ({x}, {y}) is not a pair of distinct vertices"
            )));
        }
        if x >= self.m || y >= self.m {
            return Err(Error::domain(format!(
                "pair ({x}, {y}) out of range for m = {}",
                self.m
            )));
        }
        Ok(self.get(x, y))
    }

    pub fn set(&mut self, x: usize, y: usize, colour: bool) {
        assert!(x != y && x < self.m && y < self.m, "invalid pair ({x}, {y})");
        let (i, j) = if x < y { (x, y) } else { (y, x) };
        let idx = self.pair_index(i, j);
        if colour {
            self.bits[idx / 64] |= 1u64 << (idx % 64);
        } else {
            self.bits[idx / 64] &= !(1u64 << (idx % 64));
        }
    }

    /// Every bit flipped.
    pub fn complement(&self) -> Colouring {
        let mut out = self.clone();
        for w in out.bits.iter_mut() {
            *w = !*w;
        }
        let n = pair_count(self.m);
        if !n.is_multiple_of(64) {
            let last = out.bits.len() - 1;
            out.bits[last] &= (1u64 << (n % 64)) - 1;
        }
        out
    }

    /// Number of pairs carrying `colour`.
    pub fn edge_count(&self, colour: bool) -> usize {
        let ones: usize = self.bits.iter().map(|w| w.count_ones() as usize).sum();
        if colour {
            ones
        } else {
            pair_count(self.m) - ones
        }
    }

    /// SHA-256 over the vertex count and the packed pair table.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.m as u64).to_le_bytes());
        for w in &self.bits {
            hasher.update(w.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Up to 64 raw table bits starting at bit `start`.
    #[inline]
    fn extract_bits(&self, start: usize, len: usize) -> u64 {
        debug_assert!(len <= 64);
        if len == 0 {
            return 0;
        }
        let w = start / 64;
        let sh = start % 64;
        let mut v = self.bits[w] >> sh;
        if sh != 0 && w + 1 < self.bits.len() {
            v |= self.bits[w + 1] << (64 - sh);
        }
        if len < 64 {
            v &= (1u64 << len) - 1;
        }
        v
    }

    /// Number of value changes along row `x` between columns `lo` and `hi`
    /// inclusive (`x < lo <= hi < m`), by word-level XOR of the row with
    /// itself shifted by one position.
    pub fn row_changes(&self, x: usize, lo: usize, hi: usize) -> usize {
        debug_assert!(x < lo && lo <= hi && hi < self.m);
        let mut start = self.pair_index(x, lo);
        let mut remaining = hi - lo;
        let mut changes = 0usize;
        while remaining > 0 {
            let n = remaining.min(64);
            let a = self.extract_bits(start, n);
            let b = self.extract_bits(start + 1, n);
            changes += (a ^ b).count_ones() as usize;
            start += n;
            remaining -= n;
        }
        changes
    }

    /// `f(a_i, -)`: the colours from `a_i` to every later element of `a`.
    pub fn row_sequence(&self, a: &IndexSet, i: usize) -> Result<RowSequence> {
        a.check_bound(self.m)?;
        if i + 1 >= a.len() {
            return Err(Error::domain(format!(
                "row position {i} out of range for a set of size {}",
                a.len()
            )));
        }
        let x = a[i];
        Ok(RowSequence(a[i + 1..].iter().map(|&y| self.get(x, y)).collect()))
    }

    /// Block counts of every row of `a` except the last.
    pub fn unstability(&self, a: &IndexSet) -> InstabilityProfile {
        let n = a.len();
        let per_row_blocks: Vec<usize> = if a.is_contiguous() && n >= 2 {
            let (first, last) = (a[0], a[n - 1]);
            (first..last)
                .map(|x| {
                    1 + if x + 1 < last {
                        self.row_changes(x, x + 1, last)
                    } else {
                        0
                    }
                })
                .collect()
        } else {
            (0..n.saturating_sub(1))
                .map(|i| {
                    let x = a[i];
                    let mut blocks = 1;
                    for w in a[i + 1..].windows(2) {
                        if self.get(x, w[0]) != self.get(x, w[1]) {
                            blocks += 1;
                        }
                    }
                    blocks
                })
                .collect()
        };
        InstabilityProfile::from_rows(per_row_blocks)
    }

    /// The colouring induced on `a`, renumbered `0..|a|`.
    pub fn restrict(&self, a: &IndexSet) -> Result<Restriction> {
        a.check_bound(self.m)?;
        if a.is_empty() {
            return Err(Error::domain("cannot restrict to the empty set"));
        }
        let colouring = Colouring::from_fn(a.len(), |i, j| self.get(a[i], a[j]))?;
        Ok(Restriction {
            colouring,
            index_map: a.clone(),
        })
    }

    /// Whether all pairs inside `h` share one colour.
    pub fn is_homogeneous(&self, h: &IndexSet) -> Result<Homogeneity> {
        h.check_bound(self.m)?;
        if h.len() <= 1 {
            return Ok(Homogeneity::Vacuous);
        }
        let reference = (h[0], h[1]);
        let colour = self.get(h[0], h[1]);
        for (p, &x) in h.iter().enumerate() {
            for &y in &h[p + 1..] {
                if self.get(x, y) != colour {
                    return Ok(Homogeneity::Violated {
                        first: reference,
                        second: (x, y),
                    });
                }
            }
        }
        Ok(Homogeneity::Homogeneous(colour))
    }

    /// Neighbourhoods of the colour-`colour` graph as bitsets of `ceil(m/64)` words.
    pub fn adjacency(&self, colour: bool) -> Vec<Vec<u64>> {
        let words = self.m.div_ceil(64);
        let mut adj = vec![vec![0u64; words]; self.m];
        for x in 0..self.m {
            for y in x + 1..self.m {
                if self.get(x, y) == colour {
                    adj[x][y / 64] |= 1u64 << (y % 64);
                    adj[y][x / 64] |= 1u64 << (x % 64);
                }
            }
        }
        adj
    }
}

/// A strictly increasing list of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "index set not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        Ok(IndexSet(indices))
    }

    /// Sorts and removes duplicates.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet(indices)
    }

    /// `{0, …, m-1}`.
    pub fn full(m: usize) -> Self {
        IndexSet((0..m).collect())
    }

    pub fn check_bound(&self, m: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= m => Err(Error::domain(format!("index {last} out of range for m = {m}"))),
            _ => Ok(()),
        }
    }

    pub fn is_contiguous(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&a), Some(&b)) => b - a + 1 == self.0.len(),
            _ => true,
        }
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for IndexSet {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// A finite binary sequence, typically a row `f(a_i, -)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSequence(pub Vec<bool>);

impl RowSequence {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn block_count(&self) -> usize {
        block_count(&self.0)
    }
}

/// Number of maximal constant blocks: 0 when empty, otherwise one more than
/// the number of adjacent unequal positions.
pub fn block_count(s: &[bool]) -> usize {
    if s.is_empty() {
        return 0;
    }
    1 + s.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstabilityProfile {
    pub per_row_blocks: Vec<usize>,
    pub max_blocks: usize,
}

impl InstabilityProfile {
    fn from_rows(per_row_blocks: Vec<usize>) -> Self {
        let max_blocks = per_row_blocks.iter().copied().max().unwrap_or(0);
        InstabilityProfile {
            per_row_blocks,
            max_blocks,
        }
    }

    /// At most `k`-unstable: every row has at most `k` blocks.
    pub fn is_at_most(&self, k: usize) -> bool {
        self.max_blocks <= k
    }
}

/// A restricted colouring and the map from its vertices back to the original ones.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub colouring: Colouring,
    pub index_map: IndexSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    /// Fewer than two elements; no pair to colour.
    Vacuous,
    Homogeneous(bool),
    /// Two pairs inside the set with different colours.
    Violated {
        first: (usize, usize),
        second: (usize, usize),
    },
}

impl Homogeneity {
    pub fn holds(&self) -> bool {
        !matches!(self, Homogeneity::Violated { .. })
    }

    /// True when homogeneous in `colour` (vacuous sets qualify for either colour).
    pub fn holds_for(&self, colour: bool) -> bool {
        match self {
            Homogeneity::Vacuous => true,
            Homogeneity::Homogeneous(c) => *c == colour,
            Homogeneity::Violated { .. } => false,
        }
    }
}
