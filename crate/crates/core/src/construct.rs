//! Adversarial colourings with few alternations per row and no large
//! homogeneous set.
//!
//! A base colouring `g` of `[s]` with no homogeneous `h`-set is blown up to
//! `[s^t]`: the vertex range is cut into `s` equal intervals, pairs from
//! intervals `a < b` get colour `g(a, b)`, and every interval is cut again,
//! down to singletons. Each row then changes colour at most `s - 1` times
//! per level, and a homogeneous set meets fewer than `h` subintervals of any
//! interval, so it has fewer than `h^t` elements.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::colouring::{block_count, Colouring};
use crate::error::{Error, Result};
use crate::oracle::{self, CliqueSearchConfig, Existence, OracleCertificate};

/// Largest base size handled by the local search (one machine word per row).
pub const MAX_BASE: usize = 64;

/// Default cap on the number of vertices of any colouring built here.
pub const DEFAULT_SIZE_CAP: u64 = 4096;

/// `floor(log2 x)` for `x >= 1`.
pub fn floor_log2(x: u64) -> u32 {
    assert!(x >= 1, "log of zero");
    63 - x.leading_zeros()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseCertificate {
    /// Seed of the search that produced the colouring, if any.
    pub seed: Option<u64>,
    /// Restarts used, including the successful one.
    pub tries: usize,
    /// Pair flips performed in the successful restart.
    pub flips: u64,
    pub oracle: OracleCertificate,
    /// `(size0, size1)` from subset enumeration when `s` is small enough.
    pub exhaustive: Option<(usize, usize)>,
}

/// A colouring of `[s]` certified to have no homogeneous set of size `h`.
#[derive(Clone, Debug)]
pub struct BaseColouring {
    g: Colouring,
    h: usize,
    certificate: BaseCertificate,
}

impl BaseColouring {
    /// Runs the oracle on `g` and refuses if a homogeneous `h`-set exists.
    pub fn certify(g: Colouring, h: usize) -> Result<Self> {
        Self::certify_with(g, h, None, 0, 0)
    }

    fn certify_with(g: Colouring, h: usize, seed: Option<u64>, tries: usize, flips: u64) -> Result<Self> {
        if h < 2 || h > g.m() {
            return Err(Error::domain(format!("bound h = {h} must lie in 2..={}", g.m())));
        }
        let oracle = match oracle::has_homogeneous_of_size(&g, h, &CliqueSearchConfig::default())? {
            Existence::Found { colour, witness } => {
                return Err(Error::CertificationRefused(format!(
                    "{witness} is homogeneous of colour {} and size {}",
                    colour as u8,
                    witness.len()
                )))
            }
            Existence::Absent(cert) => cert,
        };
        let exhaustive = if g.m() <= oracle::EXHAUSTIVE_CAP {
            let sizes = oracle::exhaustive_max_homogeneous(&g)?;
            if sizes.0 >= h || sizes.1 >= h {
                return Err(Error::CertificationRefused(format!(
                    "branch-and-bound and enumeration disagree: enumeration found sizes {sizes:?}"
                )));
            }
            Some(sizes)
        } else {
            None
        };
        Ok(BaseColouring {
            g,
            h,
            certificate: BaseCertificate {
                seed,
                tries,
                flips,
                oracle,
                exhaustive,
            },
        })
    }

    pub fn s(&self) -> usize {
        self.g.m()
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn colouring(&self) -> &Colouring {
        &self.g
    }

    pub fn certificate(&self) -> &BaseCertificate {
        &self.certificate
    }
}

/// Cliques of `size` vertices inside `cand`, in the graph given by `adj`.
fn count_cliques(adj: &[u64], cand: u64, size: usize) -> u64 {
    if size == 0 {
        return 1;
    }
    if (cand.count_ones() as usize) < size {
        return 0;
    }
    let mut total = 0;
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        total += count_cliques(adj, rest & adj[v], size - 1);
    }
    total
}

fn collect_cliques(
    adj: &[u64],
    cand: u64,
    size: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    if size == 0 {
        out.push(prefix.clone());
        return;
    }
    let mut rest = cand;
    while rest != 0 && out.len() < cap {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        prefix.push(v);
        collect_cliques(adj, rest & adj[v], size - 1, prefix, out, cap);
        prefix.pop();
    }
}

/// Pair colouring as two adjacency masks, kept in sync under flips.
struct LocalSearch {
    s: usize,
    h: usize,
    adj: [Vec<u64>; 2],
}

impl LocalSearch {
    fn random<R: Rng>(s: usize, h: usize, rng: &mut R) -> Self {
        let mut adj = [vec![0u64; s], vec![0u64; s]];
        for x in 0..s {
            for y in x + 1..s {
                let c = rng.random::<bool>() as usize;
                adj[c][x] |= 1 << y;
                adj[c][y] |= 1 << x;
            }
        }
        LocalSearch { s, h, adj }
    }

    fn all(&self) -> u64 {
        if self.s == 64 {
            u64::MAX
        } else {
            (1u64 << self.s) - 1
        }
    }

    fn colour(&self, x: usize, y: usize) -> usize {
        ((self.adj[1][x] >> y) & 1) as usize
    }

    fn score(&self) -> u64 {
        count_cliques(&self.adj[0], self.all(), self.h) + count_cliques(&self.adj[1], self.all(), self.h)
    }

    /// Change in the number of monochromatic h-sets if `{x, y}` is flipped.
    fn flip_delta(&self, x: usize, y: usize) -> i64 {
        let c = self.colour(x, y);
        let mask = !((1u64 << x) | (1u64 << y));
        let before = count_cliques(&self.adj[c], self.adj[c][x] & self.adj[c][y] & mask, self.h - 2);
        let after = count_cliques(
            &self.adj[1 - c],
            self.adj[1 - c][x] & self.adj[1 - c][y] & mask,
            self.h - 2,
        );
        after as i64 - before as i64
    }

    fn flip(&mut self, x: usize, y: usize) {
        for c in 0..2 {
            self.adj[c][x] ^= 1 << y;
            self.adj[c][y] ^= 1 << x;
        }
    }

    fn to_colouring(&self) -> Colouring {
        Colouring::from_fn(self.s, |x, y| self.colour(x, y) == 1).expect("s >= 1")
    }
}

/// Seeded search for a colouring of `[s]` with no homogeneous `h`-set,
/// verified by the oracle before it is returned.
///
/// Each try starts from a uniformly random colouring and performs a tabu
/// local search that flips pairs inside monochromatic `h`-sets.
pub fn find_base_colouring(s: usize, h: usize, max_tries: usize, seed: u64) -> Result<BaseColouring> {
    if s < 4 || h < 3 {
        return Err(Error::domain(format!("need s >= 4 and h >= 3, got s = {s}, h = {h}")));
    }
    if s > MAX_BASE || h > s {
        return Err(Error::domain(format!(
            "need h <= s <= {MAX_BASE}, got s = {s}, h = {h}"
        )));
    }
    let flip_limit = 200 * (s * s) as u64;
    let tenure = (s / 2).max(2) as u64;
    for attempt in 0..max_tries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut state = LocalSearch::random(s, h, &mut rng);
        let mut score = state.score();
        let mut tabu = vec![0u64; s * s];
        let mut flips = 0u64;
        let mut bad = Vec::new();
        while score > 0 && flips < flip_limit {
            bad.clear();
            let c = rng.random_range(0..2usize);
            for colour in [c, 1 - c] {
                collect_cliques(&state.adj[colour], state.all(), h, &mut Vec::new(), &mut bad, 256);
                if !bad.is_empty() {
                    break;
                }
            }
            let set = &bad[rng.random_range(0..bad.len())];
            let pairs: Vec<(usize, usize)> = set
                .iter()
                .enumerate()
                .flat_map(|(i, &x)| set[i + 1..].iter().map(move |&y| (x, y)))
                .collect();
            let (x, y, delta) = if rng.random_bool(0.1) {
                let (x, y) = pairs[rng.random_range(0..pairs.len())];
                (x, y, state.flip_delta(x, y))
            } else {
                let mut best: Option<(usize, usize, i64)> = None;
                let mut ties = 0u32;
                for &(x, y) in &pairs {
                    let d = state.flip_delta(x, y);
                    let allowed = tabu[x * s + y] <= flips || score as i64 + d == 0;
                    if !allowed {
                        continue;
                    }
                    match best {
                        Some((_, _, bd)) if d > bd => {}
                        Some((_, _, bd)) if d == bd => {
                            ties += 1;
                            if rng.random_range(0..=ties) == 0 {
                                best = Some((x, y, d));
                            }
                        }
                        _ => {
                            best = Some((x, y, d));
                            ties = 0;
                        }
                    }
                }
                match best {
                    Some(b) => b,
                    None => {
                        let (x, y) = pairs[rng.random_range(0..pairs.len())];
                        (x, y, state.flip_delta(x, y))
                    }
                }
            };
            state.flip(x, y);
            score = (score as i64 + delta) as u64;
            flips += 1;
            tabu[x * s + y] = flips + tenure;
        }
        if score == 0 {
            return BaseColouring::certify_with(state.to_colouring(), h, Some(seed), attempt + 1, flips);
        }
    }
    Err(Error::NotFound { s, h, tries: max_tries })
}

/// Parameters of the product construction: `k = s t`, `ell = (2 floor(log2 s))^t`, `m = s^t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductParams {
    pub s: u64,
    pub t: u32,
    pub k: u128,
    #[serde(serialize_with = "ser_big")]
    pub ell: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub m: BigUint,
}

fn ser_big<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl ProductParams {
    pub fn new(s: u64, t: u32) -> Result<Self> {
        if s < 4 || t < 1 {
            return Err(Error::domain(format!("need s >= 4 and t >= 1, got s = {s}, t = {t}")));
        }
        Ok(ProductParams {
            s,
            t,
            k: s as u128 * t as u128,
            ell: BigUint::from(2 * floor_log2(s)).pow(t),
            m: BigUint::from(s).pow(t),
        })
    }
}

/// The interval `I_sigma` of `[s^t]` named by an `s`-ary string of length at most `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalAddress {
    s: usize,
    t: usize,
    sigma: Vec<usize>,
}

impl IntervalAddress {
    pub fn root(s: usize, t: usize) -> Self {
        IntervalAddress {
            s,
            t,
            sigma: Vec::new(),
        }
    }

    /// Address of the level-`level` interval containing vertex `x`.
    pub fn of_vertex(s: usize, t: usize, x: usize, level: usize) -> Self {
        assert!(level <= t);
        let sigma = (0..level).map(|i| (x / s.pow((t - 1 - i) as u32)) % s).collect();
        IntervalAddress { s, t, sigma }
    }

    pub fn child(&self, digit: usize) -> Self {
        assert!(digit < self.s && self.sigma.len() < self.t);
        let mut sigma = self.sigma.clone();
        sigma.push(digit);
        IntervalAddress { sigma, ..*self }
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn level(&self) -> usize {
        self.sigma.len()
    }

    pub fn len(&self) -> usize {
        self.s.pow((self.t - self.sigma.len()) as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn offset(&self) -> usize {
        self.sigma.iter().fold(0, |acc, &d| acc * self.s + d) * self.len()
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        let o = self.offset();
        o..o + self.len()
    }
}

fn checked_size(s: usize, t: u32, cap: u64) -> Result<usize> {
    match (s as u64).checked_pow(t) {
        Some(m) if m <= cap => Ok(m as usize),
        required => Err(Error::SizeBudget { required, cap }),
    }
}

/// The colouring of `[s^t]` obtained by nesting `base` `t` times.
pub fn build_product_colouring(base: &BaseColouring, t: u32, cap: u64) -> Result<Colouring> {
    if t < 1 {
        return Err(Error::domain("depth t must be at least 1"));
    }
    let s = base.s();
    let m = checked_size(s, t, cap)?;
    let g = base.colouring();
    let mut f = Colouring::constant(m, false)?;
    // Level i splits each interval of level i-1 into s subintervals.
    let mut parents = vec![IntervalAddress::root(s, t as usize)];
    for _level in 1..=t {
        let mut next = Vec::with_capacity(parents.len() * s);
        for parent in &parents {
            let children: Vec<IntervalAddress> = (0..s).map(|a| parent.child(a)).collect();
            for a in 0..s {
                for b in a + 1..s {
                    if g.get(a, b) {
                        for x in children[a].range() {
                            for y in children[b].range() {
                                f.set(x, y, true);
                            }
                        }
                    }
                }
            }
            next.extend(children);
        }
        parents = next;
    }
    Ok(f)
}

/// Blocks of row `x` contributed by each level of the construction: the
/// colours `f(x, y)` for `y > x` inside the level-`(i-1)` interval of `x` but
/// outside its level-`i` interval.
pub fn level_block_counts(f: &Colouring, s: usize, t: usize, x: usize) -> Vec<usize> {
    (1..=t)
        .map(|level| {
            let parent = IntervalAddress::of_vertex(s, t, x, level - 1).range();
            let own = IntervalAddress::of_vertex(s, t, x, level).range();
            let seq: Vec<bool> = (own.end..parent.end).map(|y| f.get(x, y)).collect();
            block_count(&seq)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InductionStep {
    /// Intervals of length `s` carry a copy of the base colouring.
    Base {
        interval_len: u64,
        bound: u64,
        colouring_hash: String,
    },
    /// A homogeneous set meets at most `h - 1` subintervals, each in fewer than `sub_bound` points.
    Compose {
        interval_len: u64,
        max_meeting_subintervals: u64,
        sub_bound: u64,
        bound: u64,
    },
}

/// `ell = h^t` with the level-by-level argument that no homogeneous set reaches it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifiedBound {
    pub s: u64,
    pub h: u64,
    pub t: u32,
    pub ell: u64,
    pub steps: Vec<InductionStep>,
    pub base_certificate: OracleCertificate,
}

impl CertifiedBound {
    /// Checks the arithmetic of every step and that the chain ends at `ell`.
    pub fn check(&self) -> bool {
        let mut prev: Option<(u64, u64)> = None;
        for step in &self.steps {
            match (*step).clone() {
                InductionStep::Base {
                    interval_len, bound, ..
                } => {
                    if prev.is_some() || interval_len != self.s || bound != self.h {
                        return false;
                    }
                    prev = Some((interval_len, bound));
                }
                InductionStep::Compose {
                    interval_len,
                    max_meeting_subintervals,
                    sub_bound,
                    bound,
                } => {
                    let Some((len, pb)) = prev else { return false };
                    // at most (h-1) subintervals, each with at most sub_bound-1 points
                    let worst = max_meeting_subintervals * (sub_bound - 1);
                    if interval_len != len * self.s
                        || max_meeting_subintervals != self.h - 1
                        || sub_bound != pb
                        || worst >= bound
                    {
                        return false;
                    }
                    prev = Some((interval_len, bound));
                }
            }
        }
        self.steps.len() == self.t as usize && prev.is_some_and(|(_, b)| b == self.ell)
    }
}

/// Certifies that the `t`-fold product of `base` has no homogeneous `h^t`-set.
pub fn certified_bound(base: &BaseColouring, t: u32) -> Result<CertifiedBound> {
    if t < 1 {
        return Err(Error::domain("depth t must be at least 1"));
    }
    let cert = &base.certificate().oracle;
    if !cert.recheck(base.colouring())? {
        return Err(Error::CertificationRefused(
            "base certificate does not reproduce".into(),
        ));
    }
    let (s, h) = (base.s() as u64, base.h() as u64);
    let overflow = || Error::domain(format!("h^t = {h}^{t} overflows"));
    let mut steps = vec![InductionStep::Base {
        interval_len: s,
        bound: h,
        colouring_hash: cert.colouring_hash.clone(),
    }];
    let (mut len, mut bound) = (s, h);
    for _ in 1..t {
        let next_len = len.checked_mul(s).ok_or_else(overflow)?;
        let next_bound = bound.checked_mul(h).ok_or_else(overflow)?;
        steps.push(InductionStep::Compose {
            interval_len: next_len,
            max_meeting_subintervals: h - 1,
            sub_bound: bound,
            bound: next_bound,
        });
        len = next_len;
        bound = next_bound;
    }
    Ok(CertifiedBound {
        s,
        h,
        t,
        ell: bound,
        steps,
        base_certificate: cert.clone(),
    })
}

pub const INEQ_ST: &str = "st <= k";
pub const INEQ_ELL: &str = "(2 log s)^t <= k";
pub const INEQ_SIZE: &str = "s^t >= k^((log k)^0.9)";

/// The three parameter inequalities for `t = round((log2 k)^0.95)`, `s = round(k^0.9)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub k: u64,
    pub params: ProductParams,
    pub st_le_k: bool,
    pub ell_le_k: bool,
    pub size_ge: bool,
    /// `log2(s^t)` and `(log2 k)^1.9`, the two sides of the size inequality.
    pub size_log2: f64,
    pub target_log2: f64,
}

impl CorollaryReport {
    pub fn failing(&self) -> Vec<&'static str> {
        [
            (self.st_le_k, INEQ_ST),
            (self.ell_le_k, INEQ_ELL),
            (self.size_ge, INEQ_SIZE),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

/// Smallest `k` accepted by [`corollary_report`]: below it `round(k^0.9) < 4`.
pub const COROLLARY_MIN_K: u64 = 5;

pub fn corollary_report(k: u64) -> Result<CorollaryReport> {
    if k < COROLLARY_MIN_K {
        return Err(Error::domain(format!("k must be at least {COROLLARY_MIN_K}, got {k}")));
    }
    let log_k = (k as f64).log2();
    let t = log_k.powf(0.95).round() as u32;
    let s = (k as f64).powf(0.9).round() as u64;
    let params = ProductParams::new(s, t.max(1))?;
    let size_log2 = params.t as f64 * (s as f64).log2();
    let target_log2 = log_k.powf(1.9);
    Ok(CorollaryReport {
        k,
        st_le_k: params.k <= k as u128,
        ell_le_k: params.ell <= BigUint::from(k),
        size_ge: size_log2 >= target_log2,
        size_log2,
        target_log2,
        params,
    })
}

/// Parameters for `k`, or the names of the inequalities they violate.
pub fn corollary_params(k: u64, min_k: u64) -> Result<ProductParams> {
    if k < min_k.max(COROLLARY_MIN_K) {
        return Err(Error::domain(format!(
            "k = {k} is below the configured minimum {min_k}"
        )));
    }
    let report = corollary_report(k)?;
    let failing = report.failing();
    if failing.is_empty() {
        Ok(report.params)
    } else {
        Err(Error::InequalityFails { failing })
    }
}

/// The same three inequalities for `k = 2^log2_k`, with `s = k^0.9` taken
/// exactly and every quantity compared through base-2 logarithms; usable for
/// `k` far beyond machine integers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub log2_k: f64,
    pub t: f64,
    pub st_le_k: bool,
    pub ell_le_k: bool,
    pub size_ge: bool,
}

pub fn corollary_report_log2(log2_k: f64) -> AsymptoticReport {
    let t = log2_k.powf(0.95).round().max(1.0);
    let log_s = 0.9 * log2_k;
    let floor_log_s = log_s.floor().max(1.0);
    AsymptoticReport {
        log2_k,
        t,
        st_le_k: log_s + t.log2() <= log2_k,
        ell_le_k: t * (2.0 * floor_log_s).log2() <= log2_k,
        size_ge: t * log_s >= log2_k.powf(1.9),
    }
}

impl AsymptoticReport {
    pub fn all_hold(&self) -> bool {
        self.st_le_k && self.ell_le_k && self.size_ge
    }
}

/// `m` as a machine integer when it fits.
pub fn params_size(p: &ProductParams) -> Option<u64> {
    p.m.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::IndexSet;

    #[test]
    fn base_size_four() {
        let base = find_base_colouring(4, 4, 10, 1).unwrap();
        let g = base.colouring();
        assert!(g.edge_count(true) > 0 && g.edge_count(false) > 0);
        assert_eq!(base.certificate().seed, Some(1));

        let one_off = Colouring::from_fn(4, |x, y| (x, y) == (0, 3)).unwrap();
        assert!(BaseColouring::certify(one_off, 4).is_ok());
    }

    #[test]
    fn base_size_eight_bound_six() {
        let base = find_base_colouring(8, 6, 50, 7).unwrap();
        let (a, b) = base.certificate().exhaustive.unwrap();
        assert!(a < 6 && b < 6);
        let again = find_base_colouring(8, 6, 50, 7).unwrap();
        assert_eq!(again.colouring(), base.colouring());
    }

    #[test]
    fn base_seventeen_avoiding_four() {
        let base = find_base_colouring(17, 4, 100, 3).unwrap();
        let cfg = CliqueSearchConfig::default();
        assert!(oracle::max_homogeneous(base.colouring(), false, &cfg).unwrap().size < 4);
        assert!(oracle::max_homogeneous(base.colouring(), true, &cfg).unwrap().size < 4);
    }

    #[test]
    fn impossible_base_is_not_found() {
        // R(3,3) = 6: every colouring of [6] has a homogeneous triangle.
        assert!(matches!(
            find_base_colouring(6, 3, 3, 0),
            Err(Error::NotFound { tries: 3, .. })
        ));
        assert!(find_base_colouring(3, 3, 1, 0).is_err());
        assert!(find_base_colouring(8, 2, 1, 0).is_err());
    }

    #[test]
    fn monochromatic_base_is_refused() {
        let mono = Colouring::constant(8, true).unwrap();
        assert!(matches!(
            BaseColouring::certify(mono, 6),
            Err(Error::CertificationRefused(_))
        ));
    }

    #[test]
    fn product_with_one_level_is_the_base() {
        let base = find_base_colouring(8, 6, 50, 2).unwrap();
        let f = build_product_colouring(&base, 1, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(&f, base.colouring());
        let cb = certified_bound(&base, 1).unwrap();
        assert_eq!(cb.ell, 6);
        assert!(cb.check());
    }

    #[test]
    fn size_cap() {
        let base = find_base_colouring(8, 6, 50, 2).unwrap();
        assert!(matches!(
            build_product_colouring(&base, 5, DEFAULT_SIZE_CAP),
            Err(Error::SizeBudget {
                required: Some(32768),
                cap: 4096
            })
        ));
    }

    #[test]
    fn certified_bound_chain() {
        let base = find_base_colouring(8, 6, 50, 2).unwrap();
        let cb = certified_bound(&base, 3).unwrap();
        assert_eq!(cb.ell, 216);
        assert!(cb.check());
        let mut broken = cb.clone();
        if let InductionStep::Compose { bound, .. } = &mut broken.steps[1] {
            *bound = 10;
        }
        assert!(!broken.check());
    }

    #[test]
    fn params() {
        let p = ProductParams::new(8, 2).unwrap();
        assert_eq!(p.k, 16);
        assert_eq!(p.ell, BigUint::from(36u32));
        assert_eq!(params_size(&p), Some(64));
        assert!(ProductParams::new(3, 2).is_err());
    }

    #[test]
    fn interval_addresses() {
        let root = IntervalAddress::root(4, 3);
        assert_eq!(root.range(), 0..64);
        let a = root.child(2).child(1);
        assert_eq!(a.range(), 36..40);
        assert_eq!(IntervalAddress::of_vertex(4, 3, 37, 2), a);
        assert_eq!(IntervalAddress::of_vertex(4, 3, 37, 3).range(), 37..38);
    }

    #[test]
    fn per_level_blocks_bounded_by_s() {
        let base = find_base_colouring(4, 3, 50, 5);
        // R(3,3) = 6 > 4, so a triangle-free two-colouring of [4] exists.
        let base = base.unwrap();
        let f = build_product_colouring(&base, 3, DEFAULT_SIZE_CAP).unwrap();
        let profile = f.unstability(&IndexSet::full(64));
        assert!(profile.max_blocks <= 12);
        for x in 0..64 {
            let levels = level_block_counts(&f, 4, 3, x);
            assert!(levels.iter().all(|&b| b <= 4));
            assert!(profile.per_row_blocks.get(x).is_none_or(|&b| b <= levels.iter().sum()));
        }
    }

    #[test]
    fn corollary_small_k_fails() {
        match corollary_params(16, 5) {
            Err(Error::InequalityFails { failing }) => assert!(failing.contains(&INEQ_ST)),
            other => panic!("expected InequalityFails, got {other:?}"),
        }
        assert!(corollary_params(3, 2).is_err());
    }

    #[test]
    fn corollary_two_to_twenty() {
        let r = corollary_report(1 << 20).unwrap();
        assert_eq!(r.params.t, 17);
        assert_eq!(r.params.s, 262_144);
        assert!(!r.st_le_k);
        assert!(r.failing().contains(&INEQ_ST));
    }

    #[test]
    fn corollary_asymptotic_regime() {
        assert!(!corollary_report_log2(20.0).all_hold());
        assert!(corollary_report_log2(2f64.powi(160)).all_hold());
    }
}
