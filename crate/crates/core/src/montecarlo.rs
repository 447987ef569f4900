//! Runs in random binary strings and the union-bound chain built on them.
//!
//! For a uniformly random string of length `j`, the event of interest is
//! "contains a run of `k + 1` equal symbols". A run of that length starting
//! at a fixed position has probability exactly `2^-k`; there are fewer than
//! `j` starting positions, so the event has probability below `j / 2^k`.
//! `j` independent such strings all carrying a run has probability below
//! `(j / 2^k)^j`, and a union over the `2j`-subsets of a ground set of size
//! `2^(k/4)` gives the chain evaluated by [`ej_union_report`].
//!
//! Sampling uses one ChaCha stream per trial index, so estimates are a pure
//! function of `(seed, trials)` whatever the number of worker threads.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::colouring::Colouring;
use crate::error::{Error, Result};

/// Largest string length handled by the exact run-probability DP.
pub const EXACT_CAP: usize = 30;

/// Largest ground set used by the exhaustive empirical mode.
pub const EMPIRICAL_CAP: usize = 20;

/// Largest `k` for which the analytic chain is evaluated.
pub const ANALYTIC_K_CAP: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunQuery {
    /// String length.
    pub j: usize,
    /// Run parameter; runs of length `k + 1` are counted.
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
}

impl RunQuery {
    pub fn new(j: usize, k: usize, trials: u64, seed: u64) -> Result<Self> {
        if j == 0 || trials == 0 {
            return Err(Error::domain("RunQuery needs j >= 1 and trials >= 1"));
        }
        Ok(RunQuery { j, k, trials, seed })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub analytic_bound: f64,
    pub exact: Option<f64>,
}

impl Estimate {
    fn new(hits: u64, trials: u64, analytic_bound: f64, exact: Option<f64>) -> Self {
        let p_hat = hits as f64 / trials as f64;
        Estimate {
            trials,
            hits,
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            analytic_bound,
            exact,
        }
    }

    /// `|p_hat - value| <= sigmas * stderr`.
    ///
    /// When `p_hat` is 0 or 1 the binomial standard error vanishes; the
    /// standard error implied by `value` is used instead.
    pub fn within(&self, value: f64, sigmas: f64) -> bool {
        let se = if self.stderr > 0.0 {
            self.stderr
        } else {
            (value * (1.0 - value) / self.trials as f64).sqrt()
        };
        (self.p_hat - value).abs() <= sigmas * se
    }
}

/// Length of the longest constant block; 0 for the empty string.
pub fn longest_run(s: &[bool]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for (i, &b) in s.iter().enumerate() {
        cur = if i > 0 && s[i - 1] == b { cur + 1 } else { 1 };
        best = best.max(cur);
    }
    best
}

pub fn has_run(s: &[bool], r: usize) -> bool {
    debug_assert!(r >= 1);
    longest_run(s) >= r
}

/// Number of length-`j` strings with no run longer than `k`, by a DP over
/// (final symbol, length of the final run).
fn count_runs_at_most(j: usize, k: usize) -> u64 {
    if j == 0 {
        return 1;
    }
    if k == 0 {
        return 0;
    }
    // ways[r]: strings with a fixed final symbol whose final run has length r + 1
    let mut ways = vec![0u64; k];
    ways[0] = 1;
    for _ in 1..j {
        let total: u64 = ways.iter().sum();
        ways.rotate_right(1);
        ways[0] = total;
    }
    2 * ways.iter().sum::<u64>()
}

/// Exact probability that a uniform string of length `j` contains a run of
/// at least `k + 1` equal symbols.
pub fn exact_run_prob(j: usize, k: usize) -> Result<Ratio<u64>> {
    if j > EXACT_CAP {
        return Err(Error::domain(format!(
            "exact run probability capped at j = {EXACT_CAP}, got {j}"
        )));
    }
    let total = 1u64 << j;
    Ok(Ratio::new(total - count_runs_at_most(j, k), total))
}

/// Exact probability that `j` independent strings of length `j` all contain
/// such a run.
pub fn exact_joint_prob(j: usize, k: usize) -> Result<Ratio<BigUint>> {
    let p = exact_run_prob(j, k)?;
    Ok(Ratio::new(
        BigUint::from(*p.numer()).pow(j as u32),
        BigUint::from(*p.denom()).pow(j as u32),
    ))
}

/// `j / 2^k`.
pub fn single_event_bound(j: usize, k: usize) -> Ratio<BigUint> {
    Ratio::new(BigUint::from(j), BigUint::one() << k)
}

/// `log2(x)` for arbitrarily large `x`; `-inf` for zero.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("fits in f64").log2() + shift as f64
}

pub fn ratio_to_f64(r: &Ratio<BigUint>) -> f64 {
    (log2_big(r.numer()) - log2_big(r.denom())).exp2()
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn sample_string<R: Rng>(rng: &mut R, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.random::<bool>()).collect()
}

fn count_hits(trials: u64, seed: u64, hit: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> u64 {
    (0..trials)
        .into_par_iter()
        .filter(|&t| hit(&mut trial_rng(seed, t)))
        .count() as u64
}

/// Monte Carlo estimate of the probability computed by [`exact_run_prob`].
pub fn estimate_event_prob(q: &RunQuery) -> Estimate {
    let (j, r) = (q.j, q.k + 1);
    let hits = count_hits(q.trials, q.seed, |rng| has_run(&sample_string(rng, j), r));
    let exact = exact_run_prob(q.j, q.k).ok().and_then(|p| p.to_f64());
    let bound = ratio_to_f64(&single_event_bound(q.j, q.k)).min(1.0);
    Estimate::new(hits, q.trials, bound, exact)
}

/// Monte Carlo estimate that all of `j` independent length-`j` strings carry a run.
pub fn estimate_joint_prob(q: &RunQuery) -> Estimate {
    let (j, r) = (q.j, q.k + 1);
    let hits = count_hits(q.trials, q.seed, |rng| {
        (0..j).all(|_| has_run(&sample_string(rng, j), r))
    });
    let exact = exact_joint_prob(q.j, q.k).ok().map(|p| ratio_to_f64(&p));
    let bound = ratio_to_f64(&single_event_bound(q.j, q.k)).min(1.0).powi(j as i32);
    Estimate::new(hits, q.trials, bound, exact)
}

/// Frequency of a run of length `k + 1` starting at position 0; exactly `2^-k` in expectation.
pub fn estimate_fixed_position(q: &RunQuery) -> Result<Estimate> {
    if q.j < q.k + 1 {
        return Err(Error::domain(format!(
            "a run of length {} does not fit in length {}",
            q.k + 1,
            q.j
        )));
    }
    let (j, k) = (q.j, q.k);
    let hits = count_hits(q.trials, q.seed, |rng| {
        let s = sample_string(rng, j);
        s[..=k].iter().all(|&b| b == s[0])
    });
    let p = (-(k as f64)).exp2();
    Ok(Estimate::new(hits, q.trials, p, Some(p)))
}

/// One `j` of the union-bound chain, all quantities as base-2 logarithms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EjRow {
    pub j: usize,
    /// `log2 C(n, 2j)` for the ground-set size `n`; `-inf` when `2j > n`.
    pub subsets_log2: f64,
    /// `kj/2`, the bound `C(n, 2j) <= n^(2j) = 2^(kj/2)`.
    pub binomial_bound_log2: f64,
    /// `j (log2 j - k)`, the per-subset bound `(j / 2^k)^j`.
    pub per_subset_log2: f64,
    /// Sum of the previous two: the union bound on `Pr(E_j)`.
    pub product_log2: f64,
    /// `-kj/4`, i.e. `(2^(-k/4))^j`.
    pub per_j_bound_log2: f64,
    /// `C(n, 2j) <= 2^(kj/2)`, checked in exact integer arithmetic.
    pub binomial_holds: bool,
    /// product `<= (2^(-k/4))^j <= 2^(-k^2/4)`, checked in exact integer arithmetic.
    pub chain_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EjReport {
    pub k: usize,
    /// `floor(2^(k/4))`.
    pub ground_size: u64,
    pub rows: Vec<EjRow>,
    /// `-k^2/4`.
    pub per_j_endpoint_log2: f64,
    /// `-(k^2 - k)/4`.
    pub final_bound_log2: f64,
    /// `log2` of the sum over rows of the per-`j` bounds; never above the final bound.
    pub union_log2: f64,
    /// True when `j_max` cut the range short.
    pub truncated: bool,
}

fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ground_size(k: usize) -> u64 {
    if k.is_multiple_of(4) {
        1u64 << (k / 4)
    } else {
        (k as f64 / 4.0).exp2().floor() as u64
    }
}

/// Evaluates the union-bound chain for every `j` in `[k, min(j_max, 2^(k/4))]`.
pub fn ej_union_report(k: usize, j_max: usize) -> Result<EjReport> {
    if k == 0 || k > ANALYTIC_K_CAP {
        return Err(Error::domain(format!("k must lie in 1..={ANALYTIC_K_CAP}, got {k}")));
    }
    let n = ground_size(k);
    let hi = (n as usize).min(j_max);
    let kf = k as f64;
    let mut rows = Vec::new();
    for j in k..=hi {
        let jf = j as f64;
        let subsets = binomial(n, 2 * j as u64);
        // C(n,2j) <= 2^(kj/2)  <=>  C(n,2j)^2 <= 2^(kj)
        let binomial_holds = &subsets * &subsets <= BigUint::one() << (k * j);
        // 2^(kj/2) (j/2^k)^j <= 2^(-kj/4)  <=>  j^(4j) <= 2^(kj); then kj/4 >= k^2/4  <=>  j >= k
        let chain_holds = BigUint::from(j).pow(4 * j as u32) <= BigUint::one() << (k * j) && j >= k;
        let binomial_bound_log2 = kf * jf / 2.0;
        let per_subset_log2 = jf * (jf.log2() - kf);
        rows.push(EjRow {
            j,
            subsets_log2: log2_big(&subsets),
            binomial_bound_log2,
            per_subset_log2,
            product_log2: binomial_bound_log2 + per_subset_log2,
            per_j_bound_log2: -kf * jf / 4.0,
            binomial_holds,
            chain_holds,
        });
    }
    let union_log2 = match rows.iter().map(|r| r.per_j_bound_log2).reduce(f64::max) {
        Some(top) => {
            top + rows
                .iter()
                .map(|r| (r.per_j_bound_log2 - top).exp2())
                .sum::<f64>()
                .log2()
        }
        None => f64::NEG_INFINITY,
    };
    Ok(EjReport {
        k,
        ground_size: n,
        rows,
        per_j_endpoint_log2: -kf * kf / 4.0,
        final_bound_log2: -(kf * kf - kf) / 4.0,
        union_log2,
        truncated: j_max < n as usize,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalEj {
    pub n: usize,
    pub k: usize,
    pub j: usize,
    /// Frequency over random colourings of `[n]` of "some `2j`-subset has all `j` rows carrying a run".
    pub estimate: Estimate,
    /// `min(1, C(n, 2j) (j / 2^k)^j)`.
    pub bound: f64,
}

/// Advances `c` to the next `r`-combination of `[n]` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if c[i] < n - r + i {
            c[i] += 1;
            for t in i + 1..r {
                c[t] = c[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Whether the first `j` elements of `c` all see a run of `k + 1` equal colours
/// towards the last `j` elements.
fn all_rows_have_runs(f: &Colouring, c: &[usize], k: usize) -> bool {
    let j = c.len() / 2;
    let (head, tail) = c.split_at(j);
    head.iter().all(|&x| {
        let s: Vec<bool> = tail.iter().map(|&y| f.get(x, y)).collect();
        has_run(&s, k + 1)
    })
}

/// Samples colourings of `[n]` and tests every `2j`-subset exhaustively.
pub fn empirical_ej(n: usize, k: usize, j: usize, trials: u64, seed: u64) -> Result<EmpiricalEj> {
    if n > EMPIRICAL_CAP {
        return Err(Error::domain(format!(
            "empirical mode capped at n = {EMPIRICAL_CAP}, got {n}"
        )));
    }
    if j == 0 || 2 * j > n || trials == 0 {
        return Err(Error::domain(format!(
            "need 1 <= 2j <= n and trials >= 1 (n = {n}, j = {j})"
        )));
    }
    let hits = count_hits(trials, seed, |rng| {
        let f = Colouring::random(n, rng).expect("n >= 2");
        let mut c: Vec<usize> = (0..2 * j).collect();
        loop {
            if all_rows_have_runs(&f, &c, k) {
                return true;
            }
            if !next_combination(&mut c, n) {
                return false;
            }
        }
    });
    let per_subset = ratio_to_f64(&single_event_bound(j, k)).powi(j as i32);
    let count = binomial(n as u64, 2 * j as u64).to_f64().unwrap_or(f64::INFINITY);
    let bound = (count * per_subset).min(1.0);
    Ok(EmpiricalEj {
        n,
        k,
        j,
        estimate: Estimate::new(hits, trials, bound, None),
        bound,
    })
}
