//! Embedded invariant suite run by `ramsey selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::colouring::{Colouring, IndexSet};
use crate::extract::{eh_table, random_very_simple, VsTree};
use crate::montecarlo::{exact_run_prob, has_run};
use crate::oracle::{exhaustive_max_homogeneous, max_homogeneous, CliqueSearchConfig};

/// Tree DP under test: best colour-0 and colour-1 leaf sets.
pub type EhTable = fn(&VsTree) -> [Vec<usize>; 2];

#[derive(Clone, Copy, Debug)]
pub struct SelftestConfig {
    pub seed: u64,
    pub cases: usize,
    pub eh_table: EhTable,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 0,
            cases: 300,
            eh_table,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.first_failure.get_or_insert_with(describe);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

fn oracle_equivalence(cfg: &SelftestConfig) -> SuiteResult {
    let mut suite = SuiteResult::new("oracle-equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let search = CliqueSearchConfig::default();
    for case in 0..cfg.cases {
        let m = rng.random_range(1..=10);
        let p = rng.random_range(0.1..0.9);
        let f = Colouring::from_fn(m, |_, _| rng.random_bool(p)).expect("m >= 1");
        let exact = exhaustive_max_homogeneous(&f).expect("m <= 10");
        let bb = (
            max_homogeneous(&f, false, &search).map(|r| r.size).ok(),
            max_homogeneous(&f, true, &search).map(|r| r.size).ok(),
        );
        suite.record(bb == (Some(exact.0), Some(exact.1)), || {
            format!("case {case} (m = {m}): branch and bound {bb:?}, exhaustive {exact:?}")
        });
    }
    suite
}

fn eh_product_bound(cfg: &SelftestConfig) -> SuiteResult {
    let mut suite = SuiteResult::new("eh-product-bound");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    for case in 0..cfg.cases {
        let n = [2, 4, 8, 9, 16][case % 5];
        let m = n + rng.random_range(0..8);
        let (f, tree) = random_very_simple(m, n, &mut rng).expect("n <= m");
        let [w0, w1] = (cfg.eh_table)(&tree);
        let homogeneous = |w: &[usize], colour: bool| {
            f.is_homogeneous(&IndexSet::from_unsorted(w.to_vec()))
                .map(|h| h.holds_for(colour))
                .unwrap_or(false)
        };
        let leaves = IndexSet::from_unsorted(tree.leaves());
        let sub = f.restrict(&leaves).expect("leaves lie in [m]").colouring;
        let (e0, e1) = exhaustive_max_homogeneous(&sub).expect("n <= 16");
        let ok = w0.len() * w1.len() >= n
            && homogeneous(&w0, false)
            && homogeneous(&w1, true)
            && w0.len().max(w1.len()) == e0.max(e1);
        suite.record(ok, || {
            format!(
                "case {case} (n = {n}): dp sizes ({}, {}), exhaustive ({e0}, {e1})",
                w0.len(),
                w1.len()
            )
        });
    }
    suite
}

fn run_probability(_: &SelftestConfig) -> SuiteResult {
    let mut suite = SuiteResult::new("run-probability");
    for j in 1..=12usize {
        let mut s = vec![false; j];
        for k in 0..=j {
            let hits = (0u32..1 << j)
                .filter(|bits| {
                    s.iter_mut().enumerate().for_each(|(i, b)| *b = bits >> i & 1 == 1);
                    has_run(&s, k + 1)
                })
                .count() as u64;
            let p = exact_run_prob(j, k).expect("j <= 12");
            suite.record(hits * p.denom() == p.numer() << j, || {
                format!("j = {j}, k = {k}: enumeration {hits}/2^{j}, dp {p}")
            });
        }
    }
    suite
}

pub fn run_selftest(cfg: &SelftestConfig) -> SelftestReport {
    SelftestReport {
        suites: vec![oracle_equivalence(cfg), eh_product_bound(cfg), run_probability(cfg)],
    }
}

/// Deliberately broken DPs, used to check that the suite notices.
pub mod mutants {
    use super::*;

    /// The tree DP with every node colour flipped.
    pub fn flipped_colour_table(tree: &VsTree) -> [Vec<usize>; 2] {
        fn flip(t: &VsTree) -> VsTree {
            match t {
                VsTree::Leaf(v) => VsTree::Leaf(*v),
                VsTree::Node { colour, left, right } => VsTree::node(!colour, flip(left), flip(right)),
            }
        }
        eh_table(&flip(tree))
    }
}
