use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ramsey_core::clr::{read_clr, write_clr};
use ramsey_core::construct::{
    build_product_colouring, certified_bound, corollary_params, corollary_report, find_base_colouring, COROLLARY_MIN_K,
    DEFAULT_SIZE_CAP,
};
use ramsey_core::extract::{extract_homogeneous, ExtractOptions};
use ramsey_core::montecarlo::{
    ej_union_report, empirical_ej, estimate_event_prob, estimate_fixed_position, estimate_joint_prob, Estimate,
    RunQuery,
};
use ramsey_core::oracle::{
    exhaustive_max_homogeneous, has_homogeneous_of_size, max_homogeneous, CliqueSearchConfig, Existence, EXHAUSTIVE_CAP,
};
use ramsey_core::selftest::{mutants, run_selftest, SelftestConfig};
use ramsey_core::{Colouring, Error, IndexSet};

#[derive(Parser)]
#[command(
    name = "ramsey",
    version,
    about = "Ramsey experiments on colourings with few row alternations"
)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write a JSON run manifest (flags, seed, files, version, wall time) here.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Product colouring of [s^t] from a searched base colouring of [s].
    Construct(ConstructArgs),
    /// Size, edge counts, unstability and (with --exact) homogeneous maxima.
    Analyze(AnalyzeArgs),
    /// Homogeneous set through a very simple subset.
    Extract(ExtractArgs),
    /// Exact maximum homogeneous sets.
    Oracle(OracleArgs),
    /// Run probabilities: Monte Carlo, exact values, union-bound chain.
    Mc(McArgs),
    /// Embedded invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, required_unless_present = "corollary")]
    s: Option<usize>,
    #[arg(long, required_unless_present = "corollary")]
    t: Option<u32>,
    /// The base colouring must have no homogeneous set of this size.
    #[arg(long, required_unless_present = "corollary")]
    h: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_tries: usize,
    /// Largest s^t that will be built.
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON transcript: base certificate and the level-by-level bound.
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Only report the rounded parameters for target k and the inequalities they meet.
    #[arg(long, value_name = "K", conflicts_with_all = ["s", "t", "h"])]
    corollary: Option<u64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Also compute the maximum homogeneous set per colour.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Depth; defaults to 2 floor(log2 k).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
    cap: u64,
    /// Dump grouping outcomes as CSV (to FILE, or stdout).
    #[arg(long, value_name = "FILE", num_args = 0..=1, default_missing_value = "-")]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColourArg {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
    Both,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    colour: ColourArg,
    /// Decide whether a homogeneous set of this size exists instead.
    #[arg(long, value_name = "ELL")]
    at_least: Option<usize>,
    /// Abort after this many search nodes (exit code 3).
    #[arg(long)]
    budget: Option<u64>,
    /// Sequential search, so the witness is reproducible.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    cert: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum McMode {
    /// Run of length k+1 in one length-j string.
    Event,
    /// Such runs in all of j independent strings.
    Joint,
    /// Run of length k+1 starting at position 0.
    Fixed,
    /// Union-bound chain for parameter k (analytic).
    Chain,
    /// Some 2j-subset of a random colouring of [n] has j rows with runs.
    Empirical,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, value_enum, default_value = "event")]
    mode: McMode,
    /// String length (not needed for --mode chain).
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, required_unless_present = "grid")]
    k: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid "j1..j2,k1..k2" (inclusive ranges).
    #[arg(long, conflicts_with_all = ["j", "k"])]
    grid: Option<String>,
    /// Ground set size for --mode empirical.
    #[arg(long)]
    n: Option<usize>,
    /// Largest j in --mode chain.
    #[arg(long, default_value_t = usize::MAX)]
    j_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random cases per randomized suite.
    #[arg(long, default_value_t = 300)]
    cases: usize,
    /// Run the suite against a broken tree DP (checks suite sensitivity).
    #[arg(long, hide = true)]
    mutant: bool,
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: &'static str,
    args: Vec<String>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    tool_version: &'static str,
    wall_ms: f64,
    exit_code: u8,
}

/// Files touched by a run, for the manifest.
#[derive(Default)]
struct Io {
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

type CliResult = Result<(), Error>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InsufficientStability { .. } | Error::SizeBudget { .. } => 2,
        Error::BudgetExceeded { .. } => 3,
        _ => 1,
    }
}

fn load(path: &Path, io: &mut Io) -> Result<Colouring, Error> {
    io.inputs.push(path.to_path_buf());
    read_clr(BufReader::new(File::open(path)?))
}

fn create(path: &Path, io: &mut Io) -> Result<BufWriter<File>, Error> {
    io.outputs.push(path.to_path_buf());
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T, io: &mut Io) -> CliResult {
    let mut w = create(path, io)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes to `path`, or stdout for `None` and `-`.
fn sink(path: Option<&Path>, io: &mut Io) -> Result<Box<dyn Write>, Error> {
    match path {
        Some(p) if p != Path::new("-") => Ok(Box::new(create(p, io)?)),
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

#[derive(Serialize)]
struct ConstructTranscript<'a> {
    s: usize,
    h: usize,
    t: u32,
    m: usize,
    colouring_hash: String,
    max_blocks: usize,
    base: &'a ramsey_core::construct::BaseCertificate,
    bound: ramsey_core::construct::CertifiedBound,
}

fn construct(a: &ConstructArgs, io: &mut Io) -> CliResult {
    if let Some(k) = a.corollary {
        let report = corollary_report(k)?;
        println!("k: {k}");
        println!("s: {}", report.params.s);
        println!("t: {}", report.params.t);
        println!("ell: {}", report.params.ell);
        println!("size: {}", report.params.m);
        println!("st <= k: {}", report.st_le_k);
        println!("(2 log s)^t <= k: {}", report.ell_le_k);
        println!(
            "s^t >= k^((log k)^0.9): {} (log2 {:.3} vs {:.3})",
            report.size_ge, report.size_log2, report.target_log2
        );
        corollary_params(k, COROLLARY_MIN_K)?;
        return Ok(());
    }
    let (s, t, h) = (a.s.expect("clap"), a.t.expect("clap"), a.h.expect("clap"));
    io.seed = Some(a.seed);
    let base = find_base_colouring(s, h, a.max_tries, a.seed)?;
    let f = build_product_colouring(&base, t, a.cap)?;
    let bound = certified_bound(&base, t)?;
    let max_blocks = f.unstability(&IndexSet::full(f.m())).max_blocks;
    println!("m: {}", f.m());
    println!("base tries: {}", base.certificate().tries);
    println!("max_blocks: {max_blocks} (bound {})", s * t as usize);
    println!("no homogeneous set of size: {}", bound.ell);
    println!("fingerprint: {}", f.fingerprint());
    if let Some(out) = &a.out {
        let mut w = create(out, io)?;
        write_clr(&f, &mut w)?;
        w.flush()?;
    }
    if let Some(cert) = &a.cert {
        let transcript = ConstructTranscript {
            s,
            h,
            t,
            m: f.m(),
            colouring_hash: f.fingerprint(),
            max_blocks,
            base: base.certificate(),
            bound,
        };
        write_json(cert, &transcript, io)?;
    }
    Ok(())
}

fn analyze(a: &AnalyzeArgs, io: &mut Io) -> CliResult {
    let f = load(&a.input, io)?;
    let profile = f.unstability(&IndexSet::full(f.m()));
    println!("m: {}", f.m());
    println!("edges colour 0: {}", f.edge_count(false));
    println!("edges colour 1: {}", f.edge_count(true));
    println!("max_blocks: {}", profile.max_blocks);
    if a.exact {
        let sizes = if f.m() <= EXHAUSTIVE_CAP {
            exhaustive_max_homogeneous(&f)?
        } else {
            let cfg = CliqueSearchConfig {
                parallel: true,
                ..Default::default()
            };
            (
                max_homogeneous(&f, false, &cfg)?.size,
                max_homogeneous(&f, true, &cfg)?.size,
            )
        };
        println!("max homogeneous: ({}, {})", sizes.0, sizes.1);
    }
    Ok(())
}

fn extract(a: &ExtractArgs, io: &mut Io) -> CliResult {
    let f = load(&a.input, io)?;
    let opts = ExtractOptions {
        depth: a.d,
        size_cap: a.cap,
    };
    let result = extract_homogeneous(&f, a.k, &opts);
    if let (Some(path), Ok(e)) = (&a.trace, &result) {
        let mut w = sink(Some(path), io)?;
        writeln!(w, "sigma,window_start,stable_count,b")?;
        for row in &e.very_simple.trace {
            writeln!(
                w,
                "{},{},{},{}",
                row.sigma, row.window_start, row.stable_count, row.colour as u8
            )?;
        }
        w.flush()?;
    }
    let e = result?;
    println!("d: {}", e.d);
    println!("stability parameter: {}", e.stability);
    println!("very simple set: {}", e.very_simple.set);
    println!("h0, h1: {}, {}", e.eh.h0, e.eh.h1);
    println!("homogeneous set: {}", e.set());
    println!("colour: {}", e.eh.colour as u8);
    println!(
        "size: {} (k = {}: {})",
        e.set().len(),
        e.k,
        if e.reaches_k() { "reached" } else { "not reached" }
    );
    Ok(())
}

fn oracle(a: &OracleArgs, io: &mut Io) -> CliResult {
    let f = load(&a.input, io)?;
    let cfg = CliqueSearchConfig {
        target: None,
        node_budget: a.budget,
        parallel: !a.deterministic,
    };
    if let Some(ell) = a.at_least {
        match has_homogeneous_of_size(&f, ell, &cfg)? {
            Existence::Found { colour, witness } => {
                println!("found: colour {} set {witness}", colour as u8);
            }
            Existence::Absent(cert) => {
                println!("absent: no homogeneous set of size {ell}");
                if let Some(path) = &a.cert {
                    write_json(path, &cert, io)?;
                }
            }
        }
        return Ok(());
    }
    let colours: &[bool] = match a.colour {
        ColourArg::Zero => &[false],
        ColourArg::One => &[true],
        ColourArg::Both => &[false, true],
    };
    let mut certs = Vec::new();
    for &colour in colours {
        let r = max_homogeneous(&f, colour, &cfg)?;
        println!("colour {}: size {} set {}", colour as u8, r.size, r.set);
        certs.push(r.certificate);
    }
    if let Some(path) = &a.cert {
        write_json(path, &certs, io)?;
    }
    Ok(())
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    let (lo, hi) = s.trim().split_once("..")?;
    let (lo, hi) = (lo.trim().parse().ok()?, hi.trim().parse().ok()?);
    (lo <= hi).then_some((lo, hi))
}

fn parse_grid(s: &str) -> Result<Vec<(usize, usize)>, Error> {
    let bad = || Error::Domain(format!("grid must look like \"j1..j2,k1..k2\", got {s:?}"));
    let (js, ks) = s.split_once(',').ok_or_else(bad)?;
    let ((j1, j2), (k1, k2)) = (parse_range(js).ok_or_else(bad)?, parse_range(ks).ok_or_else(bad)?);
    Ok((j1..=j2).flat_map(|j| (k1..=k2).map(move |k| (j, k))).collect())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn mc(a: &McArgs, io: &mut Io) -> CliResult {
    io.seed = Some(a.seed);
    let points = match (&a.grid, a.j, a.mode) {
        (Some(g), _, _) => parse_grid(g)?,
        (None, Some(j), _) => vec![(j, a.k.expect("clap"))],
        (None, None, McMode::Chain) => vec![(0, a.k.expect("clap"))],
        (None, None, _) => return Err(Error::Domain("--j or --grid is required".into())),
    };
    let mut w = sink(a.out.as_deref(), io)?;
    match a.mode {
        McMode::Event | McMode::Joint | McMode::Fixed => {
            writeln!(w, "j,k,trials,p_hat,stderr,exact,bound")?;
            for (j, k) in points {
                let q = RunQuery::new(j, k, a.trials, a.seed)?;
                let e: Estimate = match a.mode {
                    McMode::Event => estimate_event_prob(&q),
                    McMode::Joint => estimate_joint_prob(&q),
                    _ => estimate_fixed_position(&q)?,
                };
                writeln!(
                    w,
                    "{j},{k},{},{},{},{},{}",
                    e.trials,
                    e.p_hat,
                    e.stderr,
                    fmt_opt(e.exact),
                    e.analytic_bound
                )?;
            }
        }
        McMode::Chain => {
            writeln!(
                w,
                "k,j,subsets_log2,binomial_bound_log2,per_subset_log2,product_log2,per_j_bound_log2,binomial_holds,chain_holds"
            )?;
            let mut ks: Vec<usize> = points.iter().map(|p| p.1).collect();
            ks.dedup();
            for k in ks {
                let r = ej_union_report(k, a.j_max)?;
                for row in &r.rows {
                    writeln!(
                        w,
                        "{k},{},{},{},{},{},{},{},{}",
                        row.j,
                        row.subsets_log2,
                        row.binomial_bound_log2,
                        row.per_subset_log2,
                        row.product_log2,
                        row.per_j_bound_log2,
                        row.binomial_holds,
                        row.chain_holds
                    )?;
                }
                eprintln!(
                    "k={k}: ground set {}, union log2 {}, final bound log2 {}{}",
                    r.ground_size,
                    r.union_log2,
                    r.final_bound_log2,
                    if r.truncated { " (truncated at --j-max)" } else { "" }
                );
            }
        }
        McMode::Empirical => {
            let n = a.n.ok_or_else(|| Error::Domain("--mode empirical needs --n".into()))?;
            writeln!(w, "n,j,k,trials,p_hat,stderr,bound")?;
            for (j, k) in points {
                let r = empirical_ej(n, k, j, a.trials, a.seed)?;
                writeln!(
                    w,
                    "{n},{j},{k},{},{},{},{}",
                    r.estimate.trials, r.estimate.p_hat, r.estimate.stderr, r.bound
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn selftest(a: &SelftestArgs, io: &mut Io) -> Result<bool, Error> {
    io.seed = Some(a.seed);
    let mut cfg = SelftestConfig {
        seed: a.seed,
        cases: a.cases,
        ..Default::default()
    };
    if a.mutant {
        cfg.eh_table = mutants::flipped_colour_table;
    }
    let report = run_selftest(&cfg);
    for s in &report.suites {
        let status = if s.passed() { "ok" } else { "FAILED" };
        println!("{}: {} cases, {} failures, {status}", s.name, s.cases, s.failures);
        if let Some(why) = &s.first_failure {
            println!("  first failure: {why}");
        }
    }
    println!("selftest: {}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(report.passed())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: could not size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let mut io = Io::default();
    let (name, result): (&'static str, Result<bool, Error>) = match &cli.command {
        Command::Construct(a) => ("construct", construct(a, &mut io).map(|_| true)),
        Command::Analyze(a) => ("analyze", analyze(a, &mut io).map(|_| true)),
        Command::Extract(a) => ("extract", extract(a, &mut io).map(|_| true)),
        Command::Oracle(a) => ("oracle", oracle(a, &mut io).map(|_| true)),
        Command::Mc(a) => ("mc", mc(a, &mut io).map(|_| true)),
        Command::Selftest(a) => ("selftest", selftest(a, &mut io)),
    };
    let code = match &result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::BudgetExceeded { witness, .. } = e {
                eprintln!("best set so far: {}", IndexSet::from_unsorted(witness.clone()));
            }
            exit_code(e)
        }
    };
    if let Some(path) = &cli.manifest {
        let manifest = RunManifest {
            subcommand: name,
            args: std::env::args().collect(),
            seed: io.seed,
            inputs: io.inputs,
            outputs: io.outputs,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            exit_code: code,
        };
        let written = File::create(path)
            .map_err(Error::from)
            .and_then(|f| serde_json::to_writer_pretty(f, &manifest).map_err(|e| Error::Io(e.into())));
        if let Err(e) = written {
            eprintln!("error: writing manifest: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code)
}
