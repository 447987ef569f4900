use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ramsey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramsey"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn analyze_constant_file() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "zero.clr");
    fs::write(&f, "RAMSEY-CLR 1 4\n000\n00\n0\n").unwrap();
    let o = ramsey(&["analyze", "--in", &f, "--exact"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "m"), "4");
    assert_eq!(field(&out, "edges colour 0"), "6");
    assert_eq!(field(&out, "max_blocks"), "1");
    assert_eq!(field(&out, "max homogeneous"), "(4, 1)");
}

#[test]
fn truncated_file_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let f = path(&dir, "short.clr");
    fs::write(&f, "RAMSEY-CLR 1 4\n000\n00\n").unwrap();
    let o = ramsey(&["analyze", "--in", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4, column 1"), "{}", stderr(&o));
}

#[test]
fn construct_then_analyze() {
    let dir = TempDir::new().unwrap();
    let (clr, cert, manifest) = (path(&dir, "p.clr"), path(&dir, "p.json"), path(&dir, "m.json"));
    let o = ramsey(&[
        "construct",
        "--s",
        "8",
        "--h",
        "6",
        "--t",
        "2",
        "--seed",
        "5",
        "--out",
        &clr,
        "--cert",
        &cert,
        "--manifest",
        &manifest,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let built = stdout(&o);
    assert_eq!(field(&built, "no homogeneous set of size"), "36");

    let o = ramsey(&["analyze", "--in", &clr]);
    let report = stdout(&o);
    assert_eq!(field(&report, "m"), "64");
    let blocks: usize = field(&report, "max_blocks").parse().unwrap();
    assert!(blocks <= 16);

    let transcript: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(transcript["bound"]["ell"], 36);
    assert_eq!(
        transcript["colouring_hash"].as_str().unwrap(),
        field(&built, "fingerprint")
    );

    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "construct");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn construct_is_reproducible_across_threads() {
    let dir = TempDir::new().unwrap();
    let mut texts = Vec::new();
    for (i, threads) in ["1", "4", "4"].into_iter().enumerate() {
        let out = path(&dir, &format!("c{i}.clr"));
        let o = ramsey(&[
            "construct",
            "--s",
            "9",
            "--h",
            "4",
            "--t",
            "2",
            "--seed",
            "11",
            "--threads",
            threads,
            "--out",
            &out,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        texts.push(fs::read_to_string(&out).unwrap());
    }
    assert!(texts.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn mc_csv_is_reproducible_across_threads() {
    let run = |threads: &str| {
        let o = ramsey(&[
            "mc",
            "--grid",
            "4..8,1..3",
            "--trials",
            "20000",
            "--seed",
            "9",
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let mut lines = one.lines();
    assert_eq!(lines.next(), Some("j,k,trials,p_hat,stderr,exact,bound"));
    assert_eq!(lines.count(), 15);
}

#[test]
fn mc_writes_csv_file() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "mc.csv");
    let o = ramsey(&["mc", "--j", "4", "--k", "1", "--trials", "1000", "--out", &out]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0..3], ["4", "1", "1000"]);
    assert_eq!(row[5], "0.875");
}

#[test]
fn mc_chain_reports_endpoints() {
    let o = ramsey(&["mc", "--mode", "chain", "--k", "16"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("final bound log2 -60"), "{}", stderr(&o));
}

#[test]
fn extract_exit_codes_and_trace() {
    let dir = TempDir::new().unwrap();
    let constant = path(&dir, "c.clr");
    let mut text = String::from("RAMSEY-CLR 1 81\n");
    for x in 0..80 {
        text.push_str(&"1".repeat(80 - x));
        text.push('\n');
    }
    fs::write(&constant, &text).unwrap();
    let trace = path(&dir, "trace.csv");
    let o = ramsey(&["extract", "--in", &constant, "--k", "3", "--d", "2", "--trace", &trace]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "colour"), "1");
    let rows: Vec<String> = fs::read_to_string(&trace).unwrap().lines().map(String::from).collect();
    assert_eq!(rows[0], "sigma,window_start,stable_count,b");
    assert_eq!(rows[1..], [",0,36,1", "0,0,4,1", "1,0,4,1"]);

    // alternating rows: no stable window
    let alternating = path(&dir, "a.clr");
    let mut text = String::from("RAMSEY-CLR 1 81\n");
    for x in 0..80usize {
        text.extend((x + 1..81).map(|y| if y % 2 == 1 { '1' } else { '0' }));
        text.push('\n');
    }
    fs::write(&alternating, &text).unwrap();
    let o = ramsey(&["extract", "--in", &alternating, "--k", "3", "--d", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("insufficient stability at sigma="),
        "{}",
        stderr(&o)
    );

    let o = ramsey(&["extract", "--in", &constant, "--k", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("size budget"));
}

#[test]
fn oracle_certificates_and_budget() {
    let dir = TempDir::new().unwrap();
    let clr = path(&dir, "p.clr");
    let o = ramsey(&["construct", "--s", "5", "--h", "3", "--t", "2", "--out", &clr]);
    assert!(o.status.success(), "{}", stderr(&o));

    let cert = path(&dir, "o.json");
    let o = ramsey(&["oracle", "--in", &clr, "--at-least", "9", "--cert", &cert]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("absent"));
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["claim"]["kind"], "no_homogeneous_of_size");
    assert_eq!(c["exact"], true);

    let o = ramsey(&["oracle", "--in", &clr, "--colour", "1", "--deterministic"]);
    assert!(stdout(&o).contains("colour 1: size 4"), "{}", stdout(&o));
    assert!(!stdout(&o).contains("colour 0"));

    let o = ramsey(&["oracle", "--in", &clr, "--budget", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn selftest_passes_and_detects_mutant() {
    let o = ramsey(&["selftest", "--cases", "40"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for suite in [
        "oracle-equivalence: 40 cases",
        "eh-product-bound: 40 cases",
        "run-probability: 90 cases",
    ] {
        assert!(out.contains(suite), "{out}");
    }
    assert!(out.ends_with("selftest: PASS\n"));

    let o = ramsey(&["selftest", "--cases", "40", "--mutant"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("selftest: FAIL"));
}

#[test]
fn corollary_report_names_failures() {
    let o = ramsey(&["construct", "--corollary", "1048576"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(field(&out, "t"), "17");
    assert_eq!(field(&out, "s"), "262144");
    assert!(stderr(&o).contains("st <= k"));
}

#[test]
fn missing_input_is_an_error() {
    let o = ramsey(&["analyze", "--in", Path::new("/nonexistent/x.clr").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
