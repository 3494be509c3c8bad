//! End-to-end checks of the `snns` binary: determinism of emitted files and
//! CSV, error paths, and agreement between indexes and the brute-force scan.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn snns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snns"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = snns(args);
    assert!(
        out.status.success(),
        "snns {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is utf-8")
}

fn gen_args<'a>(stem: &'a str, seed: &'a str) -> Vec<&'a str> {
    vec![
        "gen", "--n", "300", "--d", "64", "--k", "3", "--eps", "0.3", "--seed", seed, "--out",
        stem,
    ]
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&gen_args(a.to_str().unwrap(), "7"));
    ok(&gen_args(b.to_str().unwrap(), "7"));
    assert_eq!(
        fs::read(a.with_extension("bin")).unwrap(),
        fs::read(b.with_extension("bin")).unwrap()
    );
    let ja = fs::read_to_string(a.with_extension("json")).unwrap();
    let jb = fs::read_to_string(b.with_extension("json")).unwrap();
    assert_eq!(ja, jb);
}

#[test]
fn sigma_zero_keeps_query_clean() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("clean");
    ok(&[
        "gen", "--n", "100", "--d", "32", "--k", "2", "--eps", "0.4", "--sigma", "0", "--seed",
        "5", "--out", stem.to_str().unwrap(),
    ]);
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
    assert_eq!(sidecar["q"], sidecar["q_tilde"]);
    assert_eq!(sidecar["model"]["sigma"], 0.0);
}

#[test]
fn build_and_query_are_deterministic_and_correct() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("ds");
    let stem_s = stem.to_str().unwrap();
    ok(&gen_args(stem_s, "11"));

    let idx = dir.path().join("ds.snni");
    let idx_s = idx.to_str().unwrap();
    let stats1 = ok(&["build", "--algo", "iterpca", "--dataset", stem_s, "--out", idx_s]);
    let stats2 = ok(&["build", "--algo", "iterpca", "--dataset", stem_s, "--out", idx_s]);
    assert_eq!(stats1, stats2, "build stats must be reproducible");
    let parsed: serde_json::Value = serde_json::from_str(&stats1).unwrap();
    assert_eq!(parsed["algo"], "iterpca");
    assert!(parsed["layers"].as_u64().unwrap() >= 1);

    let q1 = ok(&["query", "--algo", "iterpca", "--dataset", stem_s, "--index", idx_s]);
    let q2 = ok(&["query", "--algo", "iterpca", "--dataset", stem_s, "--index", idx_s]);
    assert_eq!(q1, q2, "query CSV must be byte-identical");
    let row = q1.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[4], "true", "sidecar query must find the planted point");
    assert_eq!(cols[6], "0", "micros stays zero without --timing");
}

#[test]
fn warmup_index_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("adv");
    let stem_s = stem.to_str().unwrap();
    ok(&[
        "gen", "--n", "256", "--d", "32", "--k", "4", "--eps", "0.32", "--noise-mode",
        "adversarial-toward-query", "--seed", "2", "--out", stem_s,
    ]);
    let idx = dir.path().join("adv.snni");
    let idx_s = idx.to_str().unwrap();
    let stats = ok(&["build", "--algo", "warmup", "--dataset", stem_s, "--out", idx_s]);
    let parsed: serde_json::Value = serde_json::from_str(&stats).unwrap();
    assert_eq!(parsed["algo"], "warmup");
    assert_eq!(parsed["leftover"], 0);

    let csv = ok(&["query", "--algo", "warmup", "--dataset", stem_s, "--index", idx_s]);
    assert!(csv.lines().nth(1).unwrap().contains("true"));

    // asking for the wrong variant is refused
    let out = snns(&["query", "--algo", "iterpca", "--dataset", stem_s, "--index", idx_s]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("variant"));
}

#[test]
fn query_file_matches_scan_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("ds");
    let stem_s = stem.to_str().unwrap();
    ok(&gen_args(stem_s, "13"));

    // build a query matrix from fresh noisy queries of the same instance
    let (_, sidecar) = snns_core::io::read_dataset(&stem).unwrap();
    let m = &sidecar.model;
    let inst = snns_core::genmodel::gen_planted(m.n, m.d, m.k, m.epsilon, m.geometry, m.seed)
        .unwrap();
    let noisy =
        snns_core::genmodel::perturb_gaussian(&inst, m.sigma, false, m.noise_seed).unwrap();
    let rows: Vec<Vec<f64>> = (0..8).map(|t| noisy.extra_query(t).unwrap()).collect();
    let qfile = dir.path().join("queries.bin");
    snns_core::io::write_matrix(&qfile, &snns_core::DenseMatrix::from_rows(&rows).unwrap())
        .unwrap();

    let idx = dir.path().join("ds.snnt");
    let idx_s = idx.to_str().unwrap();
    ok(&["build", "--algo", "pcatree", "--dataset", stem_s, "--out", idx_s]);

    let tree_csv = ok(&[
        "query", "--algo", "pcatree", "--dataset", stem_s, "--index", idx_s, "--queries",
        qfile.to_str().unwrap(),
    ]);
    let scan_csv = ok(&[
        "query", "--algo", "scan", "--dataset", stem_s, "--queries", qfile.to_str().unwrap(),
    ]);
    let ids = |csv: &str| -> Vec<String> {
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().to_string())
            .collect()
    };
    assert_eq!(ids(&tree_csv), ids(&scan_csv), "tree must agree with the scan");
    // file queries carry no ground truth
    let row = tree_csv.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[2], "");
    assert_eq!(cols[4], "");
}

#[test]
fn verify_passes_on_conforming_runs_and_fails_on_violations() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("ds");
    let stem_s = stem.to_str().unwrap();
    ok(&gen_args(stem_s, "17"));
    let idx = dir.path().join("ds.snni");
    let idx_s = idx.to_str().unwrap();
    ok(&["build", "--algo", "iterpca", "--dataset", stem_s, "--out", idx_s]);

    let report = ok(&["verify", "--check", "iterpca", "--dataset", stem_s, "--index", idx_s]);
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(parsed["pass"], true);

    // an absurdly strict angle multiplier turns the measured angles into
    // violations: the report says fail and the exit code is 1
    let out = snns(&[
        "verify", "--check", "iterpca", "--dataset", stem_s, "--index", idx_s, "--c-sin",
        "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let parsed: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("report still prints on failure");
    assert_eq!(parsed["pass"], false);

    // chi2 exits 0 and emits a machine-readable report
    let rep = ok(&[
        "verify", "--check", "chi2", "--d", "20", "--x", "3", "--samples", "20000", "--seed", "4",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&rep).unwrap();
    assert_eq!(parsed["pass"], true);
}

#[test]
fn tampered_dataset_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("ds");
    let stem_s = stem.to_str().unwrap();
    ok(&gen_args(stem_s, "19"));
    let idx = dir.path().join("ds.snni");
    let idx_s = idx.to_str().unwrap();
    ok(&["build", "--algo", "iterpca", "--dataset", stem_s, "--out", idx_s]);

    // flip one payload byte in the matrix file
    let bin = stem.with_extension("bin");
    let mut raw = fs::read(&bin).unwrap();
    let last = raw.len() - 1;
    raw[last] ^= 0x01;
    fs::write(&bin, &raw).unwrap();

    let out = snns(&["query", "--algo", "iterpca", "--dataset", stem_s, "--index", idx_s]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash"));
}

#[test]
fn bad_flags_exit_nonzero() {
    let out = snns(&["build", "--algo", "nope", "--dataset", "x", "--out", "y"]);
    assert!(!out.status.success());

    let out = snns(&["verify", "--check", "nope"]);
    assert!(!out.status.success());

    // clap rejects a gen call without --out
    let out = snns(&["gen", "--n", "10", "--d", "4", "--k", "1", "--eps", "0.3"]);
    assert!(!out.status.success());

    let out = snns(&["gen", "--n", "10", "--d", "4", "--k", "9", "--eps", "0.3", "--out", "/tmp/bad"]);
    assert!(!out.status.success(), "k >= d must be rejected");
}

#[test]
fn eval_emits_one_deterministic_csv() {
    let args = [
        "eval", "--n", "150", "--d", "48", "--k", "3", "--eps", "0.3", "--seeds", "2",
        "--queries", "4", "--algos", "scan,iterpca,pcatree", "--seed", "23",
    ];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "seed,algo,query_id,returned_id,planted_id,distance,correct,visits,micros");
    // 2 seeds × 3 algos × (1 sidecar + 4 extra) queries
    assert_eq!(lines.len(), 1 + 2 * 3 * 5);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 9);
        assert_eq!(cols[6], "true", "conforming eval should be all-correct: {line}");
    }
}

#[test]
fn timing_flag_fills_micros_without_breaking_shape() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("ds");
    let stem_s = stem.to_str().unwrap();
    ok(&gen_args(stem_s, "29"));
    let csv = ok(&["query", "--algo", "scan", "--dataset", stem_s, "--timing"]);
    let row = csv.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols.len(), 7);
    let _: u128 = cols[6].parse().expect("micros column is an integer");
}

#[test]
fn help_mentions_every_subcommand() {
    let out = snns(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["gen", "build", "query", "verify", "eval"] {
        assert!(text.contains(cmd), "--help must list {cmd}");
    }
    let _ = Path::new("unused");
}
