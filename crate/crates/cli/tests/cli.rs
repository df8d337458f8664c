use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn simt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simt"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn simt_stdin(dir: &Path, args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_simt"))
        .current_dir(dir)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn synth(dir: &Path, name: &str, reorder: &str, n: &str, offset: &str) {
    ok(simt(
        dir,
        &[
            "synth", "--out-dir", name, "-n", n, "--offset", offset, "--vocab-size", "16", "--min-len", "3",
            "--max-len", "9", "--reorder", reorder, "--seed", "4",
        ],
    ));
}

#[test]
fn oracle_perturb_validate_pipeline_is_fully_valid() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "c", "final-to-second", "300", "0");
    let oracle = ok(simt(d, &["oracle", "--src", "c/src.txt", "--tgt", "c/tgt.txt", "--align", "c/align.txt"]));
    let stats = text(&oracle.stderr);
    assert!(stats.contains("invalid_programs\t0"), "{stats}");
    let perturbed = ok(simt_stdin(d, &["perturb", "--beta3", "0.15", "--seed", "9"], &oracle.stdout));
    assert_ne!(perturbed.stdout, oracle.stdout);
    let report = ok(simt_stdin(
        d,
        &["validate", "--src", "c/src.txt", "--tgt", "c/tgt.txt"],
        &perturbed.stdout,
    ));
    assert!(text(&report.stderr).contains("valid 300/300 (100.00%)"));
    // without a corpus only the boundaries are checked
    let report = ok(simt_stdin(d, &["validate"], &perturbed.stdout));
    assert!(text(&report.stderr).contains("(100.00%)"));
}

#[test]
fn wait_k_programs_lag_by_k_on_equal_lengths() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "c", "monotone", "100", "0");
    for k in ["1", "3"] {
        ok(simt(d, &["waitk", "--k", k, "--src", "c/src.txt", "--tgt", "c/tgt.txt", "--out", "w.txt"]));
        ok(simt(
            d,
            &["metrics", "--programs", "w.txt", "--src", "c/src.txt", "--tgt", "c/tgt.txt", "--out", "m.tsv"],
        ));
        let m = fs::read_to_string(d.join("m.tsv")).unwrap();
        assert!(m.starts_with("sentence\tDAL\tAL\tAP\n"));
        let mean: Vec<&str> = m.lines().last().unwrap().split('\t').collect();
        assert_eq!(mean[0], "mean");
        let al: f64 = mean[2].parse().unwrap();
        assert!((al - k.parse::<f64>().unwrap()).abs() < 1e-9, "{m}");
    }
}

#[test]
fn metrics_columns_follow_bleu_dal_al_ap() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "c", "final-to-second", "20", "0");
    ok(simt(d, &["oracle", "--src", "c/src.txt", "--tgt", "c/tgt.txt", "--align", "c/align.txt", "--out", "p.txt"]));
    let m = ok(simt(
        d,
        &["metrics", "--programs", "p.txt", "--src", "c/src.txt", "--tgt", "c/tgt.txt", "--hyp", "c/tgt.txt"],
    ));
    let m = text(&m.stdout);
    assert!(m.starts_with("sentence\tBLEU\tDAL\tAL\tAP\n"));
    assert!(m.lines().last().unwrap().starts_with("mean\t100.00\t"), "{m}");
}

#[test]
fn parallel_stages_match_serial_output() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    synth(d, "c", "final-to-second", "200", "0");
    let args = |jobs: &'static str| {
        vec!["oracle", "--src", "c/src.txt", "--tgt", "c/tgt.txt", "--align", "c/align.txt", "--jobs", jobs]
    };
    let one = ok(simt(d, &args("1")));
    let four = ok(simt(d, &args("4")));
    assert_eq!(one.stdout, four.stdout);
    fs::write(d.join("p.txt"), &one.stdout).unwrap();
    let metrics = |jobs: &str| {
        ok(simt(
            d,
            &["metrics", "--programs", "p.txt", "--src", "c/src.txt", "--tgt", "c/tgt.txt", "--jobs", jobs],
        ))
        .stdout
    };
    assert_eq!(metrics("1"), metrics("3"));
}

/// Synthesizes, trains, simulates and evaluates inside `dir`; returns every artifact.
fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    synth(dir, "train", "final-to-second", "150", "0");
    synth(dir, "dev", "final-to-second", "30", "1000000");
    ok(simt(
        dir,
        &[
            "train", "--src", "train/src.txt", "--tgt", "train/tgt.txt", "--align", "train/align.txt", "--dev-src",
            "dev/src.txt", "--dev-tgt", "dev/tgt.txt", "--dev-align", "dev/align.txt", "--epochs", "3", "--seed", "5",
            "--out", "bundle.json", "--history", "history.tsv",
        ],
    ));
    ok(simt(
        dir,
        &[
            "simulate", "--bundle", "bundle.json", "--src", "dev/src.txt", "--decoding", "sample", "--seed", "2",
            "--out", "sim.tsv",
        ],
    ));
    ok(simt(
        dir,
        &[
            "evaluate", "--bundle", "bundle.json", "--src", "dev/src.txt", "--tgt", "dev/tgt.txt", "--align",
            "dev/align.txt", "--jobs", "2", "--out", "eval.tsv", "--hyp-out", "hyp.txt",
        ],
    ));
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in fs::read_dir(&p).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let (fa, fb) = (pipeline(a.path()), pipeline(b.path()));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "bundle.json",
        "bundle.json.manifest.json",
        "sim.tsv",
        "sim.tsv.manifest.json",
        "eval.tsv",
        "eval.tsv.manifest.json",
        "hyp.txt",
        "history.tsv",
    ] {
        assert!(names.contains(&expected), "missing {expected} in {names:?}");
    }
    assert_eq!(fa, fb);

    let manifest: serde_json::Value =
        serde_json::from_slice(&fa.iter().find(|(n, _)| n == "bundle.json.manifest.json").unwrap().1).unwrap();
    assert_eq!(manifest["subcommand"], "train");
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["beta1"], 0.05);
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 6);

    // a different seed changes the sampled transcripts
    ok(simt(
        a.path(),
        &[
            "simulate", "--bundle", "bundle.json", "--src", "dev/src.txt", "--decoding", "sample", "--seed", "3",
            "--out", "sim3.tsv",
        ],
    ));
    assert_ne!(
        fs::read(a.path().join("sim3.tsv")).unwrap(),
        fs::read(a.path().join("sim.tsv")).unwrap()
    );
}

#[test]
fn simulate_playback_and_trace() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("s.txt"), "a b c\nd e\n").unwrap();
    fs::write(d.join("t.txt"), "A C B\nD E\n").unwrap();
    fs::write(d.join("a.txt"), "0-0 2-1 1-2\n0-0 1-1\n").unwrap();
    ok(simt(d, &["oracle", "--src", "s.txt", "--tgt", "t.txt", "--align", "a.txt", "--out", "p.txt"]));
    assert_eq!(fs::read_to_string(d.join("p.txt")).unwrap(), "RWRRWW\nRWRW\n");
    let tr = ok(simt(d, &["trace", "--programs", "p.txt", "--src", "s.txt", "--tgt", "t.txt"]));
    assert_eq!(
        text(&tr.stdout),
        "# 1 RWRRWW\n| a | b c |\n| A | C B |\n\n# 2 RWRW\n| d | e |\n| D | E |\n"
    );

    ok(simt(
        d,
        &[
            "train", "--src", "s.txt", "--tgt", "t.txt", "--programs", "p.txt", "--epochs", "1", "--out", "b.json",
        ],
    ));
    let sim = ok(simt(d, &["simulate", "--bundle", "b.json", "--src", "s.txt", "--programs", "p.txt"]));
    let sim = text(&sim.stdout);
    let rows: Vec<Vec<&str>> = sim.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "RWRRWW");
    assert_eq!(rows[0][1].split(' ').count(), 3);
    assert_eq!(rows[1][5], "playback");
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for args in [
        vec!["oracle", "--bogus"],
        vec!["metrics", "--programs", "p.txt"],
        vec!["perturb", "--beta3", "1.5"],
        vec!["waitk", "--k", "0", "--src", "s", "--tgt", "t"],
        vec!["frobnicate"],
    ] {
        let out = simt(d, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(simt(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn validation_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = simt_stdin(d, &["validate"], b"RW\nWR\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("valid 1/2 (50.00%)"));
    assert_eq!(text(&out.stdout).lines().nth(2).unwrap(), "2\t0\t1\t0\t1\t1");

    fs::write(d.join("s.txt"), "a b\n").unwrap();
    fs::write(d.join("t.txt"), "A B\n").unwrap();
    fs::write(d.join("p.txt"), "RWW\n").unwrap();
    let out = simt(d, &["metrics", "--programs", "p.txt", "--src", "s.txt", "--tgt", "t.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("line 1"));
}
