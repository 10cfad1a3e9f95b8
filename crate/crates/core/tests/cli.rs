use std::path::PathBuf;
use std::process::Command;

use permkit::cli::run;
use permkit::perm::parse_perm_set;
use serde_json::Value;
use tempfile::TempDir;

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let f = Files {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write("ex1.csv", "x\n1\n2\n-0.5\n0.3\n");
        f.write("high.csv", "x\n-0.5\n0.3\n1\n2\n");
        f.write("S.txt", "# example set\n1 2 3 4\n3 4 1 2\n4 3 2 1\n");
        f.write("bad.txt", "1 2 3 4\n3 3 1 2\n");
        f.write("klein.txt", "2 1 4 3\n3 4 1 2\n");
        f.write("cycle.txt", "2 3 4 1\n");
        f.write("empty.txt", "# nothing\n");
        f.write("q.txt", "2.0  1 2 3 4\n1.0  3 4 1 2\n1.0  4 3 2 1\n");
        f.write("three.csv", "x\n1\n2\n3\n");
        f.write("pairs.csv", "x,y,group\n1,1,1\n2,3,1\n3,2,0\n4,4,0\n");
        f
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.dir.path().join(name), text).unwrap();
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

fn args(v: &[&str]) -> Vec<String> {
    std::iter::once("permkit")
        .chain(v.iter().copied())
        .map(String::from)
        .collect()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn corrected_subset_reports_an_anchor_value() {
    let f = Files::new();
    let out = run(args(&[
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "corrected-subset",
        "--perms",
        &f.path("S.txt"),
        "--seed",
        "7",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    let p = v["p_value"].as_f64().unwrap();
    let anchor: Vec<u64> = v["anchor"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_u64().unwrap())
        .collect();
    let expected = if anchor == [1, 2, 3, 4] {
        1.0 / 3.0
    } else {
        2.0 / 3.0
    };
    assert!((p - expected).abs() < 1e-15, "{p} for anchor {anchor:?}");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["method"], "exhaustive-q");
    assert_eq!(v["config"]["method"], "corrected-subset");
    assert_eq!(v["support_size"], 3);
}

#[test]
fn naive_warns() {
    let f = Files::new();
    let out = run(args(&[
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "naive-subset",
        "--perms",
        &f.path("S.txt"),
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    assert!((v["p_value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!(v["warning"].as_str().unwrap().contains("NOT guaranteed"));
}

#[test]
fn malformed_permutation_exits_2() {
    let f = Files::new();
    let out = run(args(&[
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "naive",
        "--perms",
        &f.path("bad.txt"),
    ]));
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("not a bijection"), "{}", out.stderr);
    assert!(out.stderr.contains("bad.txt:2"), "{}", out.stderr);
}

#[test]
fn input_errors_exit_2() {
    let f = Files::new();
    let cases: Vec<Vec<String>> = vec![
        // no source
        args(&[
            "test",
            "--data",
            &f.path("ex1.csv"),
            "--stat",
            "sum-first-k:2",
            "--method",
            "naive",
        ]),
        // two sources
        args(&[
            "test",
            "--data",
            &f.path("ex1.csv"),
            "--stat",
            "sum-first-k:2",
            "--method",
            "naive",
            "--perms",
            &f.path("S.txt"),
            "--dist",
            &f.path("q.txt"),
        ]),
        // randomized without a seed
        args(&[
            "test",
            "--data",
            &f.path("ex1.csv"),
            "--stat",
            "sum-first-k:2",
            "--method",
            "sampled-iid",
            "--perms",
            &f.path("S.txt"),
        ]),
        // dimension mismatch
        args(&[
            "test",
            "--data",
            &f.path("three.csv"),
            "--stat",
            "sum-first-k:2",
            "--method",
            "naive",
            "--perms",
            &f.path("cycle.txt"),
        ]),
        args(&[
            "test",
            "--data",
            &f.path("missing.csv"),
            "--stat",
            "sum-first-k:2",
            "--method",
            "naive",
            "--perms",
            &f.path("S.txt"),
        ]),
        args(&[
            "test",
            "--data",
            &f.path("ex1.csv"),
            "--stat",
            "abs-corr",
            "--method",
            "naive",
            "--perms",
            &f.path("S.txt"),
        ]),
        args(&[
            "test",
            "--data",
            &f.path("ex1.csv"),
            "--stat",
            "sum-first-k:2",
            "--method",
            "bogus",
            "--perms",
            &f.path("S.txt"),
        ]),
    ];
    for a in cases {
        let out = run(a.clone());
        assert_eq!(out.code, 2, "{a:?}: {}", out.stderr);
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn group_listings() {
    let f = Files::new();
    let out = run(args(&["group", "--generators", &f.path("klein.txt")]));
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "1 2 3 4\n2 1 4 3\n3 4 1 2\n4 3 2 1\n");

    let out = run(args(&[
        "group",
        "--generators",
        &f.path("empty.txt"),
        "--n",
        "4",
    ]));
    assert_eq!(out.stdout, "1 2 3 4\n");

    let out = run(args(&["group", "--generators", &f.path("cycle.txt")]));
    assert_eq!(out.stdout.lines().count(), 4);
    let set = parse_perm_set(&out.stdout, "stdout").unwrap();
    assert_eq!(permkit::perm::format_perm_set(&set), out.stdout);

    let out = run(args(&[
        "group",
        "--generators",
        &f.path("cycle.txt"),
        "--cap",
        "3",
    ]));
    assert_eq!(out.code, 3);

    let out = run(args(&["group", "--generators", &f.path("empty.txt")]));
    assert_eq!(out.code, 2);
}

#[test]
fn generated_group_file_feeds_tests() {
    let f = Files::new();
    let out = run(args(&["group", "--generators", &f.path("klein.txt")]));
    f.write("G.txt", &out.stdout);
    let naive = run(args(&[
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "naive",
        "--perms",
        &f.path("G.txt"),
    ]));
    let gen = run(args(&[
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "corrected-subset",
        "--generators",
        &f.path("klein.txt"),
        "--seed",
        "1",
    ]));
    assert_eq!(json(&naive.stdout)["p_value"], json(&gen.stdout)["p_value"]);
}

#[test]
fn exact_laws() {
    let f = Files::new();
    let cases = [
        ("naive-subset", r#"{"1/3":"1/2","1/1":"1/2"}"#, false),
        (
            "corrected-subset",
            r#"{"1/3":"1/6","2/3":"1/3","1/1":"1/2"}"#,
            true,
        ),
        ("pbar-exhaustive", r#"{"5/9":"1/2","1/1":"1/2"}"#, true),
    ];
    for (method, atoms, pass) in cases {
        let out = run(args(&[
            "exact",
            "--values",
            "1 2 -0.5 0.3",
            "--stat",
            "sum-first-k:2",
            "--method",
            method,
            "--perms",
            &f.path("S.txt"),
        ]));
        assert_eq!(out.code, 0, "{}", out.stderr);
        let v = json(&out.stdout);
        assert_eq!(v["atoms"], json(atoms), "{method}");
        assert_eq!(v["audit"]["pass"], pass, "{method}");
        let first = out
            .stdout
            .find("\"1/3\":")
            .or(out.stdout.find("\"5/9\":"))
            .unwrap();
        assert!(first < out.stdout.find("\"1/1\":").unwrap(), "atoms ascend");
    }
    let out = run(args(&[
        "exact",
        "--values",
        "1 2 -0.5 0.3",
        "--stat",
        "sum-first-k:2",
        "--method",
        "evalue",
        "--perms",
        &f.path("S.txt"),
        "--M",
        "1",
    ]));
    assert!(json(&out.stdout)["expectation"].as_f64().unwrap() <= 1.0 + 1e-12);

    let out = run(args(&[
        "exact",
        "--values",
        "1 2 3 4 5 6 7 8 9",
        "--stat",
        "sum-first-k:2",
        "--method",
        "naive",
        "--perms",
        "full",
    ]));
    assert_eq!(out.code, 3, "{}", out.stderr);
}

#[test]
fn calibrate_rows() {
    let f = Files::new();
    let out = run(args(&[
        "calibrate",
        "--stat",
        "sum-first-k:2",
        "--method",
        "naive-subset",
        "--perms",
        &f.path("S.txt"),
        "--seed",
        "1",
        "--reps",
        "20000",
        "--alphas",
        "1/3,1",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "alpha,rate,stderr,bound,factor");
    let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 0.5).abs() < 0.02 && row[1] > row[3], "{row:?}");
    assert_eq!(lines[2], "1,1,0,1,1");

    let out = run(args(&[
        "calibrate",
        "--stat",
        "sum-first-k:2",
        "--method",
        "corrected-subset",
        "--perms",
        &f.path("S.txt"),
        "--seed",
        "1",
        "--reps",
        "20000",
        "--alphas",
        "1.0",
    ]));
    assert_eq!(out.stdout, "alpha,rate,stderr,bound,factor\n1,1,0,1,1\n");

    let out = run(args(&[
        "calibrate",
        "--stat",
        "sum-first-k:2",
        "--method",
        "sampled-iid",
        "--perms",
        "full",
        "--seed",
        "1",
        "--reps",
        "100",
        "--M",
        "9",
    ]));
    assert_eq!(out.code, 2, "full needs --n");
}

#[test]
fn covariates_and_masks_come_from_the_data_file() {
    let f = Files::new();
    let out = run(args(&[
        "test",
        "--data",
        &f.path("pairs.csv"),
        "--stat",
        "abs-corr",
        "--method",
        "naive",
        "--perms",
        "full",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!((json(&out.stdout)["statistic_value"].as_f64().unwrap() - 0.8).abs() < 1e-12);

    let out = run(args(&[
        "test",
        "--data",
        &f.path("pairs.csv"),
        "--stat",
        "diff-means",
        "--method",
        "sampled-iid",
        "--perms",
        "full",
        "--M",
        "99",
        "--seed",
        "4",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(json(&out.stdout)["statistic_value"], -2.0);

    f.write("mask.txt", "1 0 1 0\n");
    let out = run(args(&[
        "test",
        "--data",
        &f.path("pairs.csv"),
        "--stat",
        &format!("diff-means:{}", f.path("mask.txt")),
        "--method",
        "naive",
        "--perms",
        "full",
    ]));
    assert_eq!(json(&out.stdout)["statistic_value"], -1.0);
}

#[test]
fn randomization_and_bc() {
    let f = Files::new();
    let out = run(args(&[
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "randomization",
        "--perms",
        &f.path("S.txt"),
        "--assigned",
        "1 2 3 4",
    ]));
    assert!((json(&out.stdout)["p_value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let out = run(args(&[
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "randomization",
        "--perms",
        &f.path("S.txt"),
        "--assigned",
        "2 1 3 4",
    ]));
    assert_eq!(out.code, 2);

    let out = run(args(&[
        "bc",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--dist",
        &f.path("q.txt"),
        "--M",
        "19",
        "--steps",
        "3",
        "--seed",
        "5",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    assert_eq!(v["method"], "besag-clifford");
    assert_eq!(v["steps"], 3);
    assert_eq!(v["weight_sum"], 4.0);
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_permkit"))
}

#[test]
fn binary_is_byte_reproducible() {
    let f = Files::new();
    let a = [
        "test",
        "--data",
        &f.path("ex1.csv"),
        "--stat",
        "sum-first-k:2",
        "--method",
        "sampled-iid",
        "--perms",
        &f.path("S.txt"),
        "--M",
        "50",
        "--seed",
        "11",
    ];
    let one = Command::new(bin()).args(a).output().unwrap();
    let two = Command::new(bin()).args(a).output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(String::from_utf8(one.stdout).unwrap(), run(args(&a)).stdout);

    let c = [
        "calibrate",
        "--stat",
        "sum-first-k:2",
        "--method",
        "pbar-sampled",
        "--dist",
        &f.path("q.txt"),
        "--M",
        "4",
        "--seed",
        "2",
        "--reps",
        "3000",
    ];
    let one = Command::new(bin()).args(c).output().unwrap();
    let two = Command::new(bin()).args(c).output().unwrap();
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn binary_exit_codes() {
    let f = Files::new();
    let out = Command::new(bin())
        .args([
            "test",
            "--data",
            &f.path("ex1.csv"),
            "--stat",
            "sum-first-k:2",
            "--method",
            "naive",
            "--perms",
            &f.path("bad.txt"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a bijection"));

    let out = Command::new(bin())
        .args(["group", "--generators", &f.path("cycle.txt"), "--cap", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = Command::new(bin()).arg("--version").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
