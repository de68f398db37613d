use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use guesssort::bench::{read_csv_from, CSV_HEADER};
use guesssort::record_file::RecordFile;

fn guesssort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guesssort"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sort_small_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    let output = dir.path().join("out.txt");
    fs::write(&input, "3\n1\n2\n").unwrap();
    let o = guesssort(&["sort", "--input", p(&input), "--output", p(&output), "--algo", "gf1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&output).unwrap(), "1\n2\n3\n");
}

#[test]
fn sort_rejects_nan_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "1\nnan\n2\n").unwrap();
    let o = guesssort(&["sort", "--input", p(&input), "--output", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn sort_parse_error_exit_2_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "# header\n1\n2\nthree\n").unwrap();
    let o = guesssort(&["sort", "--input", p(&input), "--output", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    let missing = guesssort(&["sort", "--input", p(&dir.path().join("nope")), "--output", "x"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn gf2_file_matches_quicksort_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("u.txt");
    let o = guesssort(&["gen", "--dist", "uniform", "--n", "16384", "--seed", "12", "--out", p(&data)]);
    assert_eq!(o.status.code(), Some(0));
    let mut outputs = Vec::new();
    for algo in ["quicksort", "gf1", "gf1-stat", "gf2", "gf2-stat"] {
        let out = dir.path().join(format!("{algo}.txt"));
        let o = guesssort(&[
            "sort", "--input", p(&data), "--output", p(&out), "--algo", algo, "--verify",
        ]);
        assert_eq!(o.status.code(), Some(0), "{algo}");
        outputs.push(fs::read(&out).unwrap());
    }
    for o in &outputs[1..] {
        assert_eq!(o, &outputs[0]);
    }
}

#[test]
fn gen_constant_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("c.txt");
    let o = guesssort(&["gen", "--dist", "constant", "--value", "7", "--n", "1", "--out", p(&one)]);
    assert_eq!(o.status.code(), Some(0));
    let f = RecordFile::read(&one).unwrap();
    assert_eq!(f.keys, [7.0]);
    let body: Vec<_> = fs::read_to_string(&one)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    assert_eq!(body, ["7"]);

    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let o = guesssort(&["gen", "--dist", "gaussian", "--sigma", "4", "--n", "500", "--seed", "9", "--out", p(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gen_default_bounds_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.txt");
    assert_eq!(guesssort(&["gen", "--n", "1000", "--out", p(&out)]).status.code(), Some(0));
    let f = RecordFile::read(&out).unwrap();
    assert!(f.comments.iter().any(|c| c == "params: lo=-20000000 hi=20000000 integer=false"));
    assert!(f.comments.iter().any(|c| c == "seed: 1"));
    assert!(f.keys.iter().all(|&x| (-2e7..2e7).contains(&x)));
}

#[test]
fn gen_invalid_spec_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    let o = guesssort(&["gen", "--dist", "gaussian", "--sigma", "0", "--n", "5", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    let o = guesssort(&["gen", "--dist", "weird", "--n", "5", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = guesssort(&["gen", "--dist", "clustered", "--n", "5", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = guesssort(&[
        "gen", "--dist", "clustered", "--centers", "-5,5", "--n", "50", "--out", p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bench_smoke_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = guesssort(&[
        "bench", "--algos", "quicksort,gf1,gf2", "--scales", "6,8", "--trials", "2", "--out", p(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("median elapsed"));
    assert!(stdout.contains("gf2-two-terminals / gf1-two-terminals at 2^8"));

    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_csv_from(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3 * 2 * 2);
}

#[test]
fn bench_empty_algo_list_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = guesssort(&["bench", "--algos", ",", "--scales", "6", "--out", p(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!csv.exists());
}

#[test]
fn stats_examples() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.txt");
    fs::write(&two, "0\n8\n").unwrap();
    let o = guesssort(&["stats", "--input", p(&two)]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("min: 0\n"), "{out}");
    assert!(out.contains("max: 8\n"));
    assert!(out.contains("mean: 4\n"));
    assert!(out.contains("sigma: 4\n"));

    let constant = dir.path().join("c.txt");
    fs::write(&constant, "2.5\n2.5\n2.5\n").unwrap();
    let out = String::from_utf8(guesssort(&["stats", "--input", p(&constant)]).stdout).unwrap();
    assert!(out.contains("sigma: 0\n"));
    assert!(out.contains("statistical_degenerate: true\n"));

    let nonfinite = dir.path().join("n.txt");
    fs::write(&nonfinite, "1\ninf\n").unwrap();
    assert_eq!(guesssort(&["stats", "--input", p(&nonfinite)]).status.code(), Some(3));
}

#[test]
fn stats_uniform_empty_box_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("u.txt");
    assert_eq!(
        guesssort(&["gen", "--n", "131072", "--seed", "4", "--out", p(&data)]).status.code(),
        Some(0)
    );
    let out = String::from_utf8(guesssort(&["stats", "--input", p(&data)]).stdout).unwrap();
    let frac: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("empty_box_fraction: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((frac - 0.368).abs() < 0.01, "{frac}");
}
