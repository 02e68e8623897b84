//! End-to-end behaviour of the `vemsurf` binary.

use std::process::{Command, Output};

fn vemsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vemsurf")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn single_level_is_a_configuration_error() {
    let o = vemsurf(&["--problem", "concus", "--targets", "1000", "-q"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invalid configuration"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_problem_fails() {
    let o = vemsurf(&["--problem", "helicoid", "--targets", "100,200", "-q"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("helicoid"));
}

#[test]
fn malformed_arguments_exit_with_one() {
    let o = vemsurf(&["--problem", "concus", "--targets", "100,abc"]);
    assert_eq!(o.status.code(), Some(1));
    let o = vemsurf(&["--problem", "concus", "--targets", "100,200", "--reference", "fine:1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = vemsurf(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study.csv");
    let o = vemsurf(&["--problem", "scherk", "--targets", "300,600", "--mode", "random", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    // progress goes to stderr
    assert!(!stderr(&o).is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mesh,h,N,it,e_h1,ecr_h1,e_l2,ecr_l2,c1,c2");
    assert_eq!(lines.len(), 3);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first.len(), 10);
    assert_eq!(first[0], "r-scherk_1");
    // no rate on the coarsest level
    assert!(first[5].is_empty() && first[7].is_empty());
    let second: Vec<&str> = lines[2].split(',').collect();
    let rate: f64 = second[5].parse().unwrap();
    assert!(rate > 0.5 && rate < 1.5, "{rate}");
}

#[test]
fn iteration_cap_exits_with_two() {
    let o = vemsurf(&["--problem", "concus", "--targets", "200,400", "--max-iter", "2", "-q"]);
    assert_eq!(o.status.code(), Some(2));
    let csv = String::from_utf8_lossy(&o.stdout);
    assert_eq!(csv.lines().count(), 3);
    assert!(stderr(&o).contains("iteration cap"));
}

#[test]
fn emit_surface_writes_solution_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let surf = dir.path().join("u.csv");
    let o = vemsurf(&["--problem", "disk", "--targets", "200,400", "--reference", "fine:4", "-q", "--emit-surface", surf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&surf).unwrap();
    assert!(text.starts_with("x,y,u\n"));
    assert!(dir.path().join("u.mesh").exists());
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_vemsurf"))
            .args(["--problem", "concus", "--targets", "300,600", "-q"])
            .env("VEM_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let three = run("3");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    let bad = run("zero");
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("VEM_THREADS"));
}
