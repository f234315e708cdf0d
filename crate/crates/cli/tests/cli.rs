use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sobolev-dr"))
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> String {
    let prefix = format!("{key}: ");
    out.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in\n{out}"))
        .to_string()
}

#[test]
fn split_is_seed_deterministic() {
    let args = ["verify", "split", "--k", "1", "--samples", "100", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(field(&stdout(&a), "sample_count"), "100");
    let c = run(&["verify", "split", "--k", "1", "--samples", "100", "--seed", "8"]);
    assert_ne!(field(&stdout(&a), "derham_ratio"), field(&stdout(&c), "derham_ratio"));
}

#[test]
fn stokes_passes() {
    let o = run(&["verify", "stokes", "--k", "2", "--samples", "10", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn mollify_one_dimensional() {
    let o = run(&["verify", "mollify", "--n", "1", "--grid", "256", "--eps", "0.1", "--tol", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let r: f64 = field(&stdout(&o), "residual").parse().unwrap();
    assert!(r < 1e-3);
}

#[test]
fn mollify_tolerance_failure_exits_one() {
    let o = run(&["verify", "mollify", "--n", "1", "--grid", "16", "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(field(&stdout(&o), "pass"), "false");
}

#[test]
fn contract_suite() {
    let o = run(&["verify", "contract"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(field(&stdout(&o), "sphere3.obstructed"), "0 2");
}

#[test]
fn nontrivial_csv() {
    let dir = std::env::temp_dir().join(format!("sdr-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("sums.csv");
    let o = run(&["verify", "nontrivial", "--pk", "2", "--pk1", "4", "--eps", "1", "--trunc", "1e4", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "m,S_pk,S_pk1,tail_bound");
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("10000,"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn nontrivial_requires_increasing_pair() {
    let o = run(&["verify", "nontrivial", "--pk", "4", "--pk1", "2", "--trunc", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "nontrivial", "--trunc", "lots"]).status.code(), Some(2));
    assert_eq!(run(&["cohomology", "/nonexistent/complex.txt"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["norm", &data("square.txt"), "--cochain", &data("edges.txt")]).status.code(), Some(2));
}

#[test]
fn cohomology_of_circle_and_square() {
    let o = run(&["cohomology", &data("circle.txt")]);
    assert_eq!(field(&stdout(&o), "cohomology"), "1 1");
    let o = run(&["cohomology", &data("square.txt"), "--augment"]);
    assert_eq!(field(&stdout(&o), "cohomology"), "0 0 0 0");
}

#[test]
fn contract_exit_codes() {
    assert_eq!(run(&["contract", &data("square.txt"), "--augment"]).status.code(), Some(0));
    let o = run(&["contract", &data("circle.txt")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(field(&stdout(&o), "obstructed"), "0 1");
}

#[test]
fn whitney_then_derham_recovers_cochain() {
    let dir = std::env::temp_dir().join(format!("sdr-cli-w-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let form = dir.join("w.txt");
    let o = run(&["whitney", &data("square.txt"), "--cochain", &data("edges.txt"), "--normalized", "-o", form.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["derham", &data("square.txt"), "--form", form.to_str().unwrap()]);
    let out = stdout(&o);
    let body = out.split("\n\n").nth(1).expect("cochain after report");
    let mut entries: Vec<(String, f64)> = body
        .lines()
        .skip(1)
        .map(|l| {
            let (key, v) = l.rsplit_once(' ').unwrap();
            (key.to_string(), v.parse().unwrap())
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let expect = [("0 1", 1.0), ("0 2", 0.5), ("1 2", 2.0)];
    assert_eq!(entries.len(), 3);
    for ((k, v), (ek, ev)) in entries.iter().zip(expect) {
        assert_eq!(k, ek);
        assert!((v - ev).abs() < 1e-12);
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn validate_reports_edge_bounds() {
    let o = run(&["validate", &data("square.txt"), "--L", "2", "--N", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["validate", &data("square.txt"), "--L", "1.2", "--N", "6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn subdivide_round_trips_through_file() {
    let dir = std::env::temp_dir().join(format!("sdr-cli-s-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("sub.txt");
    let o = run(&["subdivide", &data("square.txt"), "-o", out.to_str().unwrap()]);
    assert_eq!(field(&stdout(&o), "top_simplices"), "12");
    let o = run(&["cohomology", out.to_str().unwrap(), "--augment"]);
    assert_eq!(field(&stdout(&o), "cohomology"), "0 0 0 0");
    std::fs::remove_dir_all(dir).ok();
}
