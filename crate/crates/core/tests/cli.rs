use std::path::Path;
use std::process::{Command, Output};

use basdp::xadd::DiagramStore;

fn basdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_basdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr_line(o: &Output) -> String {
    let s = String::from_utf8_lossy(&o.stderr).to_string();
    assert_eq!(s.lines().count(), 1, "one error line: {:?}", s);
    s
}

#[test]
fn solve_writes_stats_and_diagrams() {
    let dir = tempfile::tempdir().unwrap();
    let o = basdp(&[
        "solve",
        "--domain",
        "mars1d",
        "--horizon",
        "3",
        "--eps-rel",
        "0.05",
        "--out",
        p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "h,nodes,partitions,eps_used,millis");
    assert_eq!(lines.len(), 4);
    for h in 0..=3 {
        assert!(dir.path().join(format!("V{}.xadd", h)).exists());
    }
}

#[test]
fn sweep_writes_one_directory_per_budget() {
    let dir = tempfile::tempdir().unwrap();
    let o = basdp(&[
        "solve",
        "--domain",
        "mars1d",
        "--horizon",
        "2",
        "--eps",
        "0,1",
        "--out",
        p(dir.path()),
    ]);
    assert!(o.status.success());
    assert!(dir.path().join("eps_0/V2.xadd").exists());
    assert!(dir.path().join("eps_1/V2.xadd").exists());
}

#[test]
fn compress_diff_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(basdp(&["solve", "--domain", "mars1d", "--horizon", "2", "--out", p(d)])
        .status
        .success());
    let v = d.join("V2.xadd");
    let same = d.join("same.xadd");
    assert!(basdp(&["compress", p(&v), "--eps", "0", "--out", p(&same)])
        .status
        .success());
    assert_eq!(std::fs::read(&v).unwrap(), std::fs::read(&same).unwrap());

    let small = d.join("small.xadd");
    let o = basdp(&["compress", p(&v), "--eps", "3", "--out", p(&small)]);
    assert!(o.status.success());
    let report = String::from_utf8(o.stdout).unwrap();
    let used: f64 = report
        .split_whitespace()
        .next()
        .unwrap()
        .trim_start_matches("eps_used=")
        .parse()
        .unwrap();
    assert!(used < 3.0);

    let o = basdp(&["diff", p(&v), p(&small)]);
    assert!(o.status.success());
    let printed: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    let mut s = DiagramStore::<f64>::new();
    let a = s.read_text(&std::fs::read_to_string(&v).unwrap()).unwrap();
    let b = s.read_text(&std::fs::read_to_string(&small).unwrap()).unwrap();
    let want = s.max_abs_diff(a, b).unwrap();
    assert!((printed - want).abs() <= 1e-9);
    assert!(printed <= used + 1e-6);
}

#[test]
fn sample_row_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(basdp(&["solve", "--domain", "mars1d", "--horizon", "2", "--out", p(d)])
        .status
        .success());
    let v = d.join("V2.xadd");
    let (a, b) = (d.join("a.csv"), d.join("b.csv"));
    for out in [&a, &b] {
        assert!(basdp(&["sample", p(&v), "--grid", "x=-100:100:401", "--out", p(out)])
            .status
            .success());
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,tp1,tp2,value");
    assert_eq!(text.lines().count(), 1 + 4 * 401);

    // a fixed boolean removes it from the enumeration
    let o = basdp(&["sample", p(&v), "--grid", "x=0:10:11", "--fix", "tp1=1"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1 + 2 * 11);

    let o = basdp(&["sample", p(&v), "--points", "5", "--seed", "9"]);
    let again = basdp(&["sample", p(&v), "--points", "5", "--seed", "9"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn eval_reports_value_and_action() {
    let o = basdp(&[
        "eval",
        "--domain",
        "mars1d",
        "--horizon",
        "1",
        "--state",
        "x=55,tp1=0,tp2=0",
    ]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out, "value 38\naction move\nparam a_x 0\nq 38\n");
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(basdp(&["solve", "--domain", "mars1d", "--horizon", "1", "--out", p(d)])
        .status
        .success());
    let v = d.join("V1.xadd");
    let dot = String::from_utf8(basdp(&["export", p(&v)]).stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    let case = String::from_utf8(basdp(&["export", p(&v), "--format", "case"]).stdout).unwrap();
    assert!(case.contains(" : "));
    let o = basdp(&["export", p(&v), "--format", "svg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let o = basdp(&["solve", "--nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr_line(&o).starts_with("error: usage:"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.hmdp");
    std::fs::write(&bad, "domain t\ncvariables { x in [0, 1] }\nreward = x * x;\n").unwrap();
    let o = basdp(&["solve", "--domain", p(&bad), "--horizon", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).contains("3:"));

    let broken = dir.path().join("broken.xadd");
    std::fs::write(&broken, "this is not a diagram\n").unwrap();
    let o = basdp(&["diff", p(&broken), p(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    stderr_line(&o);

    let o = basdp(&[
        "eval",
        "--domain",
        "mars1d",
        "--horizon",
        "1",
        "--state",
        "x=500,tp1=0,tp2=0",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = basdp(&["solve", "--domain", "mars1d", "--eps", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(basdp(&["--help"]).status.success());
}

#[test]
fn domain_prints_canonical_text() {
    let o = basdp(&["domain", "--domain", "inventory(2)"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        basdp::frontend::parse(&text).unwrap(),
        basdp::frontend::builtin_model("inventory2").unwrap()
    );
}
