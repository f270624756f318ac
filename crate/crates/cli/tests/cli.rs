use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cicsec::formats::read_csv;
use cicsec::hull::{convex_hull, hull_gap};

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cicsec")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(&std::fs::read_to_string(path).unwrap());
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn gauss_high_interference_endpoints() {
    let d = tempfile::tempdir().unwrap();
    let out = tmp(&d, "g.csv");
    ok(&["gauss-region", "--p1", "1", "--p2", "1", "--a", "3", "--b", "3", "--out", out.to_str().unwrap()]);
    let (r1, r2) = (column(&out, "r1"), column(&out, "r2"));
    let has = |x: f64, y: f64| r1.iter().zip(&r2).any(|(a, b)| (a - x).abs() <= 1e-5 && (b - y).abs() <= 1e-5);
    assert!(has(0.0, 0.5));
    assert!(has(0.5 * 17f64.log2(), 0.0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# cicsec gauss-region"));
}

#[test]
fn gauss_unit_gains_have_no_secrecy() {
    let d = tempfile::tempdir().unwrap();
    let out = tmp(&d, "g.csv");
    ok(&["gauss-region", "--a", "1", "--b", "1", "--p1", "1", "--p2", "1", "--out", out.to_str().unwrap()]);
    let e = column(&out, "r2e");
    assert!(!e.is_empty() && e.iter().all(|&v| v == 0.0));
}

#[test]
fn gauss_zero_power_has_no_r2() {
    let d = tempfile::tempdir().unwrap();
    for (a, b) in [("0.5", "1"), ("3", "3"), ("0.6", "-0.5")] {
        let out = tmp(&d, "g.csv");
        ok(&["gauss-region", "--a", a, "--b", b, "--p2", "0", "--out", out.to_str().unwrap()]);
        assert!(column(&out, "r2").iter().all(|&v| v == 0.0));
    }
}

#[test]
fn gauss_svg_and_reruns() {
    let d = tempfile::tempdir().unwrap();
    let (out, svg) = (tmp(&d, "g.csv"), tmp(&d, "g.svg"));
    let args = [
        "gauss-region", "--a", "0.5", "--b", "1", "--rho-steps", "101", "--beta-steps", "21",
        "--out", out.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ];
    ok(&args);
    let (c1, s1) = (std::fs::read(&out).unwrap(), std::fs::read(&svg).unwrap());
    ok(&args);
    assert_eq!(c1, std::fs::read(&out).unwrap());
    assert_eq!(s1, std::fs::read(&svg).unwrap());
    let s = String::from_utf8(s1).unwrap();
    assert!(s.starts_with("<svg") || s.starts_with("<?xml"));
    assert!(s.contains("width=\"800\"") && s.contains("height=\"600\""));
    assert!(s.contains("id=\"boundary-r2\"") && s.contains("id=\"boundary-r2e\""));
    assert!(s.trim_end().ends_with("</svg>"));
}

#[test]
fn gauss_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    let out = tmp(&d, "g.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["gauss-region", "--a", "x", "--b", "1", "--out", o]).status.code(), Some(2));
    assert_eq!(run(&["gauss-region", "--a", "1", "--b", "1", "--rho-steps", "1", "--out", o]).status.code(), Some(2));
    assert_eq!(run(&["gauss-region", "--a", "1", "--b", "1", "--hull", "--raw", "--out", o]).status.code(), Some(2));
    assert_eq!(run(&["gauss-region", "--a", "1", "--b", "1", "--p1", "-1", "--out", o]).status.code(), Some(1));
}

#[test]
fn dmc_region_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let out = tmp(&d, "r.csv");
    let args = [
        "dmc-region", "--channel", &fixture("degraded1.chan"), "--mode", "capaequi", "--samples", "300",
        "--grid", "2", "--seed", "5", "--out", out.to_str().unwrap(),
    ];
    ok(&args);
    let first = std::fs::read(&out).unwrap();
    ok(&args);
    assert_eq!(first, std::fs::read(&out).unwrap());
    let (header, rows) = read_csv(&String::from_utf8(first).unwrap());
    assert_eq!(header, ["r1", "r2", "r2e", "source"]);
    for r in rows {
        let r2: f64 = r[1].parse().unwrap();
        let r2e: f64 = r[2].parse().unwrap();
        assert!(r2e <= r2);
        assert_eq!(r[3].len(), 16);
    }
}

#[test]
fn dmc_degraded_mode_warns_when_the_condition_fails() {
    let d = tempfile::tempdir().unwrap();
    let out = tmp(&d, "r.csv");
    let o = ok(&[
        "dmc-region", "--channel", &fixture("counterexample.chan"), "--mode", "degraded1", "--samples", "100",
        "--grid", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(!column(&out, "r1").is_empty());
    let o = ok(&[
        "dmc-region", "--channel", &fixture("degraded1.chan"), "--mode", "degraded1", "--samples", "100",
        "--grid", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(!String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn dmc_no_secrecy_extra_row_is_redundant() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (tmp(&d, "a.csv"), tmp(&d, "b.csv"));
    let base = ["dmc-region", "--channel", &fixture("random.chan"), "--mode", "no-secrecy", "--samples", "3000"];
    ok(&[&base[..], &["--out", a.to_str().unwrap()]].concat());
    ok(&[&base[..], &["--extra-row", "--out", b.to_str().unwrap()]].concat());
    let pts = |p: &Path| {
        let (r1, r2, e) = (column(p, "r1"), column(p, "r2"), column(p, "r2e"));
        (0..r1.len()).map(|i| [r1[i], r2[i], e[i]]).collect::<Vec<_>>()
    };
    let (ha, hb) = (convex_hull(&pts(&a)), convex_hull(&pts(&b)));
    assert!(hull_gap(&ha, &hb) <= 1e-6);
    assert!((ha.measure - hb.measure).abs() <= 1e-6);
}

#[test]
fn dmc_rejects_bad_input() {
    let d = tempfile::tempdir().unwrap();
    let bad = tmp(&d, "bad.chan");
    std::fs::write(&bad, "var X1 1\nvar X2 2\nvar Y 2\nvar Z 1\np 0.5 0.5\np 0.7 0.7\n").unwrap();
    let out = tmp(&d, "r.csv");
    let o = run(&["dmc-region", "--channel", bad.to_str().unwrap(), "--mode", "capaequi", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1"));
    let o = run(&[
        "dmc-region", "--channel", &fixture("bc1.chan"), "--mode", "secrecy", "--extra-row", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["dmc-region", "--channel", &fixture("bc1.chan"), "--mode", "bogus", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn verdicts(chan: &str) -> Vec<(String, bool)> {
    let o = ok(&["check-degraded", "--channel", &fixture(chan)]);
    String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with(' '))
        .map(|l| {
            let (k, v) = l.split_once(": ").unwrap();
            (k.to_string(), v == "true")
        })
        .collect()
}

#[test]
fn check_degraded_fixtures() {
    let v = verdicts("degraded1.chan");
    assert_eq!(v[0], ("physical-1".to_string(), true));
    let v = verdicts("noisy.chan");
    assert!(!v[0].1 && v[2].1);
    assert!(verdicts("random.chan").iter().all(|(_, b)| !b));
    let o = ok(&["check-degraded", "--channel", &fixture("noisy.chan")]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("q(z|y=0,x1=0)"));
    assert_eq!(run(&["check-degraded", "--channel", "/nonexistent.chan"]).status.code(), Some(1));
}

fn sim(d: &tempfile::TempDir, extra: &[&str]) -> (Output, PathBuf) {
    let out = tmp(d, "s.csv");
    let base = ["simulate", "--channel", &fixture("binary.chan"), "--dist", &fixture("binary.dist")];
    let o = run(&[&base[..], extra, &["--out", out.to_str().unwrap()]].concat());
    (o, out)
}

#[test]
fn simulate_trivial_rates() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = sim(&d, &["--n", "4", "--rates", "0,0,0"]);
    assert!(o.status.success());
    assert_eq!(column(&out, "pe"), [0.0]);
    assert_eq!(column(&out, "equiv"), [0.0]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("pe=0.000000000"));
}

#[test]
fn simulate_error_falls_with_block_length() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = sim(&d, &["--n", "2,4,6,8", "--rates", "0,0,0.5", "--rt", "0", "--seed", "1"]);
    assert!(o.status.success());
    let pe = column(&out, "pe");
    assert_eq!(pe.len(), 4);
    assert!(pe.windows(2).all(|w| w[1] < w[0]), "{pe:?}");
    let first = std::fs::read(&out).unwrap();
    sim(&d, &["--n", "2,4,6,8", "--rates", "0,0,0.5", "--rt", "0", "--seed", "1"]);
    assert_eq!(first, std::fs::read(&out).unwrap());
}

#[test]
fn simulate_public_layer_has_low_equivocation() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = sim(&d, &["--n", "8", "--rates", "0,0.5,0", "--rt", "0", "--seed", "1"]);
    assert!(o.status.success());
    assert!(column(&out, "equiv")[0] <= 0.05);
}

#[test]
fn simulate_failures() {
    let d = tempfile::tempdir().unwrap();
    let out = tmp(&d, "s.csv");
    let o = run(&[
        "simulate", "--channel", &fixture("wiretap4.chan"), "--dist", &fixture("wiretap4.dist"), "--n", "12",
        "--rates", "0,0.5,1", "--rt", "0.5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("2^24 * 4^12") && err.contains("2^26"), "{err}");
    let (o, _) = sim(&d, &["--n", "4", "--rates", "0,0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = sim(&d, &["--n", "3", "--rates", "0,0.5,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fme_check_exit_codes() {
    let o = ok(&["fme-check", "--samples", "1000", "--seed", "2024"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 failures"));
    ok(&["fme-check", "--samples", "50", "--seed", "3", "--cards", "1,2,1,2,2,2"]);
    assert_eq!(run(&["fme-check", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(run(&["fme-check", "--cards", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn help_and_unknown_commands() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}
