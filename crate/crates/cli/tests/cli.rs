use std::process::{Command, Output};

fn klein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klein")).args(args).env_remove("KLEIN_NUM_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn integrate_csv() {
    let o = klein(&["integrate", "--p", "0.5", "--y-end", "8"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["y", "phi1", "phi2", "dphi1", "dphi2", "H1", "H2"]);
    assert!(rows.len() > 10);
    let h1: Vec<f64> = rows.iter().map(|r| num(&r[5])).collect();
    assert!(h1.iter().all(|h| (h - h1[0]).abs() <= 1e-9));
    assert_eq!(num(&rows[0][0]), 0.0);
    assert_eq!(num(&rows.last().unwrap()[0]), 8.0);
}

#[test]
fn integrate_decay_orbit() {
    let o = klein(&["integrate", "--p", "0.8660254037844386", "--y-end", "10"]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&stdout(&o));
    let last = rows.last().unwrap();
    assert!(num(&last[1]).powi(2) + num(&last[2]).powi(2) < 1e-2);
}

#[test]
fn usage_errors() {
    assert_eq!(klein(&["integrate"]).status.code(), Some(1));
    assert_eq!(klein(&["integrate", "--p", "2"]).status.code(), Some(1));
    assert_eq!(klein(&["spectrum", "--grid", "100"]).status.code(), Some(1));
    assert_eq!(klein(&["find-p", "--ratio", "6/4"]).status.code(), Some(1));
    assert_eq!(klein(&["--help"]).status.code(), Some(0));
}

#[test]
fn periods_default_sweep() {
    let o = klein(&["periods"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["p", "Tu", "Tv", "R", "err"]);
    assert_eq!(rows.len(), 767);
    for r in &rows {
        assert!(num(&r[2]) > num(&r[1]));
        assert!((1.4795..=1.5088).contains(&num(&r[3])));
    }
}

#[test]
fn periods_single_extremal_point() {
    let o = klein(&["periods", "--p", "0.6123724356957945"]);
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0][1]) - 1.757_032_429_294_244_7).abs() < 1e-9);
    assert!((num(&rows[0][2]) - 2.649_223_537_545_627).abs() < 1e-9);
}

#[test]
fn svg_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("periods.svg");
    let o = klein(&["periods", "--p-step", "0.01", "--format", "svg", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.matches("<polyline").count() >= 3);
    assert!(stdout(&o).is_empty());
}

#[test]
fn output_is_deterministic() {
    let a = klein(&["periods", "--p-step", "0.005"]);
    let b = klein(&["periods", "--p-step", "0.005"]);
    assert_eq!(a.stdout, b.stdout);
    let t = Command::new(env!("CARGO_BIN_EXE_klein"))
        .args(["periods", "--p-step", "0.005"])
        .env("KLEIN_NUM_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, t.stdout);
}

#[test]
fn thread_variable_validation() {
    let o = Command::new(env!("CARGO_BIN_EXE_klein"))
        .args(["classify", "--p", "0.5"])
        .env("KLEIN_NUM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn find_p() {
    let o = klein(&["find-p", "--ratio", "3/2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in lines {
        let r: f64 = l.split_whitespace().find_map(|w| w.strip_prefix("R=")).unwrap().parse().unwrap();
        assert!((r - 1.5).abs() <= 1e-11);
        assert!(l.starts_with("p="));
    }
    assert_eq!(klein(&["find-p", "--ratio", "44/29"]).status.code(), Some(2));
}

#[test]
fn classify() {
    let o = klein(&["classify", "--p", "0.6123724356957945"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PeriodicAdmissible zeros=2 period_y=3.37150070962519"));
    let o = klein(&["classify", "--p", "0.3"]);
    assert!(stdout(&o).starts_with("QuasiPeriodic"));
}

#[test]
fn spectrum() {
    let o = klein(&["spectrum", "--metric", "flat:6.283185307179586", "--grid", "256"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("lambda1=1.0000000000 "));
    assert_eq!(out.lines().filter(|l| l.starts_with("k=")).count(), 5);
    let o = klein(&["spectrum", "--metric", "reconstructed:0.3", "--grid", "64"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_quick() {
    let o = klein(&["verify", "--quick", "--grid", "128"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    let fails: Vec<&str> = out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{out}");
    assert!(fails[0].contains("Tu(1e-4)"));
    assert!(out.lines().any(|l| l.starts_with("WARN")));
    assert!(out.lines().any(|l| l.starts_with("SKIP")));
}
