use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn secrecy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secrecy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, command: &str, config: Option<&Path>, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(format!("{command}.csv"));
    let mut args = vec![
        command.to_string(),
        "--out".into(),
        out.display().to_string(),
    ];
    if let Some(c) = config {
        args.extend(["--config".into(), c.display().to_string()]);
    }
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    (secrecy(&refs), out)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[test]
fn capacity_of_bsc_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_in(dir.path(), "capacity", Some(&fixture("bsc.json")), &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let t = rows(&csv);
    assert_eq!(t[0], ["quantity", "value"]);
    assert_eq!(t[1][0], "capacity");
    assert!(t[1][1].starts_with("0.531004"));
    assert!((t[1][1].parse::<f64>().unwrap() - (1.0 - h2(0.1))).abs() < 1e-6);
    assert!((t[2][1].parse::<f64>().unwrap() - (1.0 - h2(0.2))).abs() < 1e-6);
    assert!(csv.with_extension("json").exists());
}

#[test]
fn gaussian_sweep_over_eve_distortion_is_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let extra = [
        "--set",
        "axis=de",
        "--set",
        "db=0.3",
        "--set",
        "from=0.02",
        "--set",
        "to=1.2",
        "--set",
        "points=25",
    ];
    let (o, csv) = run_in(dir.path(), "sweep", Some(&fixture("gaussian.json")), &extra);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let t = rows(&csv);
    assert_eq!(t[0], ["axis_value", "max_rl", "bound_kind"]);
    assert_eq!(t.len(), 26);
    let v: Vec<f64> = t[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{v:?}");
    assert!(t[1..].iter().all(|r| r[2] == "gaussian_exact"));
}

#[test]
fn verify_example_reports_the_three_rates() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_in(dir.path(), "verify-example", None, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap())
            .unwrap();
    let get = |k: &str| report[k].as_f64().unwrap();
    assert!((get("r_l_sep") - 0.16900).abs() < 2e-3);
    assert!((get("r_l_unc") - 0.19351).abs() < 2e-3);
    assert!((get("r_l_outer") - 0.19351).abs() < 2e-3);
    assert!(get("r_l_unc") > get("r_l_sep"));
    assert_eq!(report["passed"], true);
    // the shipped fixture is the same system
    let (o, _) = run_in(
        dir.path(),
        "verify-example",
        Some(&fixture("example.json")),
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bad_pmf_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("bsc.json"))
        .unwrap()
        .replace("[0.5, 0.5]", "[0.49, 0.49]");
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, text).unwrap();
    let (o, csv) = run_in(dir.path(), "capacity", Some(&spec), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pmf sum"));
    assert!(o.stdout.is_empty());
    assert!(!csv.exists());
}

#[test]
fn query_outside_region_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = fixture("gaussian.json");
    let inside = ["--set", "db=0.3", "--set", "de=0.1", "--set", "rl=1"];
    assert_eq!(
        run_in(dir.path(), "region", Some(&g), &inside)
            .0
            .status
            .code(),
        Some(0)
    );
    let outside = ["--set", "db=0.3", "--set", "de=0.1", "--set", "rl=5"];
    let (o, csv) = run_in(dir.path(), "region", Some(&g), &outside);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(rows(&csv)[1][5], "false");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bsc = fixture("bsc.json");
    assert_eq!(
        run_in(dir.path(), "rd", Some(&bsc), &[]).0.status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(
            dir.path(),
            "rd",
            Some(&bsc),
            &["--set", "d=0.1", "--set", "q=1"]
        )
        .0
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run_in(
            dir.path(),
            "gamma1",
            Some(&fixture("gaussian.json")),
            &["--set", "r=0.1"]
        )
        .0
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run_in(dir.path(), "capacity", None, &[]).0.status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(
            dir.path(),
            "region",
            Some(&bsc),
            &[
                "--set",
                "db=0.1",
                "--set",
                "de=0.1",
                "--set",
                "bound=gaussian_exact"
            ]
        )
        .0
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn identical_jobs_write_identical_files() {
    let example = fixture("example.json");
    let extra = [
        "--trials",
        "300",
        "--seed",
        "7",
        "--set",
        "m=10",
        "--set",
        "attacks=greedy_list@0.25,rd_codebook_ignore_z@0.25",
        "--set",
        "de=0.3",
    ];
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = ["1", "4"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let mut args = extra.to_vec();
            args.extend(["--threads", threads]);
            let (o, csv) = run_in(dir.path(), "simulate", Some(&example), &args);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&o.stderr)
            );
            (
                std::fs::read(&csv).unwrap(),
                std::fs::read(csv.with_extension("json")).unwrap(),
            )
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    let t = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(t.starts_with("attack,trials,mean_d_b,d_e_q10,d_e_q50,d_e_q90,success\n"));
    assert_eq!(t.lines().count(), 3);
}

#[test]
fn conditional_rate_routes_agree_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_in(
        dir.path(),
        "crd",
        Some(&fixture("example.json")),
        &["--set", "d=0.1,0.3,0.45"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for r in &rows(&csv)[1..] {
        let v: Vec<f64> = r.iter().map(|c| c.parse().unwrap()).collect();
        assert!((v[2] - v[3]).abs() < 1e-5, "{r:?}");
        // R_{S|Z}(D) = H2(0.1) - D H2(0.1/D) for erasure distortion with BSC(0.1) side information
        let d = v[0];
        let closed = if d >= 0.2 {
            h2(0.1) - d * h2(0.1 / d)
        } else {
            f64::NAN
        };
        if closed.is_finite() {
            assert!((v[1] - closed).abs() < 1e-5, "{d}: {} vs {closed}", v[1]);
        }
    }
}
