use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_edgeworth"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = bin().args(args).output().expect("binary runs");
    (
        o.status.code().expect("exit code"),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

#[test]
fn verify_json_lines() {
    let (code, out, _) = run(&["verify", "--n-range", "2..20", "--jobs", "2"]);
    assert_eq!(code, 0);
    let lines: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 19);
    for (i, v) in lines.iter().enumerate() {
        let obj = v.as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "argmin",
                "matches",
                "n",
                "sign_changes",
                "target",
                "unimodal"
            ]
        );
        assert_eq!(obj["n"], i as u64 + 2);
        assert_eq!(obj["argmin"], obj["target"]);
    }
    assert_eq!(lines[1]["argmin"], 2);
    assert_eq!(lines[1]["sign_changes"], serde_json::json!([2]));
}

#[test]
fn verify_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let (code, out, _) = run(&[
        "verify",
        "--n-max",
        "30",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,argmin,target,unimodal,matches,sign_changes")
    );
    assert_eq!(lines.clone().count(), 29);
    assert!(text.contains("\n30,20,20,true,true,20\n"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["verify", "--n-max", "1"]).0, 2);
    assert_eq!(run(&["verify", "--n-range", "9..3"]).0, 2);
    assert_eq!(run(&["verify"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["scan", "--n", "10", "--grid-points", "1"]).0, 2);
    assert_eq!(
        run(&["residual", "--dist", "cauchy", "--k", "2", "--n-list", "10"]).0,
        2
    );
    assert_eq!(
        run(&["residual", "--dist", "poisson1", "--k", "9", "--n-list", "10"]).0,
        2
    );
    assert_eq!(
        run(&["poisson", "--m-max", "5", "--precision-bits", "32"]).0,
        2
    );
    let (code, _, err) = run(&["scan", "--n", "5", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot write"));
}

#[test]
fn help_and_version_exit_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["verify", "scan", "residual", "poisson"] {
        assert!(out.contains(sub));
    }
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn scan_csv_shape() {
    let (code, out, _) = run(&["scan", "--n", "10", "--grid-points", "99"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("p,cdf_le,cdf_lt,rp_approx,rp_residual"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // 99 grid points, 9 of them on m/10, plus two rows per jump
    assert_eq!(rows.len(), 90 + 18);
    for r in &rows {
        assert_eq!(r.len(), 5);
        assert!(r[0].contains('/'));
        let le: f64 = r[1].parse().unwrap();
        let lt: f64 = r[2].parse().unwrap();
        assert!(lt <= le && le <= 1.0 && lt >= 0.0);
    }
    let at: Vec<_> = rows.iter().filter(|r| r[0] == "1/2").collect();
    assert_eq!(at.len(), 2);
    assert_eq!(at[0][1], at[0][2]);
    let q5: f64 = at[1][1].parse().unwrap();
    assert!((q5 - 638.0 / 1024.0).abs() < 1e-15);
}

#[test]
fn residual_reports_slope() {
    let (code, out, err) = run(&[
        "residual",
        "--dist",
        "bernoulli:1/2",
        "--k",
        "1",
        "--n-list",
        "256,1024,4096",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
    let slope: f64 = err
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .expect("slope printed");
    assert!((slope + 1.0).abs() < 0.1, "{err}");

    let (code, _, err) = run(&[
        "residual",
        "--dist",
        "bernoulli:1/2",
        "--k",
        "1",
        "--n-list",
        "64,128",
    ]);
    assert_eq!(code, 0);
    assert!(err.contains("warning"));
}

#[test]
fn residual_at_mean_needs_integer_mean() {
    let (code, _, _) = run(&[
        "residual",
        "--dist",
        "bernoulli:1/3",
        "--k",
        "3",
        "--n-list",
        "10",
        "--at-mean",
    ]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&[
        "residual",
        "--dist",
        "bernoulli:1/3",
        "--k",
        "3",
        "--n-list",
        "300,3000",
        "--at-mean",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn poisson_certifies_small_range() {
    let (code, out, _) = run(&["poisson", "--m-max", "100"]);
    assert_eq!(code, 0);
    assert!(out.contains("0 violated, 0 uncertified"));
    let o = bin()
        .args(["poisson", "--m-max", "10"])
        .env("EDGEWORTH_PRECISION_BITS", "128")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("128 bits"));
}
