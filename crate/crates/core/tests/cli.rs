use std::path::Path;
use std::process::{Command, Output};

use asep_core::tracy_widom::{f_gue, QuadratureSpec};

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asep-lab"))
        .args(args)
        .env("ASEP_LAB_OUT", out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&[], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn hecke_verify_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &[
            "hecke-verify",
            "--S",
            "1",
            "--R",
            "1",
            "--M",
            "1",
            "--Q",
            "0.5",
            "--t",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rec["deviation"].as_f64().unwrap() <= 1e-9);
    assert_eq!(rec["passed"], true);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "hecke-verify");
    assert!(manifest["version"].is_string() && manifest["git_describe"].is_string());
}

#[test]
fn hecke_verify_reports_failure_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "hecke-verify",
        "--S",
        "1",
        "--R",
        "1",
        "--M",
        "2",
        "--Q",
        "0.5",
        "--t",
        "0.1,1,5",
        "--tolerance",
        "0",
    ];
    let o = lab(&args, dir.path());
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}

#[test]
fn tw_table_example() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "tw-table", "--alpha", "0.5", "--c-min", "-4", "--c-max", "4", "--step", "0.5",
    ];
    let o = lab(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = read(&dir.path().join("tw_profile.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("c,predicted"));
    let quad = QuadratureSpec::default();
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (c, v) = l.split_once(',').unwrap();
            (c.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 17);
    for (c, v) in rows {
        assert!((v - (1.0 - f_gue(c / 2.0, &quad).unwrap())).abs() < 1e-12);
    }
    assert!(read(&dir.path().join("tw_cdf.csv")).starts_with("s,F_GUE\n"));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        lab(
            &[
                "mix-exact",
                "--N",
                "6",
                "--k",
                "6",
                "--Q",
                "0.5",
                "--c",
                "0"
            ],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        lab(
            &["mix-exact", "--N", "6", "--k", "3", "--c", "0"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(lab(&["no-such-command"], dir.path()).status.code(), Some(1));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "mix-mc", "--N", "8", "--k", "4", "--Q", "0.5", "--c", "-2,0,2", "--reps", "300", "--seed",
        "9",
    ];
    let run = |dir: &Path, threads: &str| {
        let mut v = args.to_vec();
        v.extend(["--threads", threads]);
        assert_eq!(lab(&v, dir).status.code(), Some(0));
        read(&dir.join("tv_curve.csv"))
    };
    let one = run(a.path(), "1");
    assert_eq!(one, run(b.path(), "3"));
    assert!(one.starts_with("c,t,lower,lower_se,upper,upper_se,exact,predicted\n"));
}

#[test]
fn config_file_mirrors_flags_and_out_overrides_env() {
    let env_dir = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let cfg = out_dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"N": 8, "k": 4, "Q": 0.5, "c": [-1, 1], "reps": 50, "seed": 4}"#,
    )
    .unwrap();
    let o = lab(
        &[
            "profile",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.path().to_str().unwrap(),
        ],
        env_dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "tv_curve.csv",
        "profile.csv",
        "event_b.csv",
        "report.json",
        "manifest.json",
    ] {
        assert!(out_dir.path().join(f).exists(), "{f}");
    }
    assert!(!env_dir.path().join("manifest.json").exists());
    let profile = read(&out_dir.path().join("profile.csv"));
    assert!(profile.starts_with("c,empirical,predicted,gap\n"));
    assert_eq!(profile.lines().count(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out_dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 4);
}

#[test]
fn identity_and_hitting_tables() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "identity-mc",
        "--S",
        "1",
        "--R",
        "1",
        "--M",
        "1",
        "--t",
        "0.5",
        "--x",
        "-1",
        "--y",
        "1",
        "--Q",
        "0.5",
    ];
    let o = lab(
        &[&args[..], &["--reps", "2000", "--seed", "1"]].concat(),
        dir.path(),
    );
    assert!(matches!(o.status.code(), Some(0) | Some(2)));
    assert!(read(&dir.path().join("identity.csv")).starts_with("lhs,lhs_se,rhs,rhs_se\n"));
    let o = lab(
        &[
            "hitting", "--N", "6", "--k", "3", "--p", "1", "--reps", "20",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&dir.path().join("hitting.csv")).lines().count(), 21);
}
