use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lj-homographic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn verify_circular_lennard_jones_at_two() {
    let out = run(&[
        "verify-circular",
        "--alpha",
        "6",
        "--beta",
        "12",
        "--n",
        "2",
        "--lambda",
        "2",
        "--family",
        "2N",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout_json(&out);
    // poles at the balance distance, so only the ring pair contributes
    let r0 = 2f64.powf(-5.0 / 6.0);
    let d = 3f64.sqrt() * r0;
    let w2 = 3.0 * 2f64.powi(-6) * d.powi(-8) - 6.0 * 2f64.powi(-12) * d.powi(-14);
    let omega0 = report["omega0"].as_f64().unwrap();
    assert!((omega0 - w2.sqrt()).abs() < 1e-12, "{omega0}");
    assert!((omega0 - 0.2379).abs() < 1e-4);
    assert!(report["report"]["residual_max"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["report"]["geometry"], "flat_nonplanar");
}

#[test]
fn lambda_below_two_is_a_domain_error() {
    let out = run(&["verify-circular", "--lambda", "1.5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("lambda"));
    assert!(out.stdout.is_empty());
}

#[test]
fn three_plus_n_below_lambda2_names_the_threshold() {
    let l2 =
        lj_homographic::find_lambda2(50, &lj_homographic::PotentialParams::new(1.0, 2.0).unwrap()).unwrap();
    assert!(l2 > 3.0);
    let out = run(&[
        "verify-circular",
        "--alpha",
        "1",
        "--beta",
        "2",
        "--n",
        "50",
        "--family",
        "3N",
        "--lambda",
        "3",
    ]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("lambda_2") && msg.contains(&l2.to_string()), "{msg}");
}

#[test]
fn thresholds_report_matches_library() {
    let params = lj_homographic::PotentialParams::lennard_jones();
    for n in ["2", "3"] {
        let out = run(&["thresholds", "--n", n]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let r = stdout_json(&out);
        let n: usize = n.parse().unwrap();
        let l0 = lj_homographic::find_lambda0(n, &params).unwrap();
        assert!((r["lambda0"]["value"].as_f64().unwrap() - l0).abs() <= 4.0 * f64::EPSILON * l0);
        assert_eq!(r["lambda0"]["admissible"], true);
        assert!(r["lambda0"]["capital_lambda"].as_f64().unwrap() > r["lambda0"]["rbar"].as_f64().unwrap());
        for (key, g) in [("lambda1", "g1"), ("lambda2", "g2")] {
            assert!(r[key]["value"].as_f64().unwrap() >= 2.0);
            assert!(r[key][g].as_f64().unwrap() >= r[key]["target"].as_f64().unwrap());
        }
    }
}

#[test]
fn sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--lambda-min",
        "2",
        "--lambda-max",
        "10",
        "--step",
        "0.1",
        "--n",
        "2",
        "--out",
    ];
    let out = run(&[&args[..], &[path.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&path);
    assert_eq!(
        header,
        [
            "lambda",
            "g1",
            "g2",
            "r0",
            "omega0_sq",
            "rbar",
            "capital_lambda",
            "admissible"
        ]
    );
    assert_eq!(rows.len(), 81);
    let col = |k: usize| {
        rows.iter()
            .map(|r| r[k].parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    assert!(col(4).iter().all(|&w| w >= 0.0));
    assert!(col(1).windows(2).all(|w| w[1] > w[0]));
    let lambdas = col(0);
    assert!((lambdas[80] - 10.0).abs() < 1e-12);

    let l0 = lj_homographic::find_lambda0(2, &lj_homographic::PotentialParams::lennard_jones()).unwrap();
    for (l, r) in lambdas.iter().zip(&rows) {
        if *l >= l0 {
            assert_eq!(r[7], "true", "lambda = {l}");
            assert!(!r[6].is_empty());
        }
    }
}

#[test]
fn sweep_output_is_byte_stable() {
    let args = [
        "sweep",
        "--lambda-min",
        "1.1",
        "--lambda-max",
        "4",
        "--step",
        "0.05",
        "--n",
        "3",
        "--exploratory",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    // below lambda = 2 some rows have no cap radius
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 8));
}

#[test]
fn radial_exit_tracks_reconstructed_residual() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radial.csv");
    let out = run(&[
        "radial",
        "--lambda",
        "10",
        "--n",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    let report = stdout_json(&out);
    let residual = report["report"]["residual_max"].as_f64().unwrap();
    assert_eq!(code(&out) == 0, residual < 1e-6, "{}", stderr(&out));
    let (header, rows) = csv_rows(&path);
    assert_eq!(header, ["t", "r", "r_dot", "omega"]);
    assert_eq!(rows.len(), 201);
    let (rmin, rmax) = (
        report["r_min"].as_f64().unwrap(),
        report["r_max"].as_f64().unwrap(),
    );
    for r in &rows {
        let radius: f64 = r[1].parse().unwrap();
        assert!(radius >= rmin * (1.0 - 1e-12) && radius <= rmax * (1.0 + 1e-12));
    }
}

#[test]
fn radial_energy_outside_window_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radial.csv");
    let out = run(&[
        "radial",
        "--lambda",
        "10",
        "--h",
        "1.0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("psi(rbar)") && msg.contains("psi(Lambda)"), "{msg}");
    assert!(!path.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn integrate_circular_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = run(&[
        "integrate",
        "--lambda",
        "2.5",
        "--n",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout_json(&out);
    assert!(report["deviation_max"].as_f64().unwrap() < 1e-6);
    let (header, rows) = csv_rows(&path);
    assert_eq!(header.len(), 5 + 3 * 4);
    assert_eq!(rows.len(), 101);
    let energy: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(energy
        .iter()
        .all(|e| (e - energy[0]).abs() < 1e-8 * energy[0].abs()));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"alpha": 6, "beta": 12, "n_ring": 2, "family": "2N", "lambda": 1.5}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&run(&["verify-circular", "--config", cfg])), 2);
    assert_eq!(
        code(&run(&["verify-circular", "--config", cfg, "--lambda", "2"])),
        0
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"lambda": 2, "colour": "red"}"#).unwrap();
    let out = run(&["verify-circular", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("config"));
}

#[test]
fn tolerance_overrides() {
    let strict = run(&[
        "verify-circular",
        "--lambda",
        "2",
        "--tol",
        "circular_residual=1e-30",
    ]);
    assert_eq!(code(&strict), 1);
    assert_eq!(stdout_json(&strict)["report"]["passed"], false);
    let unknown = run(&["verify-circular", "--lambda", "2", "--tol", "nonsense=1"]);
    assert_eq!(code(&unknown), 2);
    assert!(stderr(&unknown).contains("tol"));
}

#[test]
fn invalid_fields_are_named() {
    for (args, field) in [
        (
            &["verify-circular", "--lambda", "2", "--alpha", "12", "--beta", "6"][..],
            "alpha/beta",
        ),
        (&["verify-circular", "--lambda", "2", "--n", "1"][..], "n:"),
        (
            &["sweep", "--lambda-min", "3", "--lambda-max", "2", "--step", "0.1"][..],
            "lambda_max",
        ),
        (&["integrate", "--lambda", "2", "--t-end", "-1"][..], "t_end"),
        (&["radial", "--lambda", "10", "--family", "3N"][..], "family"),
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(stderr(&out).contains(field), "{args:?}: {}", stderr(&out));
    }
}
