use std::fs;
use std::path::Path;
use std::process::Command;

use clap::Parser;
use torsion_noise::cli::{exit_code, Cli, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_IO, EXIT_OK};
use torsion_noise::pendulum::BOLTZMANN;
use torsion_noise::sim::TimeSeries;

/// Runs a command in-process, discarding its console summary.
fn run(args: &[&str]) -> i32 {
    let cli = Cli::try_parse_from(std::iter::once("torsion-noise").chain(args.iter().copied()))
        .unwrap();
    let mut sink = Vec::new();
    torsion_noise::cli::run(&cli, &mut sink).unwrap_or_else(|e| exit_code(&e))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_rows(file: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(file)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect()
}

const FREE_Q10: &str = "[pendulum]\nomega0 = 1.0\nq = 10.0\nstiffness = 1.0\n[sim]\ndt = 0.05\nn_steps = 1000000\nseed = 3\n";

#[test]
fn simulate_free_writes_angle_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let code = run(&["simulate", "--set", "sim.n_steps=2000", "--out", path(&out)]);
    assert_eq!(code, EXIT_OK);
    let mut names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["angle.txt", "run.toml"]);
    let ts = TimeSeries::from_text(&fs::read_to_string(out.join("angle.txt")).unwrap()).unwrap();
    assert_eq!(ts.len(), 2000);
    let sidecar = fs::read_to_string(out.join("run.toml")).unwrap();
    assert!(sidecar.contains(&format!("fingerprint = \"{}\"", ts.fingerprint())));
    assert!(sidecar.contains("seed = 1"));
}

#[test]
fn simulate_feedback_writes_angle_and_integrator_torque() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let code = run(&[
        "simulate",
        "--set", "pendulum.damping=10",
        "--set", "feedback.omega0_fb=1",
        "--set", "feedback.q_fb=0.5",
        "--set", "sim.n_steps=1000",
        "--set", "sim.format=binary",
        "--out", path(out),
    ]);
    assert_eq!(code, EXIT_OK);
    let torque = fs::read(out.join("integrator_torque.bin")).unwrap();
    let ts = TimeSeries::read_binary(torque.as_slice()).unwrap();
    assert_eq!(ts.len(), 1000);
    assert!(out.join("angle.bin").is_file());
}

#[test]
fn rerun_is_byte_identical_and_reproducible_from_header() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let args = |out: &Path| {
        run(&["simulate", "--seed", "99", "--set", "sim.n_steps=3000", "--set", "pendulum.q=4", "--set", "pendulum.omega0=2", "--out", path(out)])
    };
    assert_eq!(args(&a), EXIT_OK);
    assert_eq!(args(&b), EXIT_OK);
    let first = fs::read(a.join("angle.txt")).unwrap();
    assert_eq!(first, fs::read(b.join("angle.txt")).unwrap());

    let header_source = a.join("angle.txt");
    assert_eq!(run(&["simulate", "--config", path(&header_source), "--out", path(&c)]), EXIT_OK);
    assert_eq!(first, fs::read(c.join("angle.txt")).unwrap());
}

#[test]
fn ensemble_files_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let code = run(&[
            "simulate", "--set", "sim.n_records=5", "--set", "sim.n_steps=500",
            "--workers", workers, "--out", path(out),
        ]);
        assert_eq!(code, EXIT_OK);
    }
    for i in 0..5 {
        let name = format!("angle_{i:04}.txt");
        let x = fs::read_to_string(a.join(&name)).unwrap();
        let y = fs::read_to_string(b.join(&name)).unwrap();
        // Headers differ only in the echoed worker count.
        let strip = |s: &str| s.lines().filter(|l| !l.contains("sim.workers")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(&x), strip(&y));
    }
}

#[test]
fn analyze_free_run_passes_at_ten_percent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("free.toml");
    fs::write(&cfg, FREE_Q10).unwrap();
    let out = dir.path().join("run");
    assert_eq!(run(&["simulate", "--config", path(&cfg), "--out", path(&out)]), EXIT_OK);
    let code = run(&["analyze", "--config", path(&out.join("run.toml")), "--out", path(&out)]);
    assert_eq!(code, EXIT_OK);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["comparison"]["pass"], true);
    assert_eq!(report["report"]["comparison"]["tolerance"], 0.1);
    let psd = data_rows(&out.join("psd.tsv"));
    assert!(psd.iter().all(|r| r.len() == 3));
    let acf = data_rows(&out.join("autocorr.tsv"));
    let kt = BOLTZMANN * 300.0;
    assert!((acf[0][2] - kt).abs() < 1e-12 * kt);
    assert!((acf[0][1] / kt - 1.0).abs() < 0.1);

    // An impossible tolerance is reported as a failed check.
    let code = run(&[
        "analyze", "--config", path(&out.join("run.toml")),
        "--set", "analyze.tolerance=1e-6", "--out", path(&out),
    ]);
    assert_eq!(code, EXIT_CHECK_FAILED);
}

#[test]
fn analyze_rejects_series_from_another_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(&["simulate", "--set", "sim.n_steps=200000", "--out", path(out)]), EXIT_OK);
    let sidecar = out.join("run.toml");
    assert_eq!(run(&["analyze", "--config", path(&sidecar), "--out", path(out)]), EXIT_OK);
    let code = run(&[
        "analyze", "--config", path(&sidecar), "--set", "pendulum.damping=0.2", "--out", path(out),
    ]);
    assert_eq!(code, EXIT_INVALID);
    let code = run(&["analyze", "--config", path(&sidecar), "--seed", "2", "--out", path(out)]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn corrupt_header_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(&["simulate", "--set", "sim.n_steps=200", "--out", path(out)]), EXIT_OK);
    let text = fs::read_to_string(out.join("angle.txt")).unwrap();
    let bad: String = text
        .lines()
        .map(|l| if l.starts_with("# dt") { "# dt = fast" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let err = TimeSeries::from_text(&bad).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");

    let bin = env!("CARGO_BIN_EXE_torsion-noise");
    let bad_path = out.join("bad.txt");
    fs::write(&bad_path, bad).unwrap();
    let o = Command::new(bin)
        .args(["analyze", "--config", path(&out.join("run.toml"))])
        .arg("--set")
        .arg(format!("analyze.input={}", path(&bad_path)))
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn model_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let kt = BOLTZMANN * 300.0;

    // Peak of the Q = 10 density sits at the resonance, Q² above DC.
    let code = run(&[
        "model", "--set", "pendulum.omega0=1", "--set", "pendulum.q=10",
        "--set", "model.spacing=linear", "--set", "model.start=0",
        "--set", "model.stop=0.3183098861837907", "--set", "model.n_points=201",
        "--out", path(out),
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = data_rows(&out.join("model.tsv"));
    let dc = rows[0][1];
    let peak = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert_eq!(rows.iter().position(|r| r == peak), Some(100));
    assert!((peak[1] / (100.0 * dc) - 1.0).abs() < 1e-12);

    // Locked force density at f = 0 is 4kTγ/R².
    let code = run(&[
        "model", "--set", "pendulum.damping=10", "--set", "feedback.kappa=10",
        "--set", "feedback.beta=19", "--set", "model.kind=feedback_force_psd",
        "--set", "model.arm=2", "--set", "model.start=0", "--set", "model.spacing=linear",
        "--out", path(out),
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = data_rows(&out.join("model.tsv"));
    assert!((rows[0][1] / (4.0 * kt * 10.0 / 4.0) - 1.0).abs() < 1e-14);

    let code = run(&[
        "model", "--set", "pendulum.stiffness=2", "--set", "model.kind=free_angle_autocorr",
        "--out", path(out),
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = data_rows(&out.join("model.tsv"));
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] / (kt / 2.0) - 1.0).abs() < 1e-14);

    let code = run(&["model", "--set", "model.kind=feedback_force_psd", "--out", path(out)]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn plan_preset_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(&["plan", "--out", path(out)]), EXIT_OK);
    let text = fs::read_to_string(out.join("plan.txt")).unwrap();
    assert!(text.contains("wire stiffness α        = 1.1045e0 dyne·cm/rad"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("plan.json")).unwrap()).unwrap();
    let force = json["report"]["casimir"]["force"].as_f64().unwrap();
    let target = json["report"]["target"].as_f64().unwrap();
    assert!((force / 1.553_23e-6 - 1.0).abs() < 1e-4);
    assert!((target / 1.553_23e-7 - 1.0).abs() < 1e-4);
    assert_eq!(json["damping_table"].as_array().unwrap().len(), 2);

    assert_eq!(run(&["plan", "--set", "plan.accuracy=0", "--out", path(out)]), EXIT_INVALID);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[sim]\ndt = 0.05\nstepsize = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_torsion-noise"))
        .args(["simulate", "--config", path(&cfg), "--out", path(dir.path())])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stepsize"));

    fs::write(&cfg, "[sim]\ndt = 0.05\nn_steps = = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_torsion-noise"))
        .args(["simulate", "--config", path(&cfg)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn exit_codes_from_the_binary() {
    let bin = env!("CARGO_BIN_EXE_torsion-noise");
    let dir = tempfile::tempdir().unwrap();

    let o = Command::new(bin).arg("validate").output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().count() >= 10);
    // Residuals carry at least six significant digits.
    for line in stdout.lines() {
        assert!(line.starts_with("PASS"), "{line}");
        let residual = line.split("residual = ").nth(1).unwrap().split_whitespace().next().unwrap();
        let mantissa = residual.split('e').next().unwrap().replace(['.', '-'], "");
        assert!(mantissa.len() >= 6, "{residual}");
    }

    let o = Command::new(bin).args(["validate", "--inject-fault", "1e-4"]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_CHECK_FAILED));
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));

    let missing = dir.path().join("missing.toml");
    let o = Command::new(bin).args(["plan", "--config", path(&missing)]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_IO));

    let o = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    let o = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_OK));
}
