use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tumor-thermo"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_config_accepts_minimal_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.conf", "t_final = 1\n[grid]\ncells = 16\n");
    let o = run(&["check-config", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok dim=1 cells=16"));
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.conf",
        "t_final = 1\n[grid]\ncells = 16\n[model]\nvascular_nutrient = 2\n",
    );
    let o = run(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error kind=validation msg=\""), "{err}");
    assert_eq!(err.lines().count(), 1);

    let cfg = write(
        dir.path(),
        "typo.conf",
        "t_final = 1\n[grid]\ncells = 16\nspacing = 3\n",
    );
    let o = run(&["check-config", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let o = run(&["run", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_files_exit_3() {
    let o = run(&["check-config", "--config", "/nonexistent/case.conf"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error kind=io"));
}

#[test]
fn solver_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "hard.conf",
        "t_final = 0.01\n[grid]\ncells = 16\n[controls]\nnewton_tol = 1e-300\nnewton_max = 1\n",
    );
    let o = run(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error kind=solver"));
}

#[test]
fn zero_step_run_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.conf", "t_final = 0\n[grid]\ncells = 8\n");
    let out = dir.path().join("o");
    let o = run(&[
        "run",
        "--quiet",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("step,t,dt_used,E,S,"));
    assert!(out.join("snapshot_final.txt").exists());
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn rest_state_rows_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.conf",
        "t_final = 0.01\n[grid]\ncells = 8 8\n[initial]\npreset = rest\n[controls]\ndt = 1e-3\n",
    );
    let out = dir.path().join("o");
    let o = run(&[
        "run",
        "--quiet",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        // everything but step and t is the same on every row
        assert_eq!(r[2..], rows[0][2..]);
    }
}

#[test]
fn overrides_and_snapshot_restart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.conf",
        "t_final = 1\n[grid]\ncells = 32\n[output]\nsnapshot_stride = 5\n",
    );
    let out = dir.path().join("first");
    let o = run(&[
        "run",
        "--quiet",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--tmax",
        "0.02",
        "--dt",
        "2e-3",
        "--cells",
        "16",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    for name in [
        "snapshot_000000.txt",
        "snapshot_000005.txt",
        "snapshot_000010.txt",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    let snap = std::fs::read_to_string(out.join("snapshot_final.txt")).unwrap();
    assert!(snap.contains("cells 16\n"));

    let restart = write(
        dir.path(),
        "restart.conf",
        "t_final = 0.03\n[grid]\ncells = 16\n[initial]\nsnapshot = first/snapshot_final.txt\n[controls]\ndt = 2e-3\n",
    );
    let out2 = dir.path().join("second");
    let o = run(&[
        "run",
        "--quiet",
        "--config",
        &restart,
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out2.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);

    // saved canonical config reproduces the run
    let saved = out.join("config.txt");
    let o = run(&["check-config", "--config", saved.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn mismatched_snapshot_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.conf", "t_final = 0\n[grid]\ncells = 8\n");
    let out = dir.path().join("o");
    assert_eq!(
        run(&[
            "run",
            "--quiet",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let cfg = write(
        dir.path(),
        "b.conf",
        "t_final = 0.1\n[grid]\ncells = 9\n[initial]\nsnapshot = o/snapshot_final.txt\n",
    );
    let o = run(&["check-config", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inadmissible_initial_data_needs_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let text = "t_final = 0.002\n[grid]\ncells = 8\n[initial]\nphi = 0.5\ntheta = 1\nsigma = 1.2\n";
    let cfg = write(dir.path(), "a.conf", text);
    assert_eq!(
        run(&["check-config", "--config", &cfg]).status.code(),
        Some(1)
    );
    let cfg = write(
        dir.path(),
        "b.conf",
        &format!("{text}allow_inadmissible = true\n"),
    );
    let o = run(&["check-config", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).starts_with("warning:"));
}

#[test]
fn depend_and_oracle_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.conf",
        "t_final = 0.05\n[grid]\ncells = 16\n[perturbation]\nscale = 1e-3\n",
    );
    let out = dir.path().join("o");
    let o = run(&["depend", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("exponent="));
    assert_eq!(
        std::fs::read_to_string(out.join("depend.csv"))
            .unwrap()
            .lines()
            .count(),
        52
    );

    let o = run(&[
        "oracle",
        "--tmax",
        "0.01",
        "--cells",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("oracle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn mms_mode_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = run(&[
        "mms",
        "--quiet",
        "--cells",
        "8,16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(out.join("mms_spatial.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
    assert_eq!(
        std::fs::read_to_string(out.join("mms_temporal.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
    let o = run(&["mms", "--dim", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            let o = run(&["check-config", "--quiet", "--config", path.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
            count += 1;
        }
    }
    assert!(count >= 3);
}
