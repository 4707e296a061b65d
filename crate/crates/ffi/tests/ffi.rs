use std::ffi::{CStr, CString};
use std::ptr;

use tumor_thermo_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tt_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn new_sim(cells: &[usize], dt: f64) -> *mut TtSimulation {
    let params = tt_params_new();
    let extent = vec![1.0; cells.len()];
    let mut sim = ptr::null_mut();
    let status = unsafe {
        tt_sim_new(
            params,
            cells.len(),
            cells.as_ptr(),
            extent.as_ptr(),
            dt,
            &mut sim,
        )
    };
    unsafe { tt_params_free(params) };
    assert_eq!(status, TtStatus::Ok, "{}", last_error());
    sim
}

#[test]
fn params_round_trip_and_validation() {
    let p = tt_params_new();
    unsafe {
        assert_eq!(tt_params_set(p, TtParam::Apoptosis, 0.25), TtStatus::Ok);
        let mut v = 0.0;
        assert_eq!(tt_params_get(p, TtParam::Apoptosis, &mut v), TtStatus::Ok);
        assert_eq!(v, 0.25);
        assert_eq!(
            tt_params_set(p, TtParam::VascularNutrient, 1.5),
            TtStatus::Validation
        );
        assert!(last_error().contains("σ_B"));
        assert_eq!(
            tt_params_get(p, TtParam::VascularNutrient, &mut v),
            TtStatus::Ok
        );
        assert_eq!(v, 1.0);
        assert_eq!(
            tt_params_set_regulator(p, TtRegulator::Saturating),
            TtStatus::Ok
        );
        tt_params_free(p);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(
            tt_params_set(ptr::null_mut(), TtParam::Apoptosis, 1.0),
            TtStatus::NullPointer
        );
        assert_eq!(
            tt_sim_step(ptr::null_mut(), ptr::null_mut()),
            TtStatus::NullPointer
        );
        assert_eq!(tt_sim_cell_count(ptr::null()), 0);
        tt_sim_free(ptr::null_mut());
        tt_params_free(ptr::null_mut());
    }
    assert!(!last_error().is_empty());
}

#[test]
fn invalid_geometry() {
    let p = tt_params_new();
    let cells = [1usize];
    let extent = [1.0];
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(
            tt_sim_new(p, 1, cells.as_ptr(), extent.as_ptr(), 1e-3, &mut sim),
            TtStatus::Validation
        );
        assert_eq!(
            tt_sim_new(p, 4, cells.as_ptr(), extent.as_ptr(), 1e-3, &mut sim),
            TtStatus::InvalidArgument
        );
        let cells = [8usize];
        assert_eq!(
            tt_sim_new(p, 1, cells.as_ptr(), extent.as_ptr(), -1.0, &mut sim),
            TtStatus::Validation
        );
        tt_params_free(p);
    }
    assert!(sim.is_null());
}

#[test]
fn step_preserves_bounds_and_reports() {
    let sim = new_sim(&[16, 8], 1e-3);
    unsafe {
        let n = tt_sim_cell_count(sim);
        assert_eq!(n, 128);
        let phi: Vec<f64> = (0..n).map(|i| (i % 5) as f64 / 4.0).collect();
        let theta: Vec<f64> = (0..n).map(|i| 0.5 + (i % 3) as f64).collect();
        let sigma = vec![0.5; n];
        assert_eq!(
            tt_sim_set_field(sim, TtField::Phi, phi.as_ptr(), n),
            TtStatus::Ok
        );
        assert_eq!(
            tt_sim_set_field(sim, TtField::Theta, theta.as_ptr(), n),
            TtStatus::Ok
        );
        assert_eq!(
            tt_sim_set_field(sim, TtField::Sigma, sigma.as_ptr(), n),
            TtStatus::Ok
        );
        assert_eq!(
            tt_sim_set_field(sim, TtField::Sigma, sigma.as_ptr(), n - 1),
            TtStatus::InvalidArgument
        );

        let mut s0 = 0.0;
        assert_eq!(tt_sim_entropy(sim, &mut s0), TtStatus::Ok);
        let mut report = TtStepReport::default();
        assert_eq!(tt_sim_step(sim, &mut report), TtStatus::Ok);
        assert!((report.t - 1e-3).abs() < 1e-15);
        assert!(report.min_theta > 0.0 && report.min_phi >= 0.0);
        assert!(report.min_sigma >= 0.0 && report.max_sigma <= 1.0);
        assert!(report.entropy_increment >= 0.0);
        let mut s1 = 0.0;
        assert_eq!(tt_sim_entropy(sim, &mut s1), TtStatus::Ok);
        assert!((s1 - s0 - report.entropy_increment).abs() < 1e-12);

        let mut out = vec![0.0; n];
        assert_eq!(
            tt_sim_get_field(sim, TtField::Theta, out.as_mut_ptr(), n),
            TtStatus::Ok
        );
        assert!(out.iter().all(|&v| v > 0.0));

        assert_eq!(tt_sim_set_picard(sim, true, 1e-10, 50), TtStatus::Ok);
        let mut steps = 0;
        assert_eq!(tt_sim_run(sim, 0.0105, &mut steps), TtStatus::Ok);
        assert_eq!(steps, 10);
        let mut t = 0.0;
        assert_eq!(tt_sim_time(sim, &mut t), TtStatus::Ok);
        assert_eq!(t, 0.0105);
        let mut e = 0.0;
        assert_eq!(tt_sim_energy(sim, &mut e), TtStatus::Ok);
        assert!(e.is_finite());
        tt_sim_free(sim);
    }
}

#[test]
fn rest_state_entropy_is_undefined() {
    let sim = new_sim(&[4], 1e-3);
    let mut s = 0.0;
    assert_eq!(unsafe { tt_sim_entropy(sim, &mut s) }, TtStatus::Solver);
    unsafe { tt_sim_free(sim) };
}

#[test]
fn config_and_snapshot_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.conf");
    std::fs::write(
        &cfg,
        "t_final = 0.01\n[grid]\ncells = 12\n[controls]\ndt = 2e-3\n",
    )
    .unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(
            tt_sim_from_config(path.as_ptr(), &mut sim),
            TtStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(tt_sim_cell_count(sim), 12);
        let snap = CString::new(dir.path().join("s.txt").to_str().unwrap()).unwrap();
        assert_eq!(tt_sim_write_snapshot(sim, snap.as_ptr()), TtStatus::Ok);
        let bad = CString::new("/nonexistent/dir/s.txt").unwrap();
        assert_eq!(tt_sim_write_snapshot(sim, bad.as_ptr()), TtStatus::Io);
        tt_sim_free(sim);
        let missing = CString::new("/nonexistent.conf").unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(
            tt_sim_from_config(missing.as_ptr(), &mut other),
            TtStatus::Io
        );
    }
    let text = std::fs::read_to_string(dir.path().join("s.txt")).unwrap();
    assert!(text.starts_with("tumor-thermo-snapshot 1"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/tumor_thermo.h"
    ))
    .unwrap();
    for name in [
        "tt_sim_new",
        "tt_sim_step",
        "tt_sim_run",
        "tt_last_error",
        "TT_STATUS_OK",
        "TT_STATUS_SOLVER",
        "typedef struct TtSimulation TtSimulation",
        "TtStepReport",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(tt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c99() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"tumor_thermo.h\"\nint main(void) {\n  TtParams *p = tt_params_new();\n  TtStatus s = tt_params_set(p, TT_PARAM_APOPTOSIS, 0.5);\n  tt_params_free(p);\n  return s == TT_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
