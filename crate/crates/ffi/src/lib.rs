//! C ABI over the `tumor-thermo` simulator.
//!
//! Handles are opaque pointers created by `tt_*_new` functions and released
//! with the matching `tt_*_free`. Every fallible call returns a [`TtStatus`];
//! on failure [`tt_last_error`] describes the problem. Panics never cross the
//! boundary and are reported as `TT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use tumor_thermo::diagnostics::{internal_energy, total_entropy};
use tumor_thermo::error::{Error, ErrorClass};
use tumor_thermo::io::{load_config, write_snapshot};
use tumor_thermo::stepper::{advance_adaptive, State, StepControls, StepReport};
use tumor_thermo::{Field, Grid, ModelParams, Regulator};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Solver = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtField {
    Phi = 0,
    Theta = 1,
    Sigma = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtParam {
    Proliferation = 0,
    Apoptosis = 1,
    Consumption = 2,
    Transfer = 3,
    VascularNutrient = 4,
    Relaxation = 5,
    SpecificHeat = 6,
    Interface = 7,
    ConductivityExponent = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtRegulator {
    SmoothStep = 0,
    Saturating = 1,
}

/// Diagnostics of one accepted step.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TtStepReport {
    pub t: f64,
    pub dt_used: f64,
    pub newton_iters_phi: usize,
    pub newton_iters_theta: usize,
    pub picard_iters: usize,
    pub picard_contraction: f64,
    pub min_theta: f64,
    pub min_phi: f64,
    pub min_sigma: f64,
    pub max_sigma: f64,
    pub energy_residual: f64,
    /// NaN when θ is not strictly positive.
    pub entropy_increment: f64,
}

impl TtStepReport {
    fn from_report(t: f64, r: &StepReport) -> Self {
        Self {
            t,
            dt_used: r.dt_used,
            newton_iters_phi: r.newton_iters_phi,
            newton_iters_theta: r.newton_iters_theta,
            picard_iters: r.picard_iters,
            picard_contraction: r.picard_contraction,
            min_theta: r.min_theta,
            min_phi: r.min_phi,
            min_sigma: r.min_sigma,
            max_sigma: r.max_sigma,
            energy_residual: r.energy_residual,
            entropy_increment: r.entropy_increment,
        }
    }
}

/// Opaque model parameter set.
pub struct TtParams {
    inner: ModelParams,
}

/// Opaque simulation: parameters, controls and the current state.
pub struct TtSimulation {
    params: ModelParams,
    controls: StepControls,
    state: State,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TtStatus, msg: impl AsRef<str>) -> TtStatus {
    set_last_error(msg.as_ref());
    status
}

fn from_error(e: &Error) -> TtStatus {
    let status = match e.class() {
        ErrorClass::Validation => TtStatus::Validation,
        ErrorClass::Solver => TtStatus::Solver,
        ErrorClass::Io => TtStatus::Io,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into `TT_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> TtStatus) -> TtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == TtStatus::Ok {
                set_last_error("");
            }
            s
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(TtStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default parameters. Release with [`tt_params_free`].
#[no_mangle]
pub extern "C" fn tt_params_new() -> *mut TtParams {
    Box::into_raw(Box::new(TtParams {
        inner: ModelParams::default(),
    }))
}

/// # Safety
/// `params` must be null or a pointer returned by [`tt_params_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn tt_params_free(params: *mut TtParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

fn param_slot(p: &mut ModelParams, which: TtParam) -> &mut f64 {
    match which {
        TtParam::Proliferation => &mut p.proliferation,
        TtParam::Apoptosis => &mut p.apoptosis,
        TtParam::Consumption => &mut p.consumption,
        TtParam::Transfer => &mut p.transfer,
        TtParam::VascularNutrient => &mut p.vascular_nutrient,
        TtParam::Relaxation => &mut p.relaxation,
        TtParam::SpecificHeat => &mut p.specific_heat,
        TtParam::Interface => &mut p.interface,
        TtParam::ConductivityExponent => &mut p.conductivity_exponent,
    }
}

/// Sets one parameter. The whole set is validated; an invalid value leaves
/// the parameters unchanged.
///
/// # Safety
/// `params` must be a live handle from [`tt_params_new`].
#[no_mangle]
pub unsafe extern "C" fn tt_params_set(
    params: *mut TtParams,
    which: TtParam,
    value: f64,
) -> TtStatus {
    guard(|| {
        let Some(params) = params.as_mut() else {
            return fail(TtStatus::NullPointer, "params is null");
        };
        let mut next = params.inner.clone();
        *param_slot(&mut next, which) = value;
        match next.validate() {
            Ok(()) => {
                params.inner = next;
                TtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `params` must be a live handle and `out` a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn tt_params_get(
    params: *const TtParams,
    which: TtParam,
    out: *mut f64,
) -> TtStatus {
    guard(|| {
        let (Some(params), Some(out)) = (params.as_ref(), out.as_mut()) else {
            return fail(TtStatus::NullPointer, "params or out is null");
        };
        let mut p = params.inner.clone();
        *out = *param_slot(&mut p, which);
        TtStatus::Ok
    })
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tt_params_set_regulator(
    params: *mut TtParams,
    regulator: TtRegulator,
) -> TtStatus {
    guard(|| {
        let Some(params) = params.as_mut() else {
            return fail(TtStatus::NullPointer, "params is null");
        };
        params.inner.regulator = match regulator {
            TtRegulator::SmoothStep => Regulator::SmoothStep,
            TtRegulator::Saturating => Regulator::Saturating,
        };
        TtStatus::Ok
    })
}

/// Creates a simulation on a `dim`-dimensional box with `cells[a]` cells of
/// total length `extent[a]` along axis `a`, starting from the rest state at
/// `t = 0` with nominal step `dt`. Fields are stored row-major with axis 0
/// varying slowest.
///
/// # Safety
/// `params` must be a live handle, `cells` and `extent` must point to `dim`
/// elements and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_new(
    params: *const TtParams,
    dim: usize,
    cells: *const usize,
    extent: *const f64,
    dt: f64,
    out: *mut *mut TtSimulation,
) -> TtStatus {
    guard(|| {
        if params.is_null() || cells.is_null() || extent.is_null() || out.is_null() {
            return fail(TtStatus::NullPointer, "null argument");
        }
        if !(1..=3).contains(&dim) {
            return fail(
                TtStatus::InvalidArgument,
                format!("dim {dim} must be 1, 2 or 3"),
            );
        }
        let p = (*params).inner.clone();
        let cells = std::slice::from_raw_parts(cells, dim);
        let extent = std::slice::from_raw_parts(extent, dim);
        let grid = match Grid::new(cells, extent) {
            Ok(g) => Arc::new(g),
            Err(e) => return from_error(&e),
        };
        let controls = StepControls::default().with_dt(dt);
        if let Err(e) = p.validate().and_then(|_| controls.validate()) {
            return from_error(&e);
        }
        let state = State::rest(&grid, &p);
        *out = Box::into_raw(Box::new(TtSimulation {
            params: p,
            controls,
            state,
        }));
        TtStatus::Ok
    })
}

/// Creates a simulation from a configuration file, including its initial
/// data and controls.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_from_config(
    path: *const c_char,
    out: *mut *mut TtSimulation,
) -> TtStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(TtStatus::NullPointer, "null argument");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(TtStatus::InvalidArgument, "path is not UTF-8");
        };
        let cfg = match load_config(Path::new(path)) {
            Ok(c) => c,
            Err(e) => return from_error(&e),
        };
        let state = match cfg.initial_state() {
            Ok((s, _)) => s,
            Err(e) => return from_error(&e),
        };
        *out = Box::into_raw(Box::new(TtSimulation {
            params: cfg.params,
            controls: cfg.controls,
            state,
        }));
        TtStatus::Ok
    })
}

/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_free(sim: *mut TtSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of cells; 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_cell_count(sim: *const TtSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.state.grid().len())
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_set_dt(sim: *mut TtSimulation, dt: f64) -> TtStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(TtStatus::NullPointer, "sim is null");
        };
        let c = sim.controls.with_dt(dt);
        match c.validate() {
            Ok(()) => {
                sim.controls = c;
                TtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Enables or disables the Picard outer iteration.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_set_picard(
    sim: *mut TtSimulation,
    enabled: bool,
    tol: f64,
    max_iter: usize,
) -> TtStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(TtStatus::NullPointer, "sim is null");
        };
        let c = StepControls {
            picard_enabled: enabled,
            picard_tol: tol,
            picard_max: max_iter,
            ..sim.controls.clone()
        };
        match c.validate() {
            Ok(()) => {
                sim.controls = c;
                TtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

fn field_mut(state: &mut State, which: TtField) -> &mut Field {
    match which {
        TtField::Phi => &mut state.phi,
        TtField::Theta => &mut state.theta,
        TtField::Sigma => &mut state.sigma,
    }
}

/// Replaces one field with `len` values.
///
/// # Safety
/// `sim` must be a live handle and `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_set_field(
    sim: *mut TtSimulation,
    which: TtField,
    values: *const f64,
    len: usize,
) -> TtStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(TtStatus::NullPointer, "sim is null");
        };
        if values.is_null() {
            return fail(TtStatus::NullPointer, "values is null");
        }
        let n = sim.state.grid().len();
        if len != n {
            return fail(
                TtStatus::InvalidArgument,
                format!("expected {n} values, got {len}"),
            );
        }
        let data = std::slice::from_raw_parts(values, len).to_vec();
        match Field::new(sim.state.grid(), data) {
            Ok(f) => {
                *field_mut(&mut sim.state, which) = f;
                TtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Copies one field into `out`, which must hold `len` = cell count doubles.
///
/// # Safety
/// `sim` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_get_field(
    sim: *const TtSimulation,
    which: TtField,
    out: *mut f64,
    len: usize,
) -> TtStatus {
    guard(|| {
        let Some(sim) = sim.as_ref() else {
            return fail(TtStatus::NullPointer, "sim is null");
        };
        if out.is_null() {
            return fail(TtStatus::NullPointer, "out is null");
        }
        let f = match which {
            TtField::Phi => &sim.state.phi,
            TtField::Theta => &sim.state.theta,
            TtField::Sigma => &sim.state.sigma,
        };
        if len != f.len() {
            return fail(
                TtStatus::InvalidArgument,
                format!("expected {} values, got {len}", f.len()),
            );
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(f.values());
        TtStatus::Ok
    })
}

/// Advances one step of the nominal size, halving on solver failure. On
/// failure the state is unchanged. `report` may be null.
///
/// # Safety
/// `sim` must be a live handle; `report` null or valid.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_step(
    sim: *mut TtSimulation,
    report: *mut TtStepReport,
) -> TtStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(TtStatus::NullPointer, "sim is null");
        };
        match advance_adaptive(&sim.state, &sim.controls, &sim.params, None) {
            Ok((next, r)) => {
                if let Some(out) = report.as_mut() {
                    *out = TtStepReport::from_report(next.t, &r);
                }
                sim.state = next;
                TtStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Integrates to `t_final`, shortening the last step to land exactly.
/// `steps` (may be null) receives the number of accepted steps. On failure
/// the state is that of the last accepted step.
///
/// # Safety
/// `sim` must be a live handle; `steps` null or valid.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_run(
    sim: *mut TtSimulation,
    t_final: f64,
    steps: *mut usize,
) -> TtStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(TtStatus::NullPointer, "sim is null");
        };
        let mut count = 0usize;
        let mut last = sim.state.clone();
        let result =
            tumor_thermo::stepper::run(&sim.state, t_final, &sim.controls, &sim.params, |s, _| {
                count += 1;
                last = s.clone();
                Ok(())
            });
        if let Some(out) = steps.as_mut() {
            *out = count;
        }
        match result {
            Ok(end) => {
                sim.state = end;
                TtStatus::Ok
            }
            Err(e) => {
                sim.state = last;
                from_error(&e)
            }
        }
    })
}

/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_time(sim: *const TtSimulation, out: *mut f64) -> TtStatus {
    guard(|| match (sim.as_ref(), out.as_mut()) {
        (Some(sim), Some(out)) => {
            *out = sim.state.t;
            TtStatus::Ok
        }
        _ => fail(TtStatus::NullPointer, "null argument"),
    })
}

/// Internal energy of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_energy(sim: *const TtSimulation, out: *mut f64) -> TtStatus {
    guard(|| match (sim.as_ref(), out.as_mut()) {
        (Some(sim), Some(out)) => {
            *out = internal_energy(&sim.state, &sim.params);
            TtStatus::Ok
        }
        _ => fail(TtStatus::NullPointer, "null argument"),
    })
}

/// Total entropy of the current state; fails unless θ > 0 everywhere.
///
/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_entropy(sim: *const TtSimulation, out: *mut f64) -> TtStatus {
    guard(|| match (sim.as_ref(), out.as_mut()) {
        (Some(sim), Some(out)) => match total_entropy(&sim.state, &sim.params) {
            Ok(s) => {
                *out = s;
                TtStatus::Ok
            }
            Err(e) => from_error(&e),
        },
        _ => fail(TtStatus::NullPointer, "null argument"),
    })
}

/// Writes the current state as a snapshot file.
///
/// # Safety
/// `sim` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tt_sim_write_snapshot(
    sim: *const TtSimulation,
    path: *const c_char,
) -> TtStatus {
    guard(|| {
        let Some(sim) = sim.as_ref() else {
            return fail(TtStatus::NullPointer, "sim is null");
        };
        if path.is_null() {
            return fail(TtStatus::NullPointer, "path is null");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(TtStatus::InvalidArgument, "path is not UTF-8");
        };
        match write_snapshot(Path::new(path), &sim.state) {
            Ok(()) => TtStatus::Ok,
            Err(e) => from_error(&e),
        }
    })
}
