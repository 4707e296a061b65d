//! Time integration: per step the phase field is advanced with a convex–concave
//! split Newton solve, the nutrient with a linear implicit solve using the new
//! phase field, and the temperature with Newton on the Kirchhoff form
//! `c_V θ_t − ΔK(θ) + mθ = βm²`, `m = φ_t`. Optionally the composition is
//! Picard-iterated to a per-step fixed point.

use std::sync::Arc;

use crate::constitutive::{
    double_well_prime_concave, double_well_prime_convex, double_well_second_convex, ModelParams,
};
use crate::diagnostics::{energy_balance_residual, entropy_increment, Bounds};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Phase field, temperature and nutrient at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub phi: Field,
    pub theta: Field,
    pub sigma: Field,
    pub t: f64,
}

impl State {
    pub fn new(phi: Field, theta: Field, sigma: Field, t: f64) -> Result<Self> {
        phi.ensure_same_grid(&theta)?;
        phi.ensure_same_grid(&sigma)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::validation("state", format!("time {t} must be ≥ 0")));
        }
        for (f, ctx) in [(&phi, "phi"), (&theta, "theta"), (&sigma, "sigma")] {
            f.check_finite(ctx)?;
        }
        Ok(Self {
            phi,
            theta,
            sigma,
            t,
        })
    }

    pub fn constant(grid: &Arc<Grid>, phi: f64, theta: f64, sigma: f64) -> Self {
        Self {
            phi: Field::constant(grid, phi),
            theta: Field::constant(grid, theta),
            sigma: Field::constant(grid, sigma),
            t: 0.0,
        }
    }

    /// The rest state `(0, 0, σ_B)`.
    pub fn rest(grid: &Arc<Grid>, p: &ModelParams) -> Self {
        Self::constant(grid, 0.0, 0.0, p.vascular_nutrient)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.phi.grid()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::of(self)
    }

    /// `θ ≥ 0`, `φ ≥ 0` and `σ ∈ [0, 1]` everywhere.
    pub fn is_admissible(&self) -> bool {
        let b = self.bounds();
        b.min_theta >= 0.0 && b.min_phi >= 0.0 && b.min_sigma >= 0.0 && b.max_sigma <= 1.0
    }

    /// Sum of the l2 distances of the three fields.
    pub fn distance(&self, other: &State) -> f64 {
        self.phi.sub(&other.phi).l2_norm()
            + self.theta.sub(&other.theta).l2_norm()
            + self.sigma.sub(&other.sigma).l2_norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepControls {
    pub dt: f64,
    /// Absolute l2 tolerance on the Newton residuals.
    pub newton_tol: f64,
    pub newton_max: usize,
    pub picard_enabled: bool,
    /// Absolute tolerance on the summed l2 distance between Picard iterates.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Relative residual tolerance of every CG solve.
    pub linear_tol: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            newton_tol: 1e-10,
            newton_max: 50,
            picard_enabled: false,
            picard_tol: 1e-10,
            picard_max: 50,
            linear_tol: 1e-13,
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dt", self.dt),
            ("newton_tol", self.newton_tol),
            ("picard_tol", self.picard_tol),
            ("linear_tol", self.linear_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("{v} must be > 0")));
            }
        }
        for (name, v) in [
            ("newton_max", self.newton_max),
            ("picard_max", self.picard_max),
        ] {
            if v < 1 {
                return Err(Error::validation(name, "must be ≥ 1"));
            }
        }
        Ok(())
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub newton_iters_phi: usize,
    pub newton_iters_theta: usize,
    pub picard_iters: usize,
    /// Largest ratio of successive Picard iterate distances, 0 with fewer
    /// than three compositions.
    pub picard_contraction: f64,
    pub min_theta: f64,
    pub min_phi: f64,
    pub min_sigma: f64,
    pub max_sigma: f64,
    pub energy_residual: f64,
    /// `NaN` when θ is not strictly positive before or after the step.
    pub entropy_increment: f64,
    /// Filled in only by paired runs.
    pub stability_functional: f64,
    pub dt_used: f64,
}

/// Extra right-hand sides added to the three substeps, evaluated at the new
/// time level. Used by manufactured-solution runs.
pub trait Forcing: Sync {
    /// Returns `(g_φ, g_θ, g_σ)` at time `t`.
    fn sources(&self, grid: &Arc<Grid>, t: f64) -> (Field, Field, Field);
}

/// Result of a substep solve.
#[derive(Debug, Clone)]
pub struct Solved {
    pub field: Field,
    pub iterations: usize,
}

fn check_dt(c: &StepControls) -> Result<()> {
    if !(c.dt.is_finite() && c.dt > 0.0) {
        return Err(Error::validation("dt", format!("{} must be > 0", c.dt)));
    }
    Ok(())
}

const LINE_SEARCH_FLOOR: f64 = 1.0 / 1024.0;

fn residual_norm(r: &[f64], cell_volume: f64) -> f64 {
    (r.iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt()
}

/// Damped Newton with a residual-monotone halving line search.
fn newton<R, S>(
    substep: &'static str,
    mut x: Vec<f64>,
    grid: &Grid,
    c: &StepControls,
    residual: R,
    mut correction: S,
) -> Result<(Vec<f64>, usize)>
where
    R: Fn(&[f64]) -> Vec<f64>,
    S: FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let vol = grid.cell_volume();
    let mut r = residual(&x);
    let mut rn = residual_norm(&r, vol);
    for it in 0..c.newton_max {
        if !rn.is_finite() {
            break;
        }
        if rn <= c.newton_tol {
            return Ok((x, it));
        }
        let delta = correction(&x, &r)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= LINE_SEARCH_FLOOR {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(x, d)| x + lambda * d).collect();
            let rt = residual(&trial);
            let rtn = residual_norm(&rt, vol);
            if rtn < rn {
                x = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // a correction at the roundoff level of x cannot reduce the residual further
            let dn = crate::linalg::norm(&delta);
            let xn = crate::linalg::norm(&x);
            if dn <= 64.0 * f64::EPSILON * xn.max(1e-300) {
                return Ok((x, it + 1));
            }
            return Err(Error::NewtonDivergence {
                substep,
                iterations: it + 1,
                residual: rn,
            });
        }
    }
    if rn <= c.newton_tol {
        return Ok((x, c.newton_max));
    }
    Err(Error::NewtonDivergence {
        substep,
        iterations: c.newton_max,
        residual: rn,
    })
}

/// Phase-field substep:
/// `β(φ − φⁿ)/Δt − εΔφ + F'₊(φ)/ε + F'₋(φⁿ)/ε = θ_used + (𝒫σ_used − 𝒜)h(φⁿ)`.
pub fn step_phase(
    state: &State,
    theta_used: &Field,
    sigma_used: &Field,
    c: &StepControls,
    p: &ModelParams,
) -> Result<Solved> {
    step_phase_with_source(state, theta_used, sigma_used, None, c, p)
}

pub fn step_phase_with_source(
    state: &State,
    theta_used: &Field,
    sigma_used: &Field,
    source: Option<&Field>,
    c: &StepControls,
    p: &ModelParams,
) -> Result<Solved> {
    check_dt(c)?;
    let grid = state.grid().clone();
    let phi_old = state.phi.values();
    let a = p.relaxation / c.dt;
    let eps = p.interface;
    let rhs: Vec<f64> = (0..grid.len())
        .map(|i| {
            let po = phi_old[i];
            a * po - double_well_prime_concave(po) / eps
                + theta_used.values()[i]
                + p.growth_source(po, sigma_used.values()[i])
                + source.map_or(0.0, |s| s.values()[i])
        })
        .collect();
    let residual = |x: &[f64]| {
        let mut lap = vec![0.0; x.len()];
        grid.laplacian_into(x, &mut lap);
        (0..x.len())
            .map(|i| a * x[i] - eps * lap[i] + double_well_prime_convex(x[i]) / eps - rhs[i])
            .collect::<Vec<_>>()
    };
    let correction = |x: &[f64], r: &[f64]| {
        let shift: Vec<f64> = x
            .iter()
            .map(|&v| a + double_well_second_convex(v) / eps)
            .collect();
        let b: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut d = vec![0.0; x.len()];
        grid.solve_shifted(&shift, eps, &b, &mut d, c.linear_tol)?;
        Ok(d)
    };
    let (x, iterations) = newton("phase", phi_old.to_vec(), &grid, c, residual, correction)?;
    let field = Field::from_raw(&grid, x);
    field.check_finite("phase substep")?;
    Ok(Solved { field, iterations })
}

/// Nutrient substep, linear and fully implicit in its reactions:
/// `(1/Δt + ℬ + 𝒞h(φ_used))σ − Δσ = σⁿ/Δt + ℬσ_B`.
pub fn step_nutrient(
    state: &State,
    phi_used: &Field,
    c: &StepControls,
    p: &ModelParams,
) -> Result<Solved> {
    step_nutrient_with_source(state, phi_used, None, c, p)
}

pub fn step_nutrient_with_source(
    state: &State,
    phi_used: &Field,
    source: Option<&Field>,
    c: &StepControls,
    p: &ModelParams,
) -> Result<Solved> {
    check_dt(c)?;
    let grid = state.grid().clone();
    let inv_dt = 1.0 / c.dt;
    let shift: Vec<f64> = phi_used
        .values()
        .iter()
        .map(|&ph| inv_dt + p.transfer + p.consumption * p.h(ph))
        .collect();
    let rhs: Vec<f64> = state
        .sigma
        .values()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            s * inv_dt + p.transfer * p.vascular_nutrient + source.map_or(0.0, |g| g.values()[i])
        })
        .collect();
    let mut x = state.sigma.values().to_vec();
    let iterations = grid.solve_shifted(&shift, 1.0, &rhs, &mut x, c.linear_tol)?;
    let field = Field::from_raw(&grid, x);
    field.check_finite("nutrient substep")?;
    Ok(Solved { field, iterations })
}

/// Temperature substep on the Kirchhoff form:
/// `c_V(θ − θⁿ)/Δt − ΔK(θ) + mθ = βm²`.
///
/// Refuses the step with [`Error::DtTooLarge`] unless `c_V/Δt + m > 0` in
/// every cell; under that condition the discrete system is an M-matrix
/// problem and `θⁿ ≥ 0` implies `θ ≥ 0`.
pub fn step_temperature(
    state: &State,
    m: &Field,
    c: &StepControls,
    p: &ModelParams,
) -> Result<Solved> {
    step_temperature_with_source(state, m, None, c, p)
}

pub fn step_temperature_with_source(
    state: &State,
    m: &Field,
    source: Option<&Field>,
    c: &StepControls,
    p: &ModelParams,
) -> Result<Solved> {
    check_dt(c)?;
    let grid = state.grid().clone();
    let q = p.conductivity_exponent;
    let cv_dt = p.specific_heat / c.dt;
    let diag: Vec<f64> = m.values().iter().map(|&mi| cv_dt + mi).collect();
    let min_diagonal = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_diagonal > 0.0) {
        return Err(Error::DtTooLarge { min_diagonal });
    }
    let rhs: Vec<f64> = (0..grid.len())
        .map(|i| {
            let mi = m.values()[i];
            cv_dt * state.theta.values()[i]
                + p.relaxation * mi * mi
                + source.map_or(0.0, |g| g.values()[i])
        })
        .collect();
    let residual = |x: &[f64]| {
        let k: Vec<f64> = x
            .iter()
            .map(|&t| crate::constitutive::kirchhoff(t, q))
            .collect();
        let mut lap = vec![0.0; x.len()];
        grid.laplacian_into(&k, &mut lap);
        (0..x.len())
            .map(|i| diag[i] * x[i] - lap[i] - rhs[i])
            .collect::<Vec<_>>()
    };
    // J δ = diag·δ − Δ(κ δ); with w = κ δ the system (diag/κ) w − Δw = −r is SPD.
    let correction = |x: &[f64], r: &[f64]| {
        let kappa: Vec<f64> = x
            .iter()
            .map(|&t| crate::constitutive::conductivity(t, q))
            .collect();
        let shift: Vec<f64> = diag.iter().zip(&kappa).map(|(d, k)| d / k).collect();
        let b: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut w = vec![0.0; x.len()];
        grid.solve_shifted(&shift, 1.0, &b, &mut w, c.linear_tol)?;
        Ok(w.iter().zip(&kappa).map(|(w, k)| w / k).collect())
    };
    let (x, iterations) = newton(
        "temperature",
        state.theta.values().to_vec(),
        &grid,
        c,
        residual,
        correction,
    )?;
    let field = Field::from_raw(&grid, x);
    field.check_finite("temperature substep")?;
    Ok(Solved { field, iterations })
}

/// One full step `φ → σ → θ`, Picard-iterated when enabled.
pub fn advance(state: &State, c: &StepControls, p: &ModelParams) -> Result<(State, StepReport)> {
    advance_with(state, c, p, None)
}

pub fn advance_with(
    state: &State,
    c: &StepControls,
    p: &ModelParams,
    forcing: Option<&dyn Forcing>,
) -> Result<(State, StepReport)> {
    check_dt(c)?;
    let t_new = state.t + c.dt;
    let sources = forcing.map(|f| f.sources(state.grid(), t_new));
    let (g_phi, g_theta, g_sigma) = match &sources {
        Some((a, b, s)) => (Some(a), Some(b), Some(s)),
        None => (None, None, None),
    };

    let mut theta_in = state.theta.clone();
    let mut prev: Option<State> = None;
    let mut last_distance = f64::NAN;
    let mut contraction: f64 = 0.0;
    let mut iters_phi = 0;
    let mut iters_theta = 0;
    let mut compositions = 0;
    let max_compositions = if c.picard_enabled { c.picard_max } else { 1 };

    let next = loop {
        let phi = step_phase_with_source(state, &theta_in, &state.sigma, g_phi, c, p)?;
        let sigma = step_nutrient_with_source(state, &phi.field, g_sigma, c, p)?;
        let m = phi.field.zip_map(&state.phi, |a, b| (a - b) / c.dt);
        let theta = step_temperature_with_source(state, &m, g_theta, c, p)?;
        compositions += 1;
        iters_phi = iters_phi.max(phi.iterations);
        iters_theta = iters_theta.max(theta.iterations);
        let candidate = State {
            phi: phi.field,
            theta: theta.field,
            sigma: sigma.field,
            t: t_new,
        };
        if !c.picard_enabled {
            break candidate;
        }
        if let Some(prev) = &prev {
            let d = candidate.distance(prev);
            if last_distance.is_finite() && last_distance > 0.0 {
                contraction = contraction.max(d / last_distance);
            }
            last_distance = d;
            if d <= c.picard_tol || compositions >= max_compositions {
                break candidate;
            }
        } else if compositions >= max_compositions {
            break candidate;
        }
        theta_in = candidate.theta.clone();
        prev = Some(candidate);
    };

    let bounds = next.bounds();
    let report = StepReport {
        newton_iters_phi: iters_phi,
        newton_iters_theta: iters_theta,
        picard_iters: compositions,
        picard_contraction: contraction,
        min_theta: bounds.min_theta,
        min_phi: bounds.min_phi,
        min_sigma: bounds.min_sigma,
        max_sigma: bounds.max_sigma,
        energy_residual: energy_balance_residual(state, &next, p, c.dt),
        entropy_increment: entropy_increment(state, &next, p).unwrap_or(f64::NAN),
        stability_functional: 0.0,
        dt_used: c.dt,
    };
    Ok((next, report))
}

/// Maximum number of Δt halvings attempted on a failed step.
pub const MAX_HALVINGS: usize = 10;

/// Advances one step of nominal size `c.dt`, halving on step failure.
pub fn advance_adaptive(
    state: &State,
    c: &StepControls,
    p: &ModelParams,
    forcing: Option<&dyn Forcing>,
) -> Result<(State, StepReport)> {
    let mut dt = c.dt;
    let mut halvings = 0;
    loop {
        match advance_with(state, &c.with_dt(dt), p, forcing) {
            Ok(out) => return Ok(out),
            Err(e) if e.is_step_failure() && halvings < MAX_HALVINGS => {
                dt *= 0.5;
                halvings += 1;
            }
            Err(e) => {
                return Err(Error::RunAborted {
                    t: state.t,
                    source: Box::new(e),
                })
            }
        }
    }
}

/// Integrates from `initial.t` to `t_final`, shortening the last step to land
/// exactly, and hands every accepted step to `sink`.
pub fn run<S>(
    initial: &State,
    t_final: f64,
    c: &StepControls,
    p: &ModelParams,
    sink: S,
) -> Result<State>
where
    S: FnMut(&State, &StepReport) -> Result<()>,
{
    run_with(initial, t_final, c, p, None, sink)
}

pub fn run_with<S>(
    initial: &State,
    t_final: f64,
    c: &StepControls,
    p: &ModelParams,
    forcing: Option<&dyn Forcing>,
    mut sink: S,
) -> Result<State>
where
    S: FnMut(&State, &StepReport) -> Result<()>,
{
    c.validate()?;
    if !(t_final >= initial.t) {
        return Err(Error::validation(
            "t_final",
            format!("{t_final} precedes the initial time {}", initial.t),
        ));
    }
    let mut state = initial.clone();
    while state.t < t_final {
        let remaining = t_final - state.t;
        let landing = remaining <= c.dt * (1.0 + 1e-9);
        // a remainder equal to Δt up to accumulated roundoff keeps the nominal step
        let dt = if landing && (remaining - c.dt).abs() > 1e-9 * c.dt {
            remaining
        } else {
            c.dt
        };
        let (mut next, report) = advance_adaptive(&state, &c.with_dt(dt), p, forcing)?;
        if landing && report.dt_used == dt {
            next.t = t_final;
        }
        sink(&next, &report)?;
        state = next;
    }
    Ok(state)
}
