//! Thermodynamic and stability monitors.
//!
//! * internal energy `E = ∫ ε/2|∇φ|² + F(φ)/ε + c_V θ`, whose zero-flux
//!   balance is `dE/dt = ∫ γ φ_t` with `γ = (𝒫σ − 𝒜)h(φ)`;
//! * total entropy `S = ∫ c_V ln θ + φ`, nondecreasing along solutions;
//! * the stability functional
//!   `ℰ = ‖θ₁ − θ₂‖²_* + ‖φ₁ − φ₂‖² + ½|φ₁ − φ₂|²_1 + ‖σ₁ − σ₂‖²`
//!   and the paired-run continuous-dependence harness built on it.

use crate::constitutive::{double_well, ModelParams};
use crate::error::{Error, Result};
use crate::stepper::{advance, State, StepControls};

/// Extremes watched by the bound monitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_theta: f64,
    pub min_phi: f64,
    pub min_sigma: f64,
    pub max_sigma: f64,
}

impl Bounds {
    pub fn of(state: &State) -> Self {
        Self {
            min_theta: state.theta.min(),
            min_phi: state.phi.min(),
            min_sigma: state.sigma.min(),
            max_sigma: state.sigma.max(),
        }
    }

    /// Whether the admissible box holds up to `slack`.
    pub fn within(&self, slack: f64) -> bool {
        self.min_theta >= -slack
            && self.min_phi >= -slack
            && self.min_sigma >= -slack
            && self.max_sigma <= 1.0 + slack
    }
}

/// One diagnostics row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    /// `NaN` when θ is not strictly positive.
    pub entropy: f64,
    pub energy_residual: f64,
    pub entropy_increment: f64,
    pub bounds: Bounds,
    pub stability_functional: Option<f64>,
}

pub fn internal_energy(state: &State, p: &ModelParams) -> f64 {
    let eps = p.interface;
    let grad = state.phi.h1_seminorm();
    let bulk = state
        .phi
        .values()
        .iter()
        .zip(state.theta.values())
        .map(|(&ph, &th)| double_well(ph) / eps + p.specific_heat * th)
        .sum::<f64>()
        * state.grid().cell_volume();
    0.5 * eps * grad * grad + bulk
}

/// `|E(after) − E(before) − Δt ∫ γ(φ_before, σ_after) m|`, `m = (φ_after − φ_before)/Δt`.
pub fn energy_balance_residual(before: &State, after: &State, p: &ModelParams, dt: f64) -> f64 {
    let work: f64 = before
        .phi
        .values()
        .iter()
        .zip(after.phi.values())
        .zip(after.sigma.values())
        .map(|((&pb, &pa), &sa)| p.growth_source(pb, sa) * (pa - pb) / dt)
        .sum::<f64>()
        * before.grid().cell_volume();
    (internal_energy(after, p) - internal_energy(before, p) - dt * work).abs()
}

/// `S = ∫ c_V ln θ + φ`.
pub fn total_entropy(state: &State, p: &ModelParams) -> Result<f64> {
    let min_theta = state.theta.min();
    if !(min_theta > 0.0) {
        return Err(Error::NonpositiveTemperature { min_theta });
    }
    let s: f64 = state
        .theta
        .values()
        .iter()
        .zip(state.phi.values())
        .map(|(&th, &ph)| p.specific_heat * th.ln() + ph)
        .sum();
    Ok(s * state.grid().cell_volume())
}

pub fn entropy_increment(before: &State, after: &State, p: &ModelParams) -> Result<f64> {
    Ok(total_entropy(after, p)? - total_entropy(before, p)?)
}

/// Tolerance the entropy monitor grants the scheme for a step ending at `s`.
pub fn entropy_tolerance(s: f64) -> f64 {
    1e-8 * (1.0 + s.abs())
}

pub fn stability_functional(a: &State, b: &State, tol: f64) -> Result<f64> {
    a.phi.ensure_same_grid(&b.phi)?;
    let dtheta = a.theta.sub(&b.theta).dual_norm(tol)?;
    let dphi = a.phi.sub(&b.phi);
    let l2 = dphi.l2_norm();
    let h1 = dphi.h1_seminorm();
    let ds = a.sigma.sub(&b.sigma).l2_norm();
    Ok(dtheta * dtheta + l2 * l2 + 0.5 * h1 * h1 + ds * ds)
}

/// Outcome of a paired run.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub times: Vec<f64>,
    /// `ℰ(t_k)`, starting with `ℰ(0)` at `times[0]`.
    pub values: Vec<f64>,
    /// Least-squares slope of `ln ℰ` over the second half of the run.
    pub exponent: f64,
    /// Whether `ℰ(t_k) ≤ ℰ(0) e^{λ t_k} (1 + FIT_TOLERANCE)` held throughout.
    pub envelope_holds: bool,
}

impl DependenceReport {
    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn final_ratio(&self) -> f64 {
        let e0 = self.initial();
        if e0 == 0.0 {
            0.0
        } else {
            self.values[self.values.len() - 1] / e0
        }
    }
}

pub const FIT_TOLERANCE: f64 = 0.1;

const DUAL_TOL: f64 = 1e-12;

/// Smooth nonnegative bump in `[0, 1]`: `½(1 + Π_a cos(π x_a / L_a))`.
pub fn perturbation_profile(state: &State) -> crate::grid::Field {
    let g = state.grid();
    let ext = g.extent().to_vec();
    crate::grid::Field::from_fn(g, |x| {
        let mut c = 1.0;
        for (xa, la) in x.iter().zip(&ext) {
            c *= (std::f64::consts::PI * xa / la).cos();
        }
        0.5 * (1.0 + c)
    })
}

/// Perturbs `state` by `scale` along a smooth profile `w`, staying
/// admissible: `φ + δw`, `θ + δw`, `(1 − δ)σ + δw`.
pub fn perturb(state: &State, scale: f64) -> State {
    let w = perturbation_profile(state);
    let mut out = state.clone();
    out.phi.add_scaled(scale, &w);
    out.theta.add_scaled(scale, &w);
    out.sigma = state.sigma.scale(1.0 - scale);
    out.sigma.add_scaled(scale, &w);
    out
}

/// Runs `initial` and its perturbation side by side with fixed steps and
/// fits `ℰ(t) ≈ ℰ(0)e^{λt}`.
pub fn continuous_dependence_test(
    initial: &State,
    perturbation_scale: f64,
    t_final: f64,
    c: &StepControls,
    p: &ModelParams,
) -> Result<DependenceReport> {
    if !(0.0..1.0).contains(&perturbation_scale) {
        return Err(Error::validation(
            "perturbation_scale",
            format!("{perturbation_scale} must lie in [0, 1)"),
        ));
    }
    if !(t_final > initial.t) {
        return Err(Error::validation("t_final", "must exceed the initial time"));
    }
    c.validate()?;
    let mut a = initial.clone();
    let mut b = perturb(initial, perturbation_scale);
    let mut times = vec![a.t];
    let mut values = vec![stability_functional(&a, &b, DUAL_TOL)?];
    while a.t < t_final {
        let remaining = t_final - a.t;
        let landing = remaining <= c.dt * (1.0 + 1e-9);
        let step = if landing {
            c.with_dt(remaining)
        } else {
            c.clone()
        };
        let (na, _) = advance(&a, &step, p)?;
        let (nb, _) = advance(&b, &step, p)?;
        a = na;
        b = nb;
        if landing {
            a.t = t_final;
            b.t = t_final;
        }
        times.push(a.t);
        values.push(stability_functional(&a, &b, DUAL_TOL)?);
    }
    let exponent = fit_exponent(&times, &values, initial.t + 0.5 * (t_final - initial.t));
    let e0 = values[0];
    let envelope_holds = times.iter().zip(&values).all(|(&t, &e)| {
        e <= e0 * (exponent * (t - initial.t)).exp() * (1.0 + FIT_TOLERANCE) + f64::MIN_POSITIVE
    });
    Ok(DependenceReport {
        times,
        values,
        exponent,
        envelope_holds,
    })
}

/// Least-squares slope of `ln e` against `t` over samples with `t ≥ t_from`.
/// Returns 0 when the functional vanishes.
pub fn fit_exponent(times: &[f64], values: &[f64], t_from: f64) -> f64 {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &e)| t >= t_from && e > 0.0)
        .map(|(&t, &e)| (t, e.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if stt == 0.0 {
        0.0
    } else {
        sty / stt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};
    use std::sync::Arc;

    fn line(n: usize) -> Arc<Grid> {
        Arc::new(Grid::interval(n, 1.0).unwrap())
    }

    #[test]
    fn energy_examples() {
        let g = line(7);
        let p = ModelParams::default();
        assert_eq!(
            internal_energy(&State::constant(&g, 0.0, 0.0, 0.3), &p),
            0.0
        );
        let s = State::constant(&g, 0.5, 2.0, 0.1);
        assert!((internal_energy(&s, &p) - 2.0625).abs() < 1e-14);
        let mut s2 = s.clone();
        s2.sigma = Field::constant(&g, 0.9);
        assert_eq!(internal_energy(&s, &p), internal_energy(&s2, &p));
    }

    #[test]
    fn entropy_examples() {
        let g = line(5);
        let p = ModelParams::default();
        assert!(
            total_entropy(&State::constant(&g, 0.0, 1.0, 0.5), &p)
                .unwrap()
                .abs()
                < 1e-15
        );
        let s = State::constant(&g, 1.0, std::f64::consts::E, 0.5);
        assert!((total_entropy(&s, &p).unwrap() - 2.0).abs() < 1e-14);
        let shifted = State {
            phi: s.phi.map(|v| v + 0.25),
            ..s.clone()
        };
        let d = total_entropy(&shifted, &p).unwrap() - total_entropy(&s, &p).unwrap();
        assert!((d - 0.25).abs() < 1e-14);
        let cold = State::constant(&g, 0.0, 0.0, 0.5);
        assert!(matches!(
            total_entropy(&cold, &p),
            Err(Error::NonpositiveTemperature { .. })
        ));
        let rest = State::constant(&g, 0.0, 1.0, 1.0);
        assert_eq!(entropy_increment(&rest, &rest, &p).unwrap(), 0.0);
    }

    #[test]
    fn stability_functional_examples() {
        let g = line(9);
        let a = State {
            phi: Field::from_fn(&g, |x| x[0] * x[0]),
            theta: Field::from_fn(&g, |x| 1.0 + x[0]),
            sigma: Field::constant(&g, 0.3),
            t: 0.0,
        };
        assert_eq!(stability_functional(&a, &a, 1e-12).unwrap(), 0.0);
        let mut b = a.clone();
        b.sigma = a.sigma.map(|v| v + 0.1);
        assert!((stability_functional(&a, &b, 1e-12).unwrap() - 0.01).abs() < 1e-14);
        let mut c = a.clone();
        c.theta = a.theta.map(|v| v * 1.1);
        c.phi = a.phi.map(|v| v - 0.2);
        let ab = stability_functional(&a, &c, 1e-12).unwrap();
        let ba = stability_functional(&c, &a, 1e-12).unwrap();
        assert!((ab - ba).abs() < 1e-12 * ab);
        let bc = stability_functional(&b, &c, 1e-12).unwrap();
        let acv = stability_functional(&a, &b, 1e-12).unwrap();
        assert!(ab <= 2.0 * acv + 2.0 * bc);
    }

    #[test]
    fn zero_perturbation_keeps_functional_zero() {
        let g = line(16);
        let p = ModelParams::default();
        let s = State {
            phi: Field::from_fn(&g, |x| 0.5 + 0.2 * (std::f64::consts::PI * x[0]).cos()),
            theta: Field::constant(&g, 1.0),
            sigma: Field::constant(&g, 0.5),
            t: 0.0,
        };
        let c = StepControls {
            dt: 1e-2,
            ..Default::default()
        };
        let r = continuous_dependence_test(&s, 0.0, 0.1, &c, &p).unwrap();
        assert!(r.values.iter().all(|&e| e == 0.0));
        assert_eq!(r.exponent, 0.0);
    }

    #[test]
    fn perturbation_stays_admissible() {
        let g = Arc::new(Grid::new(&[8, 5], &[1.0, 2.0]).unwrap());
        let s = State::constant(&g, 0.0, 0.0, 1.0);
        let b = perturb(&s, 1e-3);
        assert!(b.is_admissible());
    }

    #[test]
    fn exponent_fit_recovers_exponential() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
        assert!((fit_exponent(&times, &values, 0.5) + 1.7).abs() < 1e-12);
    }
}
