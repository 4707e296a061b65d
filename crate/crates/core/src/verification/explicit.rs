//! Forward-Euler reference integrator: same spatial operators, no splitting,
//! no Newton. Stable only for `Δt ≲ h²/(2·dim·(1 + max κ))`.

use crate::constitutive::{double_well_prime, kirchhoff, ModelParams};
use crate::error::{Error, Result};
use crate::stepper::{run, State, StepControls};

/// Largest step the explicit update tolerates on `state`'s grid for
/// conductivities up to `max_kappa`.
pub fn explicit_stable_dt(state: &State, max_kappa: f64) -> f64 {
    let g = state.grid();
    let h_min = g.spacing().iter().copied().fold(f64::INFINITY, f64::min);
    h_min * h_min / (2.0 * g.dim() as f64 * (1.0 + max_kappa))
}

pub fn explicit_reference(
    initial: &State,
    t_final: f64,
    dt_tiny: f64,
    p: &ModelParams,
) -> Result<State> {
    if !(dt_tiny > 0.0) {
        return Err(Error::validation("dt_tiny", "must be > 0"));
    }
    if !(t_final >= initial.t) {
        return Err(Error::validation("t_final", "precedes the initial time"));
    }
    let g = initial.grid().clone();
    let n = g.len();
    let q = p.conductivity_exponent;
    let mut phi = initial.phi.values().to_vec();
    let mut theta = initial.theta.values().to_vec();
    let mut sigma = initial.sigma.values().to_vec();
    let mut lap_phi = vec![0.0; n];
    let mut lap_k = vec![0.0; n];
    let mut lap_sigma = vec![0.0; n];
    let mut k = vec![0.0; n];
    let mut t = initial.t;

    while t < t_final {
        let remaining = t_final - t;
        let landing = remaining <= dt_tiny * (1.0 + 1e-9);
        let dt = if landing { remaining } else { dt_tiny };
        for i in 0..n {
            k[i] = kirchhoff(theta[i], q);
        }
        g.laplacian_into(&phi, &mut lap_phi);
        g.laplacian_into(&k, &mut lap_k);
        g.laplacian_into(&sigma, &mut lap_sigma);
        for i in 0..n {
            let (ph, th, sg) = (phi[i], theta[i], sigma[i]);
            let m = (p.interface * lap_phi[i] - double_well_prime(ph) / p.interface
                + th
                + p.growth_source(ph, sg))
                / p.relaxation;
            let theta_t = (lap_k[i] + p.relaxation * m * m - m * th) / p.specific_heat;
            let sigma_t = lap_sigma[i] - p.consumption * sg * p.h(ph)
                + p.transfer * (p.vascular_nutrient - sg);
            phi[i] = ph + dt * m;
            theta[i] = th + dt * theta_t;
            sigma[i] = sg + dt * sigma_t;
        }
        t = if landing { t_final } else { t + dt };
        if phi
            .iter()
            .chain(&theta)
            .chain(&sigma)
            .any(|v| !v.is_finite())
        {
            return Err(Error::OracleInstability { t });
        }
    }
    State::new(
        crate::grid::Field::new(&g, phi)?,
        crate::grid::Field::new(&g, theta)?,
        crate::grid::Field::new(&g, sigma)?,
        t,
    )
}

/// Implicit runs at several step sizes measured against one explicit
/// reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub dt_tiny: f64,
    pub dts: Vec<f64>,
    /// `(Σ‖u_k − v_k‖²)^½ / (Σ‖v_k‖²)^½` over the three fields.
    pub relative_errors: Vec<f64>,
}

/// Step size for the explicit reference: `preferred`, reduced to half the
/// stability bound for conductivities up to twice the initial maximum.
pub fn reference_dt(initial: &State, preferred: f64, p: &ModelParams) -> f64 {
    let theta_max = initial
        .theta
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let kappa = crate::constitutive::conductivity(2.0 * theta_max + 1.0, p.conductivity_exponent);
    preferred.min(0.5 * explicit_stable_dt(initial, kappa))
}

pub fn compare_with_explicit(
    initial: &State,
    t_final: f64,
    dts: &[f64],
    dt_tiny: f64,
    c: &StepControls,
    p: &ModelParams,
) -> Result<OracleReport> {
    let reference = explicit_reference(initial, t_final, dt_tiny, p)?;
    let norm2 = |s: &State| {
        [&s.phi, &s.theta, &s.sigma]
            .iter()
            .map(|f| f.l2_norm().powi(2))
            .sum::<f64>()
    };
    let ref_norm = norm2(&reference).sqrt().max(f64::MIN_POSITIVE);
    let mut relative_errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let end = run(initial, t_final, &c.with_dt(dt), p, |_, _| Ok(()))?;
        let diff = State {
            phi: end.phi.sub(&reference.phi),
            theta: end.theta.sub(&reference.theta),
            sigma: end.sigma.sub(&reference.sigma),
            t: end.t,
        };
        relative_errors.push(norm2(&diff).sqrt() / ref_norm);
    }
    Ok(OracleReport {
        dt_tiny,
        dts: dts.to_vec(),
        relative_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};
    use std::sync::Arc;

    #[test]
    fn rest_state_is_fixed() {
        let g = Arc::new(Grid::interval(16, 1.0).unwrap());
        let p = ModelParams::default();
        let s = State::rest(&g, &p);
        let out = explicit_reference(&s, 0.01, 1e-4, &p).unwrap();
        assert_eq!(out.phi, s.phi);
        assert_eq!(out.theta, s.theta);
        assert!(out.sigma.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert_eq!(out.t, 0.01);
    }

    #[test]
    fn detects_blow_up() {
        let g = Arc::new(Grid::interval(64, 1.0).unwrap());
        let p = ModelParams::default();
        let s = State {
            phi: Field::from_fn(&g, |x| if x[0] < 0.5 { 1.0 } else { 0.0 }),
            theta: Field::constant(&g, 1.0),
            sigma: Field::constant(&g, 0.5),
            t: 0.0,
        };
        assert!(matches!(
            explicit_reference(&s, 1.0, 1e-2, &p),
            Err(Error::OracleInstability { .. })
        ));
    }
}
