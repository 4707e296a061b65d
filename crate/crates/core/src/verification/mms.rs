//! Manufactured solutions with hand-derived closed-form sources.
//!
//! Default case on a box with wave numbers `k_a = π/L_a` and
//! `b(x) = Σ_a cos(k_a x_a)`:
//!
//! ```text
//! φ* = ¼(2 + b) e^{−t}
//! θ* = ¼(2 + b)(1 + ½e^{−t})
//! σ* = ½ + ¼ b e^{−t}
//! ```
//!
//! Substituting into the three equations and keeping the defect gives
//!
//! ```text
//! g_φ = βφ*_t − εΔφ* + F'(φ*)/ε − θ* − (𝒫σ* − 𝒜)h(φ*)
//! g_θ = c_V θ*_t − κ'(θ*)|∇θ*|² − κ(θ*)Δθ* − β(φ*_t)² + θ*φ*_t
//! g_σ = σ*_t − Δσ* + 𝒞σ*h(φ*) − ℬ(σ_B − σ*)
//! ```
//!
//! with `φ*_t = −φ*`, `θ*_t = −⅛(2 + b)e^{−t}`, `σ*_t = −¼ b e^{−t}`,
//! `Δφ* = ¼e^{−t}Δb`, `Δθ* = ¼(1 + ½e^{−t})Δb`, `Δσ* = ¼e^{−t}Δb`,
//! `|∇θ*|² = (¼(1 + ½e^{−t}))²|∇b|²`, `Δb = −Σ k_a² cos(k_a x_a)` and
//! `|∇b|² = Σ k_a² sin²(k_a x_a)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::constitutive::{conductivity, conductivity_prime, double_well_prime, ModelParams};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::stepper::{run_with, Forcing, State, StepControls};

/// Final time of the convergence runs.
pub const MMS_T_FINAL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// The cosine triple documented at the module level.
    Cosine,
    /// A spatially and temporally constant triple `(φ, θ, σ)`.
    Constant([f64; 3]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    pub profile: Profile,
    pub extent: Vec<f64>,
    pub params: ModelParams,
    /// Sources are replaced by zero when set.
    pub zero_sources: bool,
}

impl ManufacturedCase {
    /// The cosine case on `[0, 1]`.
    pub fn default_case(params: &ModelParams) -> Self {
        Self::cosine(&[1.0], params)
    }

    pub fn cosine(extent: &[f64], params: &ModelParams) -> Self {
        Self {
            profile: Profile::Cosine,
            extent: extent.to_vec(),
            params: params.clone(),
            zero_sources: false,
        }
    }

    pub fn constant(extent: &[f64], triple: [f64; 3], params: &ModelParams) -> Self {
        Self {
            profile: Profile::Constant(triple),
            extent: extent.to_vec(),
            params: params.clone(),
            zero_sources: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    fn wave(&self, a: usize) -> f64 {
        PI / self.extent[a]
    }

    /// `(b, Δb, |∇b|²)` at `x`.
    fn basis(&self, x: &[f64]) -> (f64, f64, f64) {
        let (mut b, mut lap, mut grad2) = (0.0, 0.0, 0.0);
        for (a, &xa) in x.iter().enumerate() {
            let k = self.wave(a);
            let (s, c) = (k * xa).sin_cos();
            b += c;
            lap -= k * k * c;
            grad2 += k * k * s * s;
        }
        (b, lap, grad2)
    }

    /// `(φ*, θ*, σ*)` at `(x, t)`.
    pub fn exact(&self, x: &[f64], t: f64) -> [f64; 3] {
        match &self.profile {
            Profile::Constant(v) => *v,
            Profile::Cosine => {
                let (b, _, _) = self.basis(x);
                let e = (-t).exp();
                [
                    0.25 * (2.0 + b) * e,
                    0.25 * (2.0 + b) * (1.0 + 0.5 * e),
                    0.5 + 0.25 * b * e,
                ]
            }
        }
    }

    /// Gradients of the three exact fields at `(x, t)`, axis by axis.
    pub fn exact_gradient(&self, x: &[f64], t: f64) -> Vec<[f64; 3]> {
        match &self.profile {
            Profile::Constant(_) => vec![[0.0; 3]; x.len()],
            Profile::Cosine => {
                let e = (-t).exp();
                x.iter()
                    .enumerate()
                    .map(|(a, &xa)| {
                        let k = self.wave(a);
                        let db = -k * (k * xa).sin();
                        [0.25 * db * e, 0.25 * db * (1.0 + 0.5 * e), 0.25 * db * e]
                    })
                    .collect()
            }
        }
    }

    /// `(g_φ, g_θ, g_σ)` at `(x, t)`.
    pub fn sources(&self, x: &[f64], t: f64) -> [f64; 3] {
        if self.zero_sources {
            return [0.0; 3];
        }
        let p = &self.params;
        let q = p.conductivity_exponent;
        let [phi, theta, sigma] = self.exact(x, t);
        let (phi_t, theta_t, sigma_t, lap_phi, lap_theta, lap_sigma, grad_theta2) =
            match &self.profile {
                Profile::Constant(_) => (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
                Profile::Cosine => {
                    let (b, lap_b, grad_b2) = self.basis(x);
                    let e = (-t).exp();
                    let a_theta = 0.25 * (1.0 + 0.5 * e);
                    (
                        -phi,
                        -0.125 * (2.0 + b) * e,
                        -0.25 * b * e,
                        0.25 * e * lap_b,
                        a_theta * lap_b,
                        0.25 * e * lap_b,
                        a_theta * a_theta * grad_b2,
                    )
                }
            };
        let h = p.h(phi);
        let g_phi = p.relaxation * phi_t - p.interface * lap_phi
            + double_well_prime(phi) / p.interface
            - theta
            - (p.proliferation * sigma - p.apoptosis) * h;
        let g_theta = p.specific_heat * theta_t
            - conductivity_prime(theta, q) * grad_theta2
            - conductivity(theta, q) * lap_theta
            - p.relaxation * phi_t * phi_t
            + theta * phi_t;
        let g_sigma = sigma_t - lap_sigma + p.consumption * sigma * h
            - p.transfer * (p.vascular_nutrient - sigma);
        [g_phi, g_theta, g_sigma]
    }

    /// Whether the exact triple stays in the admissible box for `t ∈ [0, 2]`.
    pub fn admissible(&self) -> bool {
        match &self.profile {
            Profile::Constant([phi, theta, sigma]) => {
                *phi >= 0.0 && *theta >= 0.0 && (0.0..=1.0).contains(sigma)
            }
            // 2 + b ≥ 0 and |b| ≤ 2 need at most two axes
            Profile::Cosine => self.dim() <= 2,
        }
    }

    pub fn grid(&self, cells_per_axis: usize) -> Result<Arc<Grid>> {
        let cells = vec![cells_per_axis; self.dim()];
        Ok(Arc::new(Grid::new(&cells, &self.extent)?))
    }

    /// Exact state sampled at cell centers.
    pub fn sample(&self, grid: &Arc<Grid>, t: f64) -> State {
        let pick = |k: usize| Field::from_fn(grid, |x| self.exact(x, t)[k]);
        State {
            phi: pick(0),
            theta: pick(1),
            sigma: pick(2),
            t,
        }
    }
}

impl Forcing for ManufacturedCase {
    fn sources(&self, grid: &Arc<Grid>, t: f64) -> (Field, Field, Field) {
        let mut g = [Vec::new(), Vec::new(), Vec::new()];
        let mut x = vec![0.0; grid.dim()];
        for i in 0..grid.len() {
            grid.center_into(i, &mut x);
            let s = ManufacturedCase::sources(self, &x, t);
            for k in 0..3 {
                g[k].push(s[k]);
            }
        }
        let [a, b, c] = g;
        (
            Field::new(grid, a).expect("finite sources"),
            Field::new(grid, b).expect("finite sources"),
            Field::new(grid, c).expect("finite sources"),
        )
    }
}

/// Errors and observed orders of a spatial refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub resolutions: Vec<usize>,
    pub dts: Vec<f64>,
    /// l2 errors `[φ, θ, σ]` at the final time, per resolution.
    pub errors: Vec<[f64; 3]>,
    /// `log₂` ratios of successive errors, normalized by the refinement factor.
    pub orders: Vec<[f64; 3]>,
}

impl ConvergenceReport {
    /// Per-field pass flags: every observed order lies in `[lo, hi]`.
    pub fn pass_flags(&self, lo: f64, hi: f64) -> [bool; 3] {
        let mut flags = [true; 3];
        for o in &self.orders {
            for k in 0..3 {
                flags[k] &= o[k] >= lo && o[k] <= hi;
            }
        }
        flags
    }

    /// Smallest observed order per field.
    pub fn min_orders(&self) -> [f64; 3] {
        let mut m = [f64::INFINITY; 3];
        for o in &self.orders {
            for k in 0..3 {
                m[k] = m[k].min(o[k]);
            }
        }
        m
    }
}

/// Errors and observed orders of a time-step refinement study on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalReport {
    pub cells: usize,
    pub dts: Vec<f64>,
    pub errors: Vec<[f64; 3]>,
    pub orders: Vec<[f64; 3]>,
}

fn field_errors(state: &State, exact: &State) -> [f64; 3] {
    [
        state.phi.sub(&exact.phi).l2_norm(),
        state.theta.sub(&exact.theta).l2_norm(),
        state.sigma.sub(&exact.sigma).l2_norm(),
    ]
}

fn orders(errors: &[[f64; 3]], ratios: &[f64]) -> Vec<[f64; 3]> {
    errors
        .windows(2)
        .zip(ratios)
        .map(|(w, &r)| {
            let mut o = [0.0; 3];
            for k in 0..3 {
                o[k] = (w[0][k] / w[1][k]).ln() / r.ln();
            }
            o
        })
        .collect()
}

/// Integrates the forced system from the sampled initial data and returns the
/// l2 errors at `t_final`.
pub fn mms_errors(
    case: &ManufacturedCase,
    cells: usize,
    dt: f64,
    t_final: f64,
    c: &StepControls,
) -> Result<[f64; 3]> {
    let grid = case.grid(cells)?;
    let initial = case.sample(&grid, 0.0);
    let controls = c.with_dt(dt);
    let end = run_with(
        &initial,
        t_final,
        &controls,
        &case.params,
        Some(case),
        |_, _| Ok(()),
    )?;
    Ok(field_errors(&end, &case.sample(&grid, t_final)))
}

/// Spatial refinement study at `t_final = 0.5`.
pub fn run_mms(
    case: &ManufacturedCase,
    resolutions: &[usize],
    dt_rule: impl Fn(usize) -> f64 + Sync,
    c: &StepControls,
) -> Result<ConvergenceReport> {
    run_mms_to(case, resolutions, dt_rule, c, MMS_T_FINAL)
}

pub fn run_mms_to(
    case: &ManufacturedCase,
    resolutions: &[usize],
    dt_rule: impl Fn(usize) -> f64 + Sync,
    c: &StepControls,
    t_final: f64,
) -> Result<ConvergenceReport> {
    if resolutions.len() < 2 || resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(
            "resolutions",
            "need at least two strictly increasing entries",
        ));
    }
    let dts: Vec<f64> = resolutions.iter().map(|&n| dt_rule(n)).collect();
    let results: Vec<Result<[f64; 3]>> = std::thread::scope(|scope| {
        let handles: Vec<_> = resolutions
            .iter()
            .zip(&dts)
            .map(|(&n, &dt)| scope.spawn(move || mms_errors(case, n, dt, t_final, c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("mms worker panicked"))
            .collect()
    });
    let errors = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = resolutions
        .windows(2)
        .map(|w| w[1] as f64 / w[0] as f64)
        .collect();
    Ok(ConvergenceReport {
        resolutions: resolutions.to_vec(),
        orders: orders(&errors, &ratios),
        dts,
        errors,
    })
}

/// Time-step refinement study on a fixed grid; `dts` must be decreasing.
pub fn run_mms_temporal(
    case: &ManufacturedCase,
    cells: usize,
    dts: &[f64],
    c: &StepControls,
    t_final: f64,
) -> Result<TemporalReport> {
    if dts.len() < 2 || dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::validation(
            "dts",
            "need at least two strictly decreasing steps",
        ));
    }
    let errors = dts
        .iter()
        .map(|&dt| mms_errors(case, cells, dt, t_final, c))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = dts.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(TemporalReport {
        cells,
        dts: dts.to_vec(),
        orders: orders(&errors, &ratios),
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent check of the hand-derived sources: every derivative is
    /// replaced by a central difference of the closed forms.
    fn fd_sources(case: &ManufacturedCase, x: &[f64], t: f64) -> [f64; 3] {
        let p = &case.params;
        let q = p.conductivity_exponent;
        let dt = 1e-5;
        let dx = 1e-4;
        let u = |x: &[f64], t: f64| case.exact(x, t);
        let time_d: Vec<f64> = (0..3)
            .map(|k| (u(x, t + dt)[k] - u(x, t - dt)[k]) / (2.0 * dt))
            .collect();
        let mut lap = [0.0; 3];
        let mut flux_div = 0.0;
        for a in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[a] += dx;
            xm[a] -= dx;
            let (up, u0, um) = (u(&xp, t), u(x, t), u(&xm, t));
            for k in 0..3 {
                lap[k] += (up[k] - 2.0 * u0[k] + um[k]) / (dx * dx);
            }
            // div(κ(θ)∇θ) via half-point fluxes
            let mut xph = x.to_vec();
            let mut xmh = x.to_vec();
            xph[a] += 0.5 * dx;
            xmh[a] -= 0.5 * dx;
            let kp = conductivity(u(&xph, t)[1], q);
            let km = conductivity(u(&xmh, t)[1], q);
            flux_div += (kp * (up[1] - u0[1]) - km * (u0[1] - um[1])) / (dx * dx);
        }
        let [phi, theta, sigma] = u(x, t);
        let h = p.h(phi);
        [
            p.relaxation * time_d[0] - p.interface * lap[0] + double_well_prime(phi) / p.interface
                - theta
                - (p.proliferation * sigma - p.apoptosis) * h,
            p.specific_heat * time_d[1] - flux_div - p.relaxation * time_d[0] * time_d[0]
                + theta * time_d[0],
            time_d[2] - lap[2] + p.consumption * sigma * h
                - p.transfer * (p.vascular_nutrient - sigma),
        ]
    }

    #[test]
    fn sources_match_finite_differences() {
        let params = ModelParams {
            conductivity_exponent: 3.0,
            relaxation: 1.3,
            interface: 0.8,
            specific_heat: 1.7,
            ..Default::default()
        };
        for extent in [vec![1.0], vec![1.0, 0.7]] {
            let case = ManufacturedCase::cosine(&extent, &params);
            for &(x0, t) in &[(0.5, 0.0), (0.13, 0.4), (0.91, 1.7)] {
                let x: Vec<f64> = extent.iter().map(|l| x0 * l).collect();
                let a = case.sources(&x, t);
                let b = fd_sources(&case, &x, t);
                for k in 0..3 {
                    assert!(
                        (a[k] - b[k]).abs() < 1e-6 * (1.0 + a[k].abs()),
                        "{k}: {a:?} vs {b:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn phase_source_at_midpoint() {
        // x = ½, t = 0: b = Δb = 0, φ* = ½, θ* = ¾, σ* = ½, φ*_t = −½, F'(½) = 0,
        // and 𝒫σ* − 𝒜 = 0 for the defaults, so g_φ = −½ − ¾
        let case = ManufacturedCase::default_case(&ModelParams::default());
        let expected = -1.25;
        assert!((case.sources(&[0.5], 0.0)[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn zero_normal_derivatives_on_boundary() {
        let case = ManufacturedCase::cosine(&[1.0, 2.0], &ModelParams::default());
        for t in [0.0, 0.3, 2.0] {
            for x in [[0.0, 0.7], [1.0, 1.1]] {
                assert!(case.exact_gradient(&x, t)[0]
                    .iter()
                    .all(|g| g.abs() < 1e-15));
            }
            for x in [[0.2, 0.0], [0.6, 2.0]] {
                assert!(case.exact_gradient(&x, t)[1]
                    .iter()
                    .all(|g| g.abs() < 1e-15));
            }
        }
    }

    #[test]
    fn cosine_case_admissible_and_finite() {
        let case = ManufacturedCase::default_case(&ModelParams::default());
        assert!(case.admissible());
        for i in 0..=40 {
            for j in 0..=20 {
                let x = [i as f64 / 40.0];
                let t = j as f64 / 10.0;
                let [phi, theta, sigma] = case.exact(&x, t);
                assert!(phi >= 0.0 && theta > 0.0 && (0.0..=1.0).contains(&sigma));
                assert!(case.sources(&x, t).iter().all(|g| g.is_finite()));
            }
        }
        assert!(!ManufacturedCase::cosine(&[1.0; 3], &ModelParams::default()).admissible());
    }

    #[test]
    fn steady_constant_has_no_sources() {
        let p = ModelParams::default();
        let rest = ManufacturedCase::constant(&[1.0], [0.0, 0.0, p.vascular_nutrient], &p);
        assert_eq!(rest.sources(&[0.3], 0.7), [0.0; 3]);
    }

    #[test]
    fn constant_cases_are_reproduced_to_roundoff() {
        let p = ModelParams::default();
        let c = StepControls {
            newton_tol: 1e-12,
            linear_tol: 1e-14,
            ..Default::default()
        };
        let mut rest = ManufacturedCase::constant(&[1.0], [0.0, 0.0, p.vascular_nutrient], &p);
        rest.zero_sources = true;
        let e = mms_errors(&rest, 8, 0.01, 0.2, &c).unwrap();
        assert!(e.iter().all(|&v| v < 1e-14), "{e:?}");
        let generic = ManufacturedCase::constant(&[1.0, 1.0], [0.4, 0.8, 0.3], &p);
        let e = mms_errors(&generic, 6, 0.01, 0.2, &c).unwrap();
        assert!(e.iter().all(|&v| v < 1e-12), "{e:?}");
    }

    #[test]
    fn rejects_bad_resolution_lists() {
        let case = ManufacturedCase::default_case(&ModelParams::default());
        let c = StepControls::default();
        assert!(run_mms(&case, &[16], |_| 1e-3, &c).is_err());
        assert!(run_mms(&case, &[32, 16], |_| 1e-3, &c).is_err());
    }
}
