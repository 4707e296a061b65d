//! Dense small-system oracle for the three substeps. The Laplacian matrix is
//! assembled from cell-center geometry (two cells couple when their integer
//! coordinates differ by one along a single axis), and each nonlinear system
//! is solved by damped Newton with a dense LU factorization.

use nalgebra::{DMatrix, DVector};

use crate::constitutive::{conductivity, double_well_prime_concave, kirchhoff, ModelParams};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::stepper::State;

/// Largest problem the oracle accepts.
pub const MAX_DENSE_CELLS: usize = 8;

const DENSE_TOL: f64 = 1e-13;
const DENSE_MAX_ITER: usize = 100;
const STAGNATION_TOL: f64 = 1e-12;

/// The substep to reproduce.
#[derive(Debug, Clone, Copy)]
pub enum DenseSubstep<'a> {
    Phase {
        state: &'a State,
        theta_used: &'a Field,
        sigma_used: &'a Field,
    },
    Nutrient {
        state: &'a State,
        phi_used: &'a Field,
    },
    Temperature {
        state: &'a State,
        m: &'a Field,
    },
}

impl DenseSubstep<'_> {
    fn state(&self) -> &State {
        match self {
            DenseSubstep::Phase { state, .. }
            | DenseSubstep::Nutrient { state, .. }
            | DenseSubstep::Temperature { state, .. } => state,
        }
    }
}

/// Dense `Δ_h` with zero-flux closure, built from the cell centers only.
pub fn dense_laplacian(grid: &Grid) -> DMatrix<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let coords: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            grid.center(i)
                .iter()
                .zip(h)
                .map(|(x, h)| (x / h - 0.5).round() as i64)
                .collect()
        })
        .collect();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let diff: Vec<i64> = coords[i]
                .iter()
                .zip(&coords[j])
                .map(|(a, b)| a - b)
                .collect();
            let nonzero: Vec<usize> = (0..diff.len()).filter(|&a| diff[a] != 0).collect();
            if nonzero.len() == 1 && diff[nonzero[0]].abs() == 1 {
                let w = 1.0 / (h[nonzero[0]] * h[nonzero[0]]);
                l[(i, j)] = w;
                l[(i, i)] -= w;
            }
        }
    }
    l
}

fn dense_newton<R, J>(
    residual: R,
    jacobian: J,
    x0: DVector<f64>,
    scale: f64,
) -> Result<DVector<f64>>
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let tol = DENSE_TOL * (1.0 + scale);
    let mut x = x0;
    let mut r = residual(&x);
    for _ in 0..DENSE_MAX_ITER {
        let rn = r.norm();
        if rn <= tol {
            return Ok(x);
        }
        let delta = jacobian(&x)
            .lu()
            .solve(&(-&r))
            .ok_or(Error::NewtonDivergence {
                substep: "dense oracle",
                iterations: 0,
                residual: rn,
            })?;
        let mut lambda = 1.0;
        loop {
            let trial = &x + lambda * &delta;
            let rt = residual(&trial);
            if rt.norm() < rn {
                x = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                // residual at its roundoff floor; the Newton correction bounds the error
                if delta.amax() <= STAGNATION_TOL * (1.0 + x.amax()) {
                    return Ok(x);
                }
                return Err(Error::NewtonDivergence {
                    substep: "dense oracle",
                    iterations: 0,
                    residual: rn,
                });
            }
        }
    }
    Err(Error::NewtonDivergence {
        substep: "dense oracle",
        iterations: DENSE_MAX_ITER,
        residual: r.norm(),
    })
}

/// Solves the assembled substep system on at most eight cells.
pub fn dense_small_solve(problem: DenseSubstep<'_>, dt: f64, p: &ModelParams) -> Result<Field> {
    let state = problem.state();
    let grid = state.grid();
    let n = grid.len();
    if n > MAX_DENSE_CELLS {
        return Err(Error::validation(
            "dense oracle",
            format!("{n} cells exceed the limit of {MAX_DENSE_CELLS}"),
        ));
    }
    if !(dt > 0.0) {
        return Err(Error::validation("dt", "must be > 0"));
    }
    let lap = dense_laplacian(grid);
    let vec_of = |f: &Field| DVector::from_column_slice(f.values());

    let x = match problem {
        DenseSubstep::Phase {
            state,
            theta_used,
            sigma_used,
        } => {
            let a = p.relaxation / dt;
            let eps = p.interface;
            let old = vec_of(&state.phi);
            let rhs = DVector::from_fn(n, |i, _| {
                a * old[i] - double_well_prime_concave(old[i]) / eps
                    + theta_used.values()[i]
                    + (p.proliferation * sigma_used.values()[i] - p.apoptosis) * p.h(old[i])
            });
            let residual = |x: &DVector<f64>| {
                let cubic = x.map(|v| (4.0 * v * v * v + 2.0 * v) / eps);
                a * x - eps * (&lap * x) + cubic - &rhs
            };
            let jacobian = |x: &DVector<f64>| {
                let d = x.map(|v| a + (12.0 * v * v + 2.0) / eps);
                DMatrix::from_diagonal(&d) - eps * &lap
            };
            dense_newton(residual, jacobian, old.clone(), rhs.norm())?
        }
        DenseSubstep::Nutrient { state, phi_used } => {
            let inv_dt = 1.0 / dt;
            let d = DVector::from_fn(n, |i, _| {
                inv_dt + p.transfer + p.consumption * p.h(phi_used.values()[i])
            });
            let matrix = DMatrix::from_diagonal(&d) - &lap;
            let rhs = vec_of(&state.sigma) * inv_dt
                + DVector::from_element(n, p.transfer * p.vascular_nutrient);
            let residual = |x: &DVector<f64>| &matrix * x - &rhs;
            let jacobian = |_: &DVector<f64>| matrix.clone();
            dense_newton(residual, jacobian, vec_of(&state.sigma), rhs.norm())?
        }
        DenseSubstep::Temperature { state, m } => {
            let q = p.conductivity_exponent;
            let cv_dt = p.specific_heat / dt;
            let d = DVector::from_fn(n, |i, _| cv_dt + m.values()[i]);
            let min_diagonal = d.min();
            if !(min_diagonal > 0.0) {
                return Err(Error::DtTooLarge { min_diagonal });
            }
            let rhs = DVector::from_fn(n, |i, _| {
                let mi = m.values()[i];
                cv_dt * state.theta.values()[i] + p.relaxation * mi * mi
            });
            let residual = |x: &DVector<f64>| {
                let k = x.map(|v| kirchhoff(v, q));
                d.component_mul(x) - &lap * k - &rhs
            };
            let jacobian = |x: &DVector<f64>| {
                let kappa = DMatrix::from_diagonal(&x.map(|v| conductivity(v, q)));
                DMatrix::from_diagonal(&d) - &lap * kappa
            };
            dense_newton(residual, jacobian, vec_of(&state.theta), rhs.norm())?
        }
    };
    Field::new(grid, x.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn dense_laplacian_matches_stencil() {
        for (cells, ext) in [
            (vec![3], vec![1.0]),
            (vec![2, 3], vec![1.0, 0.5]),
            (vec![2, 2, 2], vec![1.0, 2.0, 3.0]),
        ] {
            let g = Grid::new(&cells, &ext).unwrap();
            let l = dense_laplacian(&g);
            for j in 0..g.len() {
                let mut e = vec![0.0; g.len()];
                e[j] = 1.0;
                let mut out = vec![0.0; g.len()];
                g.laplacian_into(&e, &mut out);
                for i in 0..g.len() {
                    assert!((l[(i, j)] - out[i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn one_cell_temperature_closed_form() {
        // spatially constant data: Δ_h K(θ) vanishes and the step reduces to
        // θ = (θⁿ/Δt + βm²)/(1/Δt + m)
        let g = Arc::new(Grid::new(&[2], &[1.0]).unwrap());
        let p = ModelParams::default();
        let s = State::constant(&g, 0.0, 1e-6, 0.5);
        let m = Field::constant(&g, 0.3);
        let dt = 0.1;
        let out =
            dense_small_solve(DenseSubstep::Temperature { state: &s, m: &m }, dt, &p).unwrap();
        let expected = (1e-6 / dt + 0.09) / (1.0 / dt + 0.3);
        assert!(out.values().iter().all(|&v| (v - expected).abs() < 1e-13));
    }

    #[test]
    fn refuses_singular_structure() {
        let g = Arc::new(Grid::new(&[2], &[1.0]).unwrap());
        let p = ModelParams::default();
        let s = State::constant(&g, 0.0, 1.0, 0.5);
        let dt = 0.5;
        let m = Field::constant(&g, -2.0);
        assert!(matches!(
            dense_small_solve(DenseSubstep::Temperature { state: &s, m: &m }, dt, &p),
            Err(Error::DtTooLarge { .. })
        ));
    }

    #[test]
    fn refuses_large_grids() {
        let g = Arc::new(Grid::new(&[9], &[1.0]).unwrap());
        let s = State::constant(&g, 0.0, 1.0, 0.5);
        let p = ModelParams::default();
        assert!(dense_small_solve(
            DenseSubstep::Nutrient {
                state: &s,
                phi_used: &s.phi
            },
            0.1,
            &p
        )
        .is_err());
    }
}
