//! Jacobi-preconditioned conjugate gradients for the SPD stencil systems.

use crate::error::{Error, Result};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    #[allow(dead_code)]
    pub relative_residual: f64,
}

/// Solves `A x = b` for SPD `A` given as a matrix-free product, starting from
/// the contents of `x`. Stops once `‖b − Ax‖ ≤ rtol·‖b‖` (Euclidean).
pub(crate) fn conjugate_gradient<F>(
    apply: F,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    debug_assert_eq!(diag.len(), n);
    debug_assert_eq!(x.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let target = rtol * b_norm;

    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut res = norm(&r);
    if res <= target {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: res / b_norm,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = ax;

    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // lost positive definiteness to roundoff; nothing better is reachable
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r);
        if res <= target {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: res / b_norm,
            });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::IterationLimit {
        solver: "conjugate gradient",
        iterations: max_iter,
        residual: res / b_norm,
    })
}
