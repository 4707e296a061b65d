//! Uniform cell-centered box grids (dimension 1–3) with homogeneous Neumann
//! closure, and the scalar [`Field`] carried on them.
//!
//! Cells are stored row-major: axis 0 varies slowest. The Laplacian is the
//! `2·dim + 1` point stencil with mirrored ghost cells, so every boundary face
//! carries zero flux and `Σ_i (Δ_h u)_i = 0` holds exactly.
//!
//! Norm conventions: `‖u‖² = Σ u_i² |cell|`, `|u|²_{1} = Σ_faces (u_j − u_i)²/h² |cell|`
//! and `‖u‖²_V = ‖u‖² + |u|²_1`. The dual norm is taken with respect to that
//! `V` norm through the discrete Helmholtz inverse `N = (−Δ_h + I)⁻¹`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::conjugate_gradient;

/// Default relative tolerance of the stencil CG solves.
pub const DEFAULT_LINEAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    cells: Vec<usize>,
    extent: Vec<f64>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
    cell_volume: f64,
}

impl Grid {
    pub fn new(cells: &[usize], extent: &[f64]) -> Result<Self> {
        let dim = cells.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::validation(
                "grid",
                format!("dimension {dim} not in 1..=3"),
            ));
        }
        if extent.len() != dim {
            return Err(Error::validation(
                "grid",
                format!("{} extents given for {dim} axes", extent.len()),
            ));
        }
        if let Some(n) = cells.iter().find(|&&n| n < 2) {
            return Err(Error::validation(
                "grid",
                format!("{n} cells on an axis, need ≥ 2"),
            ));
        }
        if let Some(l) = extent.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::validation("grid", format!("extent {l} must be > 0")));
        }
        let spacing: Vec<f64> = cells
            .iter()
            .zip(extent)
            .map(|(&n, &l)| l / n as f64)
            .collect();
        let mut strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * cells[a + 1];
        }
        Ok(Self {
            len: cells.iter().product(),
            cell_volume: spacing.iter().product(),
            cells: cells.to_vec(),
            extent: extent.to_vec(),
            spacing,
            strides,
        })
    }

    /// Shorthand for `[0, length]` split into `cells` cells.
    pub fn interval(cells: usize, length: f64) -> Result<Self> {
        Self::new(&[cells], &[length])
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Measure of the whole box.
    pub fn measure(&self) -> f64 {
        self.extent.iter().product()
    }

    /// Index of cell `i` along `axis`.
    #[inline]
    pub fn axis_index(&self, cell: usize, axis: usize) -> usize {
        (cell / self.strides[axis]) % self.cells[axis]
    }

    /// Cell center of cell `i`, written into `out` (length `dim`).
    pub fn center_into(&self, cell: usize, out: &mut [f64]) {
        for (a, x) in out.iter_mut().enumerate().take(self.dim()) {
            *x = (self.axis_index(cell, a) as f64 + 0.5) * self.spacing[a];
        }
    }

    pub fn center(&self, cell: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.center_into(cell, &mut x);
        x
    }

    /// Visits each interior face once as `(lower cell, upper cell, axis)`.
    pub fn for_each_face(&self, mut f: impl FnMut(usize, usize, usize)) {
        for a in 0..self.dim() {
            let s = self.strides[a];
            let n = self.cells[a];
            for i in 0..self.len {
                if self.axis_index(i, a) + 1 < n {
                    f(i, i + s, a);
                }
            }
        }
    }

    /// `(Δ_h u)_i = Σ_faces (u_j − u_i)/h²` with zero flux on the boundary.
    pub fn laplacian_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.len);
        debug_assert_eq!(out.len(), self.len);
        out.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..self.dim() {
            let s = self.strides[a];
            let n = self.cells[a];
            let w = 1.0 / (self.spacing[a] * self.spacing[a]);
            for i in 0..self.len {
                let k = self.axis_index(i, a);
                let mut acc = 0.0;
                if k > 0 {
                    acc += u[i - s] - u[i];
                }
                if k + 1 < n {
                    acc += u[i + s] - u[i];
                }
                out[i] += w * acc;
            }
        }
    }

    /// Diagonal of the Laplacian stencil (nonpositive).
    pub fn laplacian_diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.len];
        for a in 0..self.dim() {
            let n = self.cells[a];
            let w = 1.0 / (self.spacing[a] * self.spacing[a]);
            for (i, d) in d.iter_mut().enumerate() {
                let k = self.axis_index(i, a);
                let neighbours = (k > 0) as usize + (k + 1 < n) as usize;
                *d -= w * neighbours as f64;
            }
        }
        d
    }

    /// Default CG iteration cap: ten sweeps per unknown.
    pub fn cg_cap(&self) -> usize {
        10 * self.len.max(1)
    }

    /// Solves `(diag(shift) − diffusion·Δ_h) x = rhs` by Jacobi-preconditioned
    /// CG, starting from `x`. Requires `shift > 0` and `diffusion ≥ 0` so the
    /// operator is SPD. Returns the CG iteration count.
    pub fn solve_shifted(
        &self,
        shift: &[f64],
        diffusion: f64,
        rhs: &[f64],
        x: &mut [f64],
        rtol: f64,
    ) -> Result<usize> {
        let lap_diag = self.laplacian_diagonal();
        let diag: Vec<f64> = shift
            .iter()
            .zip(&lap_diag)
            .map(|(s, l)| s - diffusion * l)
            .collect();
        let apply = |v: &[f64], out: &mut [f64]| {
            self.laplacian_into(v, out);
            for i in 0..v.len() {
                out[i] = shift[i] * v[i] - diffusion * out[i];
            }
        };
        let outcome = conjugate_gradient(apply, &diag, rhs, x, rtol, self.cg_cap())?;
        Ok(outcome.iterations)
    }
}

/// One scalar per cell of a shared grid. Values are always finite.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid)
            && self.values == other.values
    }
}

impl Field {
    pub fn new(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::validation(
                "field",
                format!("{} values for {} cells", values.len(), grid.len()),
            ));
        }
        let f = Self {
            grid: Arc::clone(grid),
            values,
        };
        f.check_finite("field construction")?;
        Ok(f)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.center_into(i, &mut x);
                f(&x)
            })
            .collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub(crate) fn from_raw(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self, context: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(cell) => Err(Error::NonFinite { context, cell }),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid.cells(),
                other.grid.cells()
            )))
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert!(self.same_grid(other));
        Self::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// `self − other`.
    pub fn sub(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + a·other`, in place.
    pub fn add_scaled(&mut self, a: f64, other: &Field) {
        debug_assert!(self.same_grid(other));
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    pub fn laplacian(&self) -> Field {
        let mut out = vec![0.0; self.len()];
        self.grid.laplacian_into(&self.values, &mut out);
        Self::from_raw(&self.grid, out)
    }

    /// `Σ_i u_i |cell|`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `Σ_i u_i v_i |cell|`.
    pub fn inner(&self, other: &Field) -> f64 {
        crate::linalg::dot(&self.values, &other.values) * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn h1_seminorm(&self) -> f64 {
        let g = &self.grid;
        let u = &self.values;
        let mut acc = 0.0;
        g.for_each_face(|i, j, a| {
            let h = g.spacing()[a];
            let d = u[j] - u[i];
            acc += d * d / (h * h);
        });
        (acc * g.cell_volume()).sqrt()
    }

    /// Solves `(−Δ_h + I) u = self` to relative residual `tol`.
    pub fn helmholtz_inverse(&self, tol: f64) -> Result<Field> {
        if !(tol > 0.0) {
            return Err(Error::validation("tolerance", "must be > 0"));
        }
        let shift = vec![1.0; self.len()];
        let mut x = self.values.clone();
        self.grid
            .solve_shifted(&shift, 1.0, &self.values, &mut x, tol)?;
        Ok(Self::from_raw(&self.grid, x))
    }

    /// `‖u‖_* = (u, N u)^{1/2}`.
    pub fn dual_norm(&self, tol: f64) -> Result<f64> {
        let nu = self.helmholtz_inverse(tol)?;
        Ok(self.inner(&nu).max(0.0).sqrt())
    }
}

/// Applies the Kirchhoff transform cell-wise and takes the plain Laplacian.
pub fn kirchhoff_laplacian(theta: &Field, q: f64) -> Field {
    theta
        .map(|t| crate::constitutive::kirchhoff(t, q))
        .laplacian()
}

/// `div_h(κ_face ∇_h θ)` with the face conductivity taken as the secant slope
/// of `K` across the face (`κ(θ_i)` when the two values coincide).
pub fn secant_flux_divergence(theta: &Field, q: f64) -> Field {
    use crate::constitutive::{conductivity, kirchhoff};
    let g = theta.grid();
    let t = theta.values();
    let mut out = vec![0.0; t.len()];
    g.for_each_face(|i, j, a| {
        let h = g.spacing()[a];
        let kappa_face = if t[j] == t[i] {
            conductivity(t[i], q)
        } else {
            (kirchhoff(t[j], q) - kirchhoff(t[i], q)) / (t[j] - t[i])
        };
        let flux = kappa_face * (t[j] - t[i]) / (h * h);
        out[i] += flux;
        out[j] -= flux;
    });
    Field::from_raw(g, out)
}
