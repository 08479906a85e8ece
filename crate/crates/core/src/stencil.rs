//! Variable-coefficient periodic Laplacian `div_h(D grad_h f)`.
//!
//! Fluxes live on cell faces. Along each axis the flux through the face
//! between cells `i` and `i + 1` is `D_face * (f[i+1] - f[i]) / h`, and a cell
//! collects `(flux_out - flux_in) / h`. Periodic wrap on every axis.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{ensure_same_grid, Field, Grid, MAX_DIM};

/// Position-dependent coefficient, evaluated at face centers.
pub type CoefficientFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One species' diffusion coefficient.
#[derive(Clone)]
pub enum DiffusionCoeff {
    Constant(f64),
    /// Analytic profile sampled at face centers.
    Function(CoefficientFn),
    /// Cellwise values; a face takes the arithmetic mean of its two cells.
    Cellwise(Field),
}

impl DiffusionCoeff {
    pub fn function(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        DiffusionCoeff::Function(Arc::new(f))
    }
}

impl fmt::Debug for DiffusionCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusionCoeff::Constant(d) => f.debug_tuple("Constant").field(d).finish(),
            DiffusionCoeff::Function(_) => f.write_str("Function(..)"),
            DiffusionCoeff::Cellwise(field) => f
                .debug_struct("Cellwise")
                .field("min", &field.min())
                .field("max", &field.max())
                .finish(),
        }
    }
}

impl From<f64> for DiffusionCoeff {
    fn from(d: f64) -> Self {
        DiffusionCoeff::Constant(d)
    }
}

/// Diffusion coefficients of the three species.
#[derive(Debug, Clone)]
pub struct DiffusionCoeffs {
    pub a: DiffusionCoeff,
    pub b: DiffusionCoeff,
    pub c: DiffusionCoeff,
}

impl DiffusionCoeffs {
    pub fn constant(d_a: f64, d_b: f64, d_c: f64) -> Self {
        DiffusionCoeffs {
            a: d_a.into(),
            b: d_b.into(),
            c: d_c.into(),
        }
    }
}

/// Matrix-free `div_h(D grad_h .)` with face coefficients precomputed for one grid.
#[derive(Debug, Clone)]
pub struct VariableLaplacian {
    grid: Grid,
    /// `faces[axis][idx]`: coefficient on the face between `idx` and its `+1` neighbour along `axis`.
    faces: Vec<Vec<f64>>,
    inv_h2: f64,
}

impl VariableLaplacian {
    pub fn new(grid: Grid, coeff: &DiffusionCoeff) -> Result<Self> {
        let n = grid.n();
        let h = grid.spacing();
        let strides = grid.strides();
        let mut faces = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            let values: Vec<f64> = match coeff {
                DiffusionCoeff::Constant(d) => vec![*d; grid.len()],
                DiffusionCoeff::Function(f) => (0..grid.len())
                    .map(|idx| {
                        let mut x = grid.cell_center(idx);
                        x[axis] += 0.5 * h;
                        f(&x[..grid.dim()])
                    })
                    .collect(),
                DiffusionCoeff::Cellwise(field) => {
                    if field.grid() != &grid {
                        return Err(Error::GridMismatch);
                    }
                    let v = field.values();
                    (0..grid.len())
                        .map(|idx| 0.5 * (v[idx] + v[plus(idx, axis, n, strides)]))
                        .collect()
                }
            };
            if let Some((idx, d)) = values
                .iter()
                .enumerate()
                .find(|(_, d)| !(d.is_finite() && **d > 0.0))
            {
                return Err(Error::InvalidCoefficient(format!(
                    "coefficient must be positive and finite, got {d} on axis-{axis} face of cell {idx}"
                )));
            }
            faces.push(values);
        }
        Ok(VariableLaplacian {
            grid,
            faces,
            inv_h2: 1.0 / (h * h),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest face coefficient.
    pub fn max_coefficient(&self) -> f64 {
        self.faces
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    /// `out = div_h(D grad_h f)`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let n = self.grid.n();
        let strides = self.grid.strides();
        debug_assert_eq!(f.len(), self.grid.len());
        debug_assert_eq!(out.len(), self.grid.len());
        out.iter_mut().for_each(|o| *o = 0.0);
        for (axis, faces) in self.faces.iter().enumerate() {
            for idx in 0..f.len() {
                let up = plus(idx, axis, n, strides);
                let down = minus(idx, axis, n, strides);
                out[idx] += faces[idx] * (f[up] - f[idx]) - faces[down] * (f[idx] - f[down]);
            }
        }
        out.iter_mut().for_each(|o| *o *= self.inv_h2);
    }

    /// Diagonal of the stencil, `-sum(faces around the cell) / h^2`.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.grid.n();
        let strides = self.grid.strides();
        let mut diag = vec![0.0; self.grid.len()];
        for (axis, faces) in self.faces.iter().enumerate() {
            for (idx, d) in diag.iter_mut().enumerate() {
                *d -= (faces[idx] + faces[minus(idx, axis, n, strides)]) * self.inv_h2;
            }
        }
        diag
    }
}

#[inline]
fn plus(idx: usize, axis: usize, n: usize, strides: [usize; MAX_DIM]) -> usize {
    let s = strides[axis];
    if (idx / s) % n == n - 1 {
        idx + s - n * s
    } else {
        idx + s
    }
}

#[inline]
fn minus(idx: usize, axis: usize, n: usize, strides: [usize; MAX_DIM]) -> usize {
    let s = strides[axis];
    if (idx / s) % n == 0 {
        idx + n * s - s
    } else {
        idx - s
    }
}

/// `div_h(D grad_h f)` on the grid of `f`.
pub fn apply_variable_laplacian(f: &Field, d: &DiffusionCoeff) -> Result<Field> {
    let op = VariableLaplacian::new(*f.grid(), d)?;
    let mut out = vec![0.0; f.len()];
    op.apply(f.values(), &mut out);
    Ok(Field::from_vec_unchecked(*f.grid(), out))
}

/// `<L f, g>` for an operator already built; used by property checks.
pub fn laplacian_form(op: &VariableLaplacian, f: &Field, g: &Field) -> Result<f64> {
    ensure_same_grid(f, g)?;
    let mut lf = vec![0.0; f.len()];
    op.apply(f.values(), &mut lf);
    Ok(f.grid().cell_volume() * crate::grid::dot(&lf, g.values()))
}
