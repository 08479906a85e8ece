//! Cell-centered periodic grids and scalar fields.
//!
//! Cells are stored row-major with the x index varying fastest, so the cell
//! `(i, j, k)` lives at `i + n * (j + n * k)`. Spacing is the same on every
//! axis.

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Uniform cell-centered periodic box with `n` cells along each of `dim` axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    lower: [f64; MAX_DIM],
    upper: [f64; MAX_DIM],
    h: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, lower: &[f64], upper: &[f64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("cells per axis must be positive".into()));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} lower/upper bounds, got {}/{}",
                lower.len(),
                upper.len()
            )));
        }
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        let h = (upper[0] - lower[0]) / n as f64;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "axis 0 spans [{}, {}], spacing must be positive",
                lower[0], upper[0]
            )));
        }
        for axis in 0..dim {
            if !(lower[axis].is_finite() && upper[axis].is_finite()) {
                return Err(Error::InvalidGrid(format!("axis {axis} bounds are not finite")));
            }
            let h_axis = (upper[axis] - lower[axis]) / n as f64;
            if (h_axis - h).abs() > 1e-12 * h {
                return Err(Error::InvalidGrid(format!(
                    "spacing must be equal on all axes: axis 0 has {h}, axis {axis} has {h_axis}"
                )));
            }
            lo[axis] = lower[axis];
            hi[axis] = upper[axis];
        }
        Ok(Grid {
            dim,
            n,
            lower: lo,
            upper: hi,
            h,
        })
    }

    /// The same box on every axis: `(lower, upper)^dim`.
    pub fn cube(dim: usize, n: usize, lower: f64, upper: f64) -> Result<Self> {
        Grid::new(dim, n, &vec![lower; dim], &vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    /// Total number of cells, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Weight `h^dim` of one cell in discrete sums.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Flat-index stride of each axis.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut s = [0; MAX_DIM];
        let mut acc = 1;
        for stride in s.iter_mut().take(self.dim) {
            *stride = acc;
            acc *= self.n;
        }
        s
    }

    pub fn index(&self, ijk: &[usize]) -> usize {
        debug_assert_eq!(ijk.len(), self.dim);
        ijk.iter().rev().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for slot in out.iter_mut().take(self.dim) {
            *slot = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Coordinate of cell center `i` along `axis`.
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i as f64 + 0.5) * self.h
    }

    /// Physical coordinates of the center of flat cell `idx`.
    pub fn cell_center(&self, idx: usize) -> [f64; MAX_DIM] {
        let ijk = self.multi_index(idx);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = self.center(axis, ijk[axis]);
        }
        x
    }

    /// Whether two grids cover the same physical box (resolutions may differ).
    pub fn same_domain(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && (0..self.dim).all(|ax| {
                let tol = 1e-12 * (self.upper[ax] - self.lower[ax]).abs().max(1.0);
                (self.lower[ax] - other.lower[ax]).abs() <= tol
                    && (self.upper[ax] - other.upper[ax]).abs() <= tol
            })
    }
}

/// One scalar value per cell of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| f(&grid.cell_center(idx)[..grid.dim()]))
            .collect();
        Field { grid, values }
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
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

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Cellwise `self - other`.
    pub fn difference(&self, other: &Field) -> Result<Field> {
        ensure_same_grid(self, other)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x - y)
                .collect(),
        })
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }
}

pub(crate) fn ensure_same_grid(f: &Field, g: &Field) -> Result<()> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Discrete L2 inner product `h^dim * sum(f * g)`.
pub fn inner_product(f: &Field, g: &Field) -> Result<f64> {
    ensure_same_grid(f, g)?;
    Ok(f.grid.cell_volume() * dot(&f.values, &g.values))
}

pub fn norm_l2(f: &Field) -> Result<f64> {
    f.check_finite()?;
    Ok((f.grid.cell_volume() * dot(&f.values, &f.values)).sqrt())
}

pub fn norm_max(f: &Field) -> Result<f64> {
    f.check_finite()?;
    Ok(max_abs(&f.values))
}

/// `<f, 1>`: the discrete integral of `f` over the domain.
pub fn integral(f: &Field) -> f64 {
    f.grid.cell_volume() * f.values.iter().sum::<f64>()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line3() -> Grid {
        Grid::cube(1, 3, 0.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::cube(0, 4, 0.0, 1.0).is_err());
        assert!(Grid::cube(4, 4, 0.0, 1.0).is_err());
        assert!(Grid::cube(2, 0, 0.0, 1.0).is_err());
        assert!(Grid::cube(1, 4, 1.0, 1.0).is_err());
        assert!(Grid::new(2, 4, &[0.0, 0.0], &[1.0, 2.0]).is_err());
        assert!(Grid::new(2, 4, &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn indexing_is_row_major_x_fastest() {
        let g = Grid::cube(3, 4, 0.0, 1.0).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.index(&[1, 0, 0]), 1);
        assert_eq!(g.index(&[0, 1, 0]), 4);
        assert_eq!(g.index(&[0, 0, 1]), 16);
        assert_eq!(g.index(&[3, 2, 1]), 3 + 4 * 2 + 16);
        for idx in 0..g.len() {
            let m = g.multi_index(idx);
            assert_eq!(g.index(&m[..3]), idx);
        }
        assert_abs_diff_eq!(g.center(0, 0), 0.125);
        assert_abs_diff_eq!(g.cell_center(g.index(&[3, 2, 1]))[1], 0.625);
    }

    #[test]
    fn inner_product_examples() {
        let g = Grid::cube(1, 4, 0.0, 1.0).unwrap();
        let one = Field::constant(g, 1.0);
        assert_abs_diff_eq!(inner_product(&one, &one).unwrap(), 1.0, epsilon = 1e-15);

        for n in [1, 3, 7] {
            let sq = Grid::cube(2, n, 0.0, 1.0).unwrap();
            let ip = inner_product(&Field::constant(sq, 2.0), &Field::constant(sq, 3.0)).unwrap();
            assert_abs_diff_eq!(ip, 6.0, epsilon = 1e-13);
        }

        let f = Field::new(line3(), vec![1.0, -2.0, 3.0]).unwrap();
        let g1 = Field::constant(line3(), 1.0);
        assert_abs_diff_eq!(inner_product(&f, &g1).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn inner_product_rejects_grid_mismatch() {
        let f = Field::constant(line3(), 1.0);
        let g = Field::constant(Grid::cube(1, 4, 0.0, 1.0).unwrap(), 1.0);
        assert!(matches!(inner_product(&f, &g), Err(Error::GridMismatch)));
    }

    #[test]
    fn norms() {
        let f = Field::new(line3(), vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(norm_max(&f).unwrap(), 3.0);
        assert_abs_diff_eq!(norm_l2(&f).unwrap(), (14.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(norm_l2(&f).unwrap(), 2.160246899469287, epsilon = 1e-15);

        let z = Field::constant(line3(), 0.0);
        assert_eq!(norm_max(&z).unwrap(), 0.0);
        assert_eq!(norm_l2(&z).unwrap(), 0.0);
    }

    #[test]
    fn field_rejects_nonfinite_and_wrong_length() {
        assert!(matches!(
            Field::new(line3(), vec![1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(Field::new(line3(), vec![1.0]).is_err());
    }

    #[test]
    fn same_domain_ignores_resolution() {
        let a = Grid::cube(2, 40, -1.0, 1.0).unwrap();
        let b = Grid::cube(2, 60, -1.0, 1.0).unwrap();
        let c = Grid::cube(2, 60, 0.0, 1.0).unwrap();
        assert!(a.same_domain(&b));
        assert!(!a.same_domain(&c));
    }
}
