//! Convergence studies.
//!
//! * Temporal: runs on one grid with several `dt`, measured against a run
//!   with a much smaller reference `dt`.
//! * Spatial: Cauchy differences between consecutive resolutions, with the
//!   order corrected for the two-term difference through
//!   `A* = (1 - h_j^2 / h_{j-1}^2) / (1 - h_{j+1}^2 / h_j^2)`.
//!
//! All errors are discrete maximum norms.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{norm_max, Field, Grid, MAX_DIM};
use crate::model::{ModelParams, State};
use crate::splitting::{make_initial_condition, run_simulation, Cadence, SolverOptions, TimeConfig};
use crate::stencil::DiffusionCoeffs;

/// How a run's initial data is produced on a given grid.
#[derive(Debug, Clone)]
pub enum InitialCondition {
    /// The two-disc tanh profile on `(-1, 1)^2`.
    TwoDisc,
    Uniform { a: f64, b: f64, c: f64 },
    /// Fixed data; only usable on its own grid.
    Fields(State),
}

impl InitialCondition {
    pub fn build(&self, grid: &Grid) -> Result<State> {
        match self {
            InitialCondition::TwoDisc => make_initial_condition(grid),
            InitialCondition::Uniform { a, b, c } => Ok(State::uniform(*grid, *a, *b, *c)),
            InitialCondition::Fields(s) => {
                if s.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                Ok(s.clone())
            }
        }
    }
}

/// Everything but the discretization: model, coefficients, initial data, solver settings.
#[derive(Debug, Clone)]
pub struct Scene {
    pub params: ModelParams,
    pub coeffs: DiffusionCoeffs,
    pub initial: InitialCondition,
    pub options: SolverOptions,
}

impl Scene {
    /// Two-disc data with `D = (0.05, 1, 0.1)` and unit reference concentrations.
    pub fn two_disc() -> Self {
        Scene {
            params: ModelParams::default(),
            coeffs: DiffusionCoeffs::constant(0.05, 1.0, 0.1),
            initial: InitialCondition::TwoDisc,
            options: SolverOptions {
                checked: false,
                ..Default::default()
            },
        }
    }

    /// Final state of one run.
    pub fn solve(&self, grid: &Grid, dt: f64, t_final: f64) -> Result<State> {
        let tc = TimeConfig::new(dt, t_final)?;
        let initial = self.initial.build(grid)?;
        let (state, _) = run_simulation(
            &initial,
            &tc,
            &self.params,
            &self.coeffs,
            &self.options,
            Cadence::SILENT,
            &mut (),
        )?;
        Ok(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Temporal,
    Spatial,
}

/// One row: the refinement parameter (`dt` or `h`) and per-species max-norm errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRow {
    pub param: f64,
    pub errors: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub kind: StudyKind,
    /// Sorted by decreasing `param`.
    pub rows: Vec<RefinementRow>,
    /// `orders[k]` belongs to row `k + 1`.
    pub orders: Vec<[f64; 3]>,
    pub description: String,
}

pub const REPORT_HEADER: &str = "param,err_a,order_a,err_b,order_b,err_c,order_c";

impl RefinementReport {
    /// Order for row `i`, if it has one.
    pub fn order_at(&self, i: usize) -> Option<[f64; 3]> {
        i.checked_sub(1).and_then(|k| self.orders.get(k)).copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{:.16e}", row.param);
            let orders = self.order_at(i);
            for s in 0..3 {
                let _ = write!(out, ",{:.16e},", row.errors[s]);
                if let Some(o) = orders {
                    let _ = write!(out, "{:.16e}", o[s]);
                }
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let label = match self.kind {
            StudyKind::Temporal => "dt",
            StudyKind::Spatial => "h",
        };
        let mut out = format!("# {}\n", self.description);
        let _ = writeln!(
            out,
            "{label:>12} {:>12} {:>8} {:>12} {:>8} {:>12} {:>8}",
            "err_a", "order", "err_b", "order", "err_c", "order"
        );
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{:>12.6e}", row.param);
            let orders = self.order_at(i);
            for s in 0..3 {
                let _ = write!(out, " {:>12.4e}", row.errors[s]);
                match orders {
                    Some(o) => {
                        let _ = write!(out, " {:>8.4}", o[s]);
                    }
                    None => out.push_str(&format!(" {:>8}", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `ln(e_coarse / e_fine) / ln(p_coarse / p_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, p_coarse: f64, p_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0 && p_coarse > 0.0 && p_fine > 0.0) {
        return Err(Error::InvalidStudy(format!(
            "errors and step sizes must be positive (e = {e_coarse}, {e_fine}; p = {p_coarse}, {p_fine})"
        )));
    }
    if p_coarse == p_fine {
        return Err(Error::InvalidStudy(format!(
            "cannot compute an order between identical step sizes {p_coarse}"
        )));
    }
    Ok((e_coarse / e_fine).ln() / (p_coarse / p_fine).ln())
}

/// `(1 - h^2 / h_prev^2) / (1 - h_next^2 / h^2)`.
pub fn a_star(h_prev: f64, h: f64, h_next: f64) -> f64 {
    (1.0 - (h / h_prev).powi(2)) / (1.0 - (h_next / h).powi(2))
}

/// Spatial order from two consecutive Cauchy differences,
/// `d_j = |u_{h_prev} - u_h|` and `d_next = |u_h - u_{h_next}|`.
pub fn cauchy_order(h_prev: f64, h: f64, h_next: f64, d_j: f64, d_next: f64) -> Result<f64> {
    if !(h_prev > h && h > h_next && h_next > 0.0) {
        return Err(Error::InvalidStudy(format!(
            "mesh sizes must be strictly decreasing, got {h_prev}, {h}, {h_next}"
        )));
    }
    if !(d_j > 0.0 && d_next > 0.0) {
        return Err(Error::InvalidStudy("Cauchy differences must be positive".into()));
    }
    Ok((d_j / (a_star(h_prev, h, h_next) * d_next)).ln() / (h_prev / h).ln())
}

/// How a field is sampled at another grid's cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Tensor-product linear interpolation with periodic wrap.
    Multilinear,
    /// Band-limited periodic interpolant (the trigonometric polynomial through the samples).
    #[default]
    Trigonometric,
}

/// Max-norm difference between `coarse` and `fine`, evaluated at the coarse
/// cell centers. The fine field is sampled there by multilinear interpolation
/// with periodic wrap.
pub fn compare_fields(coarse: &Field, fine: &Field) -> Result<f64> {
    compare_fields_with(coarse, fine, Interpolation::Multilinear)
}

/// [`compare_fields`] with a choice of interpolant.
pub fn compare_fields_with(coarse: &Field, fine: &Field, method: Interpolation) -> Result<f64> {
    let cg = coarse.grid();
    let fg = fine.grid();
    if cg == fg {
        return norm_max(&coarse.difference(fine)?);
    }
    if !cg.same_domain(fg) {
        return Err(Error::GridMismatch);
    }
    let sampled = match method {
        Interpolation::Multilinear => multilinear_at(fine, cg),
        Interpolation::Trigonometric => trigonometric_at(fine, cg),
    };
    Ok(coarse
        .values()
        .iter()
        .zip(&sampled)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// Samples `fine` at the cell centers of `target` by multilinear interpolation.
fn multilinear_at(fine: &Field, target: &Grid) -> Vec<f64> {
    let cg = target;
    let fg = fine.grid();
    let dim = cg.dim();
    let n = fg.n();
    let strides = fg.strides();
    let fv = fine.values();
    let mut out = Vec::with_capacity(cg.len());
    for idx in 0..cg.len() {
        let x = cg.cell_center(idx);
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for axis in 0..dim {
            let s = (x[axis] - fg.lower()[axis]) / fg.spacing() - 0.5;
            let i0 = s.floor();
            frac[axis] = s - i0;
            base[axis] = (i0 as i64).rem_euclid(n as i64) as usize;
        }
        let mut interp = 0.0;
        for corner in 0..(1usize << dim) {
            let mut weight = 1.0;
            let mut flat = 0;
            for axis in 0..dim {
                let up = (corner >> axis) & 1 == 1;
                let i = if up { (base[axis] + 1) % n } else { base[axis] };
                weight *= if up { frac[axis] } else { 1.0 - frac[axis] };
                flat += i * strides[axis];
            }
            interp += weight * fv[flat];
        }
        out.push(interp);
    }
    out
}

/// Dense 1D resampling matrix (`m x n`, row-major) taking `n` periodic samples
/// at `lower + (j + 1/2) L / n` to the trigonometric interpolant at
/// `lower + (i + 1/2) L / m`. For even `n` the Nyquist mode enters as a cosine.
fn trig_resampling_matrix(n: usize, m: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    let half = n / 2;
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let xi = (i as f64 + 0.5) / m as f64;
        for j in 0..n {
            let xj = (j as f64 + 0.5) / n as f64;
            let theta = 2.0 * PI * (xi - xj);
            let mut w = 1.0;
            for k in 1..=half {
                let c = (k as f64 * theta).cos();
                w += if 2 * k == n { c } else { 2.0 * c };
            }
            out[i * n + j] = w / n as f64;
        }
    }
    out
}

/// Samples `fine` at the cell centers of `target` through its trigonometric
/// interpolant, one axis at a time.
fn trigonometric_at(fine: &Field, target: &Grid) -> Vec<f64> {
    let dim = target.dim();
    let n = fine.grid().n();
    let m = target.n();
    let matrix = trig_resampling_matrix(n, m);
    // Resample axis by axis; `shape[k]` is the current extent of axis k.
    let mut shape = [1usize; MAX_DIM];
    shape[..dim].fill(n);
    let mut data = fine.values().to_vec();
    for axis in 0..dim {
        let stride: usize = shape[..axis].iter().product();
        let outer: usize = shape[axis + 1..dim].iter().product();
        let mut next = vec![0.0; stride * m * outer];
        for o in 0..outer {
            for s in 0..stride {
                for i in 0..m {
                    let row = &matrix[i * n..(i + 1) * n];
                    let mut acc = 0.0;
                    for (j, w) in row.iter().enumerate() {
                        acc += w * data[s + stride * (j + n * o)];
                    }
                    next[s + stride * (i + m * o)] = acc;
                }
            }
        }
        data = next;
        shape[axis] = m;
    }
    data
}

fn per_species(a: &State, b: &State, cmp: impl Fn(&Field, &Field) -> Result<f64>) -> Result<[f64; 3]> {
    Ok([cmp(&a.a, &b.a)?, cmp(&a.b, &b.b)?, cmp(&a.c, &b.c)?])
}

fn in_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidStudy(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(work))
}

/// Temporal refinement on a fixed grid against a reference run with `ref_dt`.
/// Runs are spread over `jobs` worker threads.
pub fn temporal_order(
    dts: &[f64],
    ref_dt: f64,
    grid: &Grid,
    t_final: f64,
    scene: &Scene,
    jobs: usize,
) -> Result<RefinementReport> {
    if dts.len() < 2 {
        return Err(Error::InvalidStudy(format!(
            "a temporal study needs at least two step sizes, got {}",
            dts.len()
        )));
    }
    let mut sorted = dts.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidStudy(format!("step size {} is repeated", w[0])));
    }
    for &dt in sorted.iter().chain(std::iter::once(&ref_dt)) {
        TimeConfig::new(dt, t_final)?;
    }
    let finest = *sorted.last().unwrap();
    if !(ref_dt < finest) {
        return Err(Error::InvalidStudy(format!(
            "reference dt {ref_dt} must be smaller than every study dt (smallest {finest})"
        )));
    }

    let mut all = sorted.clone();
    all.push(ref_dt);
    let states = in_pool(jobs, || {
        all.par_iter()
            .map(|&dt| scene.solve(grid, dt, t_final))
            .collect::<Result<Vec<State>>>()
    })??;
    let reference = states.last().unwrap();
    let rows = sorted
        .iter()
        .zip(&states)
        .map(|(&dt, s)| {
            Ok(RefinementRow {
                param: dt,
                errors: per_species(s, reference, |x, y| norm_max(&x.difference(y)?))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = consecutive_orders(&rows)?;
    Ok(RefinementReport {
        kind: StudyKind::Temporal,
        rows,
        orders,
        description: format!(
            "temporal refinement on {} grid N={}, T={t_final}, reference dt={ref_dt}",
            dim_label(grid),
            grid.n()
        ),
    })
}

fn dim_label(grid: &Grid) -> String {
    format!("{}D", grid.dim())
}

/// First-order-style orders between consecutive rows.
pub fn consecutive_orders(rows: &[RefinementRow]) -> Result<Vec<[f64; 3]>> {
    rows.windows(2)
        .map(|w| {
            let mut o = [0.0; 3];
            for s in 0..3 {
                o[s] = observed_order(w[0].errors[s], w[1].errors[s], w[0].param, w[1].param)?;
            }
            Ok(o)
        })
        .collect()
}

/// Time step used at each resolution of a spatial study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    /// `dt = h^2`.
    HSquared,
    Fixed(f64),
}

impl DtRule {
    pub fn dt(&self, h: f64) -> f64 {
        match self {
            DtRule::HSquared => h * h,
            DtRule::Fixed(dt) => *dt,
        }
    }
}

/// Cauchy refinement over `grids` (strictly decreasing spacing, same box).
pub fn spatial_cauchy_order(
    grids: &[Grid],
    dt_rule: DtRule,
    interpolation: Interpolation,
    t_final: f64,
    scene: &Scene,
    jobs: usize,
) -> Result<RefinementReport> {
    if grids.len() < 3 {
        return Err(Error::InvalidStudy(format!(
            "a spatial Cauchy study needs at least three resolutions, got {}",
            grids.len()
        )));
    }
    for w in grids.windows(2) {
        if !w[0].same_domain(&w[1]) {
            return Err(Error::InvalidStudy("resolutions cover different domains".into()));
        }
        if !(w[0].spacing() > w[1].spacing()) {
            return Err(Error::InvalidStudy(format!(
                "mesh sizes must be strictly decreasing, got {} then {}",
                w[0].spacing(),
                w[1].spacing()
            )));
        }
    }
    for g in grids {
        TimeConfig::new(dt_rule.dt(g.spacing()), t_final)?;
    }

    let states = in_pool(jobs, || {
        grids
            .par_iter()
            .map(|g| scene.solve(g, dt_rule.dt(g.spacing()), t_final))
            .collect::<Result<Vec<State>>>()
    })??;
    let rows = grids
        .windows(2)
        .zip(states.windows(2))
        .map(|(g, s)| {
            Ok(RefinementRow {
                param: g[0].spacing(),
                errors: per_species(&s[0], &s[1], |x, y| {
                    compare_fields_with(x, y, interpolation)
                })?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = (0..rows.len() - 1)
        .map(|k| {
            let (h_prev, h, h_next) = (
                grids[k].spacing(),
                grids[k + 1].spacing(),
                grids[k + 2].spacing(),
            );
            let mut o = [0.0; 3];
            for s in 0..3 {
                o[s] = cauchy_order(h_prev, h, h_next, rows[k].errors[s], rows[k + 1].errors[s])?;
            }
            Ok(o)
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<String> = grids.iter().map(|g| g.n().to_string()).collect();
    Ok(RefinementReport {
        kind: StudyKind::Spatial,
        rows,
        orders,
        description: format!(
            "spatial Cauchy refinement, {} grids N={}, T={t_final}, dt rule {:?}",
            dim_label(&grids[0]),
            cells.join("/"),
            dt_rule,
        ) + &format!(", {interpolation:?} interpolation"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn temporal_order_examples() {
        let o = observed_order(9.5498e-3, 4.8519e-3, 1.0 / 25.0, 1.0 / 50.0).unwrap();
        assert_abs_diff_eq!(o, 0.9769, epsilon = 5e-5);
        let o = observed_order(1.2629e-3, 5.3817e-4, 1.0 / 200.0, 1.0 / 400.0).unwrap();
        assert_abs_diff_eq!(o, 1.2306, epsilon = 5e-5);
        assert!(observed_order(1.0, 0.5, 0.1, 0.1).is_err());
        assert!(observed_order(0.0, 0.5, 0.1, 0.05).is_err());
    }

    #[test]
    fn cauchy_order_examples() {
        let (h1, h2, h3) = (1.0 / 20.0, 1.0 / 30.0, 1.0 / 40.0);
        assert_abs_diff_eq!(a_star(h1, h2, h3), 80.0 / 63.0, epsilon = 1e-14);
        // The closed form gives 1.98054..., matching the tabulated 1.9805.
        let o = cauchy_order(h1, h2, h3, 2.0358e-3, 7.1819e-4).unwrap();
        assert_abs_diff_eq!(o, 1.9805, epsilon = 1e-4);
        let o = cauchy_order(h1, h2, h3, 7.6602e-4, 2.6167e-4).unwrap();
        assert_abs_diff_eq!(o, 2.0599, epsilon = 1e-4);
        assert!(cauchy_order(h2, h1, h3, 1.0, 1.0).is_err());
    }

    #[test]
    fn synthetic_sequences_give_exact_orders() {
        let k = 0.37;
        for dts in [[0.1, 0.05], [0.04, 0.01], [1.0 / 3.0, 1.0 / 7.0]] {
            let o = observed_order(k * dts[0], k * dts[1], dts[0], dts[1]).unwrap();
            assert!((o - 1.0).abs() < 1e-12);
        }
        let hs = [1.0 / 20.0, 1.0 / 30.0, 1.0 / 40.0, 1.0 / 50.0, 1.0 / 60.0];
        let d: Vec<f64> = hs.windows(2).map(|w| k * (w[0] * w[0] - w[1] * w[1])).collect();
        for j in 0..3 {
            let o = cauchy_order(hs[j], hs[j + 1], hs[j + 2], d[j], d[j + 1]).unwrap();
            assert!((o - 2.0).abs() < 1e-12, "{o}");
        }
    }

    #[test]
    fn compare_identical_grids_is_plain_difference() {
        let g = Grid::cube(2, 5, -1.0, 1.0).unwrap();
        let f = Field::from_fn(g, |x| x[0] * x[1]);
        let h = Field::from_fn(g, |x| x[0] * x[1] + 0.25 * x[0]);
        assert_abs_diff_eq!(compare_fields(&f, &h).unwrap(), 0.25 * 0.8, epsilon = 1e-15);
    }

    #[test]
    fn compare_constants_is_zero() {
        let coarse = Field::constant(Grid::cube(2, 20, -1.0, 1.0).unwrap(), 5.0);
        let fine = Field::constant(Grid::cube(2, 30, -1.0, 1.0).unwrap(), 5.0);
        assert!(compare_fields(&coarse, &fine).unwrap() < 1e-14);
    }

    #[test]
    fn compare_is_exact_on_linears_away_from_the_wrap() {
        // Nested 1D grids; coarse centers sit between fine centers, never across the seam.
        let coarse_g = Grid::cube(1, 4, 0.0, 1.0).unwrap();
        let fine_g = Grid::cube(1, 12, 0.0, 1.0).unwrap();
        let coarse = Field::from_fn(coarse_g, |x| 2.0 * x[0] - 1.0);
        let fine = Field::from_fn(fine_g, |x| 2.0 * x[0] - 1.0);
        assert!(compare_fields(&coarse, &fine).unwrap() < 1e-13);

        let coarse_g = Grid::cube(2, 3, 0.0, 1.0).unwrap();
        let fine_g = Grid::cube(2, 9, 0.0, 1.0).unwrap();
        let lin = |x: &[f64]| 0.3 + x[0] - 2.0 * x[1];
        let d = compare_fields(&Field::from_fn(coarse_g, lin), &Field::from_fn(fine_g, lin)).unwrap();
        assert!(d < 1e-13, "{d}");
    }

    #[test]
    fn compare_wraps_periodically() {
        // A single fine cell wraps onto itself.
        let coarse = Field::constant(Grid::cube(1, 2, 0.0, 1.0).unwrap(), 1.0);
        let fine = Field::new(Grid::cube(1, 1, 0.0, 1.0).unwrap(), vec![1.0]).unwrap();
        assert_eq!(compare_fields(&coarse, &fine).unwrap(), 0.0);

        let fine_g = Grid::cube(1, 4, 0.0, 1.0).unwrap();
        let fine = Field::new(fine_g, vec![1.0, 0.0, 0.0, 3.0]).unwrap();
        // Coarse centers 0.1 and 0.9 fall across the seam between fine cells 3 and 0:
        // 0.1 -> 0.1 * 3 + 0.9 * 1 = 1.2 and 0.9 -> 0.9 * 3 + 0.1 * 1 = 2.8.
        let coarse = Field::constant(Grid::cube(1, 5, 0.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(compare_fields(&coarse, &fine).unwrap(), 2.8, epsilon = 1e-12);
        let mut probe = coarse.clone();
        probe.values_mut()[4] = 2.8;
        assert_abs_diff_eq!(compare_fields(&probe, &fine).unwrap(), 1.2, epsilon = 1e-12);
    }

    #[test]
    fn trigonometric_is_exact_on_band_limited_fields() {
        use std::f64::consts::PI;
        let f = |x: &[f64]| 1.5 + (PI * x[0]).sin() * (2.0 * PI * x[1]).cos() + 0.3 * (3.0 * PI * x[1]).sin();
        let coarse = Field::from_fn(Grid::cube(2, 20, -1.0, 1.0).unwrap(), f);
        let fine = Field::from_fn(Grid::cube(2, 30, -1.0, 1.0).unwrap(), f);
        let d = compare_fields_with(&coarse, &fine, Interpolation::Trigonometric).unwrap();
        assert!(d < 1e-13, "{d}");
        // Multilinear is only second order on the same data.
        assert!(compare_fields(&coarse, &fine).unwrap() > 1e-3);

        let g = |x: &[f64]| (PI * (x[0] + 2.0 * x[2])).cos() - 0.5 * (PI * x[1]).sin();
        let coarse = Field::from_fn(Grid::cube(3, 6, -1.0, 1.0).unwrap(), g);
        let fine = Field::from_fn(Grid::cube(3, 10, -1.0, 1.0).unwrap(), g);
        let d = compare_fields_with(&coarse, &fine, Interpolation::Trigonometric).unwrap();
        assert!(d < 1e-13, "{d}");
    }

    #[test]
    fn trigonometric_resampling_reproduces_constants_and_samples() {
        for (n, m) in [(4, 7), (9, 5), (12, 12), (1, 3)] {
            let w = trig_resampling_matrix(n, m);
            for row in w.chunks(n) {
                assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            }
        }
        let w = trig_resampling_matrix(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                assert_abs_diff_eq!(w[i * 6 + j], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn trigonometric_converges_spectrally_on_smooth_periodic_fields() {
        use std::f64::consts::PI;
        let f = |x: &[f64]| ((PI * x[0]).sin() + (PI * x[1]).cos()).exp();
        let coarse = Field::from_fn(Grid::cube(2, 16, -1.0, 1.0).unwrap(), f);
        let fine = Field::from_fn(Grid::cube(2, 40, -1.0, 1.0).unwrap(), f);
        let d = compare_fields_with(&coarse, &fine, Interpolation::Trigonometric).unwrap();
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn compare_rejects_different_domains() {
        let a = Field::constant(Grid::cube(2, 4, 0.0, 1.0).unwrap(), 1.0);
        let b = Field::constant(Grid::cube(2, 8, 0.0, 2.0).unwrap(), 1.0);
        assert!(compare_fields(&a, &b).is_err());
    }

    #[test]
    fn study_validation() {
        let g = Grid::cube(2, 8, -1.0, 1.0).unwrap();
        let scene = Scene::two_disc();
        assert!(temporal_order(&[0.04], 0.01, &g, 0.2, &scene, 1).is_err());
        assert!(temporal_order(&[0.04, 0.04], 0.01, &g, 0.2, &scene, 1).is_err());
        assert!(temporal_order(&[0.04, 0.02], 0.02, &g, 0.2, &scene, 1).is_err());
        assert!(temporal_order(&[0.04, 0.03], 0.01, &g, 0.2, &scene, 1).is_err());
        let grids: Vec<Grid> = [8, 12].iter().map(|&n| Grid::cube(2, n, -1.0, 1.0).unwrap()).collect();
        assert!(spatial_cauchy_order(&grids, DtRule::HSquared, Interpolation::default(), 0.2, &scene, 1).is_err());
        let grids: Vec<Grid> = [12, 8, 16].iter().map(|&n| Grid::cube(2, n, -1.0, 1.0).unwrap()).collect();
        assert!(spatial_cauchy_order(&grids, DtRule::HSquared, Interpolation::default(), 0.2, &scene, 1).is_err());
    }

    #[test]
    fn report_csv_layout() {
        let report = RefinementReport {
            kind: StudyKind::Temporal,
            rows: vec![
                RefinementRow { param: 0.1, errors: [1.0, 2.0, 3.0] },
                RefinementRow { param: 0.05, errors: [0.5, 1.0, 1.5] },
            ],
            orders: vec![[1.0, 1.0, 1.0]],
            description: "t".into(),
        };
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_HEADER);
        assert_eq!(
            lines[1],
            "1.0000000000000001e-1,1.0000000000000000e0,,2.0000000000000000e0,,3.0000000000000000e0,"
        );
        assert_eq!(lines[2].split(',').count(), 7);
        assert!(lines[2].ends_with(",1.0000000000000000e0"));
    }

    #[test]
    fn small_temporal_study_is_first_order() {
        let g = Grid::cube(2, 16, -1.0, 1.0).unwrap();
        let report = temporal_order(&[0.04, 0.02, 0.01], 0.0025, &g, 0.2, &Scene::two_disc(), 2).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.orders.len(), 2);
        for o in report.orders.iter().flatten() {
            assert!(*o > 0.7 && *o < 1.6, "{o}");
        }
    }
}
