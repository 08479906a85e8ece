//! Reaction substep: the cellwise reaction-trajectory solve.
//!
//! With the trajectory reset to zero at the start of the step, each cell
//! solves for the increment `R` in
//!
//! ```text
//! G(R) = ln(1 + R / (k_minus c dt)) - ln((a - R) / a_inf) - ln((b - R) / b_inf) + ln((c + R) / c_inf) = 0
//! ```
//!
//! and the intermediate state is `(a - R, b - R, c + R)`. `G` is strictly
//! increasing on its domain and blows up at both ends, so the root is unique
//! and every quantity above stays positive.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::{ModelParams, State};

/// Solver settings for the cellwise root solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionOptions {
    /// Target for `|G(R)|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ReactionOptions {
    fn default() -> Self {
        ReactionOptions {
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

/// Outcome of one cell's solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSolve {
    pub r: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Trajectory increments over a whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSolveResult {
    pub r: Field,
    pub iterations: Vec<u32>,
    pub max_residual: f64,
}

/// The log-form residual for one cell, with its derivative.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryEquation {
    a: f64,
    b: f64,
    c: f64,
    /// `k_minus * c * dt`.
    c_dt: f64,
    /// `ln a_inf + ln b_inf - ln c_inf`.
    ln_ref: f64,
}

impl TrajectoryEquation {
    pub fn new(a: f64, b: f64, c: f64, dt: f64, p: &ModelParams) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("dt", dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "reaction solve needs positive {name}, got {v}"
                )));
            }
        }
        Ok(TrajectoryEquation {
            a,
            b,
            c,
            c_dt: p.k_minus() * c * dt,
            ln_ref: p.a_inf().ln() + p.b_inf().ln() - p.c_inf().ln(),
        })
    }

    /// Open interval on which `G` is defined; the root lies strictly inside.
    pub fn domain(&self) -> (f64, f64) {
        (-self.c_dt.min(self.c), self.a.min(self.b))
    }

    pub fn residual(&self, r: f64) -> f64 {
        (r / self.c_dt).ln_1p() - (self.a - r).ln() - (self.b - r).ln()
            + (self.c + r).ln()
            + self.ln_ref
    }

    pub fn derivative(&self, r: f64) -> f64 {
        1.0 / (self.c_dt + r) + 1.0 / (self.a - r) + 1.0 / (self.b - r) + 1.0 / (self.c + r)
    }

    /// Newton iteration kept inside a shrinking bracket, falling back to
    /// bisection whenever the Newton step would leave it.
    pub fn solve(&self, opts: &ReactionOptions) -> Result<CellSolve> {
        let (left, right) = self.domain();
        let mut lo = left * (1.0 - 1e-15);
        let mut hi = right * (1.0 - 1e-15);
        let mut r = 0.0;
        let mut g = self.residual(r);
        for iterations in 0..opts.max_iter {
            if g.abs() <= opts.tol {
                return Ok(CellSolve {
                    r,
                    iterations,
                    residual: g.abs(),
                });
            }
            if g < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let newton = r - g / self.derivative(r);
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == r || next <= lo && r == lo || next >= hi && r == hi {
                // Bracket has collapsed to neighbouring floats.
                return Ok(CellSolve {
                    r,
                    iterations,
                    residual: g.abs(),
                });
            }
            r = next;
            g = self.residual(r);
        }
        if g.abs() <= opts.tol {
            return Ok(CellSolve {
                r,
                iterations: opts.max_iter,
                residual: g.abs(),
            });
        }
        Err(Error::ReactionNoConvergence {
            a: self.a,
            b: self.b,
            c: self.c,
            dt: self.c_dt / self.c,
            iterations: opts.max_iter,
            residual: g.abs(),
        })
    }
}

/// Unique root of the trajectory equation for one cell.
pub fn solve_reaction_cell(
    a: f64,
    b: f64,
    c: f64,
    dt: f64,
    p: &ModelParams,
    opts: &ReactionOptions,
) -> Result<f64> {
    Ok(TrajectoryEquation::new(a, b, c, dt, p)?.solve(opts)?.r)
}

/// Reaction substep over the whole grid. The time stamp is left unchanged.
pub fn step_reaction(
    s: &State,
    dt: f64,
    p: &ModelParams,
    opts: &ReactionOptions,
) -> Result<(State, ReactionSolveResult)> {
    s.check_positive()?;
    let grid = *s.grid();
    let n = grid.len();
    let (a, b, c) = (s.a.values(), s.b.values(), s.c.values());
    let mut r = Vec::with_capacity(n);
    let mut iterations = Vec::with_capacity(n);
    let mut max_residual: f64 = 0.0;
    let mut a_star = Vec::with_capacity(n);
    let mut b_star = Vec::with_capacity(n);
    let mut c_star = Vec::with_capacity(n);
    for index in 0..n {
        let cell = TrajectoryEquation::new(a[index], b[index], c[index], dt, p)
            .and_then(|eq| eq.solve(opts))
            .map_err(|e| Error::ReactionCell {
                index,
                source: Box::new(e),
            })?;
        max_residual = max_residual.max(cell.residual);
        iterations.push(cell.iterations as u32);
        r.push(cell.r);
        a_star.push(a[index] - cell.r);
        b_star.push(b[index] - cell.r);
        c_star.push(c[index] + cell.r);
    }
    let star = State {
        a: Field::from_vec_unchecked(grid, a_star),
        b: Field::from_vec_unchecked(grid, b_star),
        c: Field::from_vec_unchecked(grid, c_star),
        time: s.time,
    };
    star.check_positive()?;
    Ok((
        star,
        ReactionSolveResult {
            r: Field::from_vec_unchecked(grid, r),
            iterations,
            max_residual,
        },
    ))
}
