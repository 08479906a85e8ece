//! Diffusion substep: one implicit Euler solve per species,
//! `(I - dt div_h(D grad_h)) u_next = u_star`, by Jacobi-preconditioned
//! conjugate gradients.

use crate::error::{Error, Result};
use crate::grid::{dot, Field};
use crate::model::State;
use crate::stencil::{DiffusionCoeff, DiffusionCoeffs, VariableLaplacian};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `|r| / |rhs|`.
    pub tol: f64,
    /// `None` means `10 * cells`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveReport {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
}

/// The SPD operator `I - dt L` for one species, reusable across steps with the same `dt`.
#[derive(Debug, Clone)]
pub struct ImplicitDiffusion {
    laplacian: VariableLaplacian,
    dt: f64,
    inv_diag: Vec<f64>,
}

impl ImplicitDiffusion {
    pub fn new(laplacian: VariableLaplacian, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
        }
        let inv_diag = laplacian
            .diagonal()
            .into_iter()
            .map(|d| 1.0 / (1.0 - dt * d))
            .collect();
        Ok(ImplicitDiffusion {
            laplacian,
            dt,
            inv_diag,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn laplacian(&self) -> &VariableLaplacian {
        &self.laplacian
    }

    /// `out = (I - dt L) x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.laplacian.apply(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi - self.dt * *o;
        }
    }

    pub fn solve(&self, u_star: &Field, opts: &CgOptions) -> Result<(Field, LinearSolveReport)> {
        if u_star.grid() != self.laplacian.grid() {
            return Err(Error::GridMismatch);
        }
        u_star.check_finite()?;
        let max_iter = opts.max_iter.unwrap_or(10 * u_star.len());
        let rhs = u_star.values();
        let mut x = rhs.to_vec();
        let report = pcg(self, rhs, &mut x, opts.tol, max_iter)?;
        if !report.converged {
            return Err(Error::CgNoConvergence(report));
        }
        // The exact solution keeps the sum; with a non-constant Jacobi diagonal
        // CG only does so up to its tolerance, so put the residual mass back.
        let shift = (rhs.iter().sum::<f64>() - x.iter().sum::<f64>()) / x.len() as f64;
        if shift != 0.0 {
            x.iter_mut().for_each(|v| *v += shift);
        }
        let next = Field::new(*u_star.grid(), x)?;
        Ok((next, report))
    }
}

fn pcg(
    op: &ImplicitDiffusion,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<LinearSolveReport> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(LinearSolveReport {
            iterations: 0,
            final_relative_residual: 0.0,
            converged: true,
        });
    }
    let mut ap = vec![0.0; n];
    op.apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    if rel <= tol {
        return Ok(LinearSolveReport {
            iterations: 0,
            final_relative_residual: rel,
            converged: true,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&op.inv_diag).map(|(ri, m)| ri * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for iteration in 1..=max_iter {
        op.apply(&p, &mut ap);
        let p_ap = dot(&p, &ap);
        if !(p_ap > 0.0) {
            return Err(Error::Invariant(format!(
                "implicit diffusion operator lost positive definiteness (p.Ap = {p_ap:e})"
            )));
        }
        let alpha = rz / p_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= tol {
            return Ok(LinearSolveReport {
                iterations: iteration,
                final_relative_residual: rel,
                converged: true,
            });
        }
        for i in 0..n {
            z[i] = r[i] * op.inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(LinearSolveReport {
        iterations: max_iter,
        final_relative_residual: rel,
        converged: false,
    })
}

/// Implicit Euler diffusion of one species over `dt`, starting CG from `u_star`.
pub fn step_diffusion_species(
    u_star: &Field,
    d: &DiffusionCoeff,
    dt: f64,
    opts: &CgOptions,
) -> Result<(Field, LinearSolveReport)> {
    let op = ImplicitDiffusion::new(VariableLaplacian::new(*u_star.grid(), d)?, dt)?;
    op.solve(u_star, opts)
}

/// Per-species implicit operators for a fixed grid, coefficients and `dt`.
#[derive(Debug, Clone)]
pub struct DiffusionStepper {
    ops: [ImplicitDiffusion; 3],
}

impl DiffusionStepper {
    pub fn new(grid: crate::grid::Grid, coeffs: &DiffusionCoeffs, dt: f64) -> Result<Self> {
        let build = |d: &DiffusionCoeff| ImplicitDiffusion::new(VariableLaplacian::new(grid, d)?, dt);
        Ok(DiffusionStepper {
            ops: [build(&coeffs.a)?, build(&coeffs.b)?, build(&coeffs.c)?],
        })
    }

    pub fn dt(&self) -> f64 {
        self.ops[0].dt
    }

    /// Diffuses all three species and advances the time stamp by `dt`.
    pub fn step(&self, s_star: &State, opts: &CgOptions) -> Result<(State, [LinearSolveReport; 3])> {
        s_star.check_positive()?;
        let (a, ra) = self.ops[0].solve(&s_star.a, opts)?;
        let (b, rb) = self.ops[1].solve(&s_star.b, opts)?;
        let (c, rc) = self.ops[2].solve(&s_star.c, opts)?;
        let next = State {
            a,
            b,
            c,
            time: s_star.time + self.dt(),
        };
        next.check_positive()?;
        Ok((next, [ra, rb, rc]))
    }
}

/// Implicit Euler diffusion of all three species.
pub fn step_diffusion(
    s_star: &State,
    coeffs: &DiffusionCoeffs,
    dt: f64,
    opts: &CgOptions,
) -> Result<(State, [LinearSolveReport; 3])> {
    DiffusionStepper::new(*s_star.grid(), coeffs, dt)?.step(s_star, opts)
}
