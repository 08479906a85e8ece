//! Implicit diffusion stage: damping of Fourier modes against the discrete
//! symbol 1 / (1 + dt D lambda_h), and a spike relaxing under a cellwise
//! coefficient without leaving [min, max] or losing mass.
//!
//! ```bash
//! cargo run --release -p rxd --example implicit_diffusion
//! ```

use std::f64::consts::PI;

use rxd::{integral, step_diffusion_species, CgOptions, DiffusionCoeff, Field, Grid};

fn main() -> Result<(), rxd::Error> {
    let n = 32;
    let grid = Grid::cube(1, n, 0.0, 1.0)?;
    let h = grid.spacing();
    let (dt, d) = (0.01, 1.0);
    println!("{:>3} {:>18} {:>18} {:>5}", "k", "measured", "symbol", "cg");
    for k in [1, 2, 4, 8, 15] {
        let u = Field::from_fn(grid, |x| (2.0 * PI * k as f64 * x[0]).cos());
        let (next, report) = step_diffusion_species(&u, &d.into(), dt, &CgOptions::default())?;
        let lambda = 2.0 / (h * h) * (1.0 - (2.0 * PI * k as f64 * h).cos());
        println!(
            "{k:>3} {:>18.15} {:>18.15} {:>5}",
            next.values()[0] / u.values()[0],
            1.0 / (1.0 + dt * d * lambda),
            report.iterations
        );
    }

    let grid = Grid::cube(2, 48, -1.0, 1.0)?;
    let spike = Field::from_fn(grid, |x| if x[0].hypot(x[1]) < 0.1 { 5.0 } else { 0.2 });
    let coeff = DiffusionCoeff::Cellwise(Field::from_fn(grid, |x| if x[0] < 0.0 { 0.1 } else { 2.0 }));
    let (next, report) = step_diffusion_species(&spike, &coeff, 0.05, &CgOptions::default())?;
    println!();
    println!("spike: range [{}, {}] -> [{:.6}, {:.6}]", spike.min(), spike.max(), next.min(), next.max());
    println!("mass {:.15} -> {:.15}", integral(&spike), integral(&next));
    println!("cg iterations {}, relative residual {:.2e}", report.iterations, report.final_relative_residual);
    Ok(())
}
