//! Cellwise reaction solve: the trajectory increment R for a few states, its
//! Newton iteration count, and what one reaction step does to a random field.
//!
//! ```bash
//! cargo run --release -p rxd --example reaction_cell
//! ```

use rxd::reaction::TrajectoryEquation;
use rxd::{discrete_energy, step_reaction, Field, Grid, ModelParams, ReactionOptions, State};

fn main() -> Result<(), rxd::Error> {
    let p = ModelParams::default();
    let opts = ReactionOptions::default();
    println!("{:>8} {:>8} {:>8} {:>8} {:>22} {:>5}", "a", "b", "c", "dt", "R", "iters");
    for (a, b, c, dt) in [
        (2.0, 2.0, 1.0, 0.1),
        (0.5, 1.0, 2.0, 0.05),
        (1.0, 1.0, 1.0, 0.1),
        (1e-3, 10.0, 1e-3, 1.0),
        (5.0, 5.0, 1e-6, 1e-4),
    ] {
        let eq = TrajectoryEquation::new(a, b, c, dt, &p)?;
        let sol = eq.solve(&opts)?;
        println!("{a:>8} {b:>8} {c:>8} {dt:>8} {:>22.15e} {:>5}", sol.r, sol.iterations);
    }

    // One reaction step on a rough field: totals a+c and b+c stay put, F drops.
    let grid = Grid::cube(2, 32, 0.0, 1.0)?;
    let rough = |seed: f64| Field::from_fn(grid, move |x| 1.05 + (37.0 * x[0] + 91.0 * x[1] + seed).sin());
    let s = State::new(rough(0.0), rough(1.0), rough(2.0), 0.0)?;
    let (next, info) = step_reaction(&s, 0.05, &p, &opts)?;
    let (ac0, bc0) = s.masses();
    let (ac1, bc1) = next.masses();
    println!();
    println!("max Newton iterations {}", info.iterations.iter().max().unwrap_or(&0));
    println!("mass drift a+c {:.2e}, b+c {:.2e}", ac1 - ac0, bc1 - bc0);
    println!("energy {:.12} -> {:.12}", discrete_energy(&s, &p)?, discrete_energy(&next, &p)?);
    Ok(())
}
