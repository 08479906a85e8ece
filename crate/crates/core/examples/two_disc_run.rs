//! The two-disc scene on (-1, 1)^2 with D = (0.05, 1, 0.1), run to T = 2 in
//! checked mode. A custom observer prints every 20th diagnostics row.
//!
//! ```bash
//! cargo run --release -p rxd --example two_disc_run -- 64
//! ```

use rxd::{
    make_initial_condition, run_simulation, Cadence, DiagnosticsRow, DiffusionCoeffs, Grid, ModelParams,
    Observer, SolverOptions, TimeConfig,
};

struct Printer;

impl Observer for Printer {
    fn diagnostics(&mut self, row: &DiagnosticsRow) -> rxd::Result<()> {
        println!(
            "{:>4} {:>5.2} {:>18.12} {:>12.4e} {:>12.4e} {:>12.4e} {:>3} {:>3} {:>3}",
            row.step,
            row.time,
            row.energy,
            row.min_a,
            row.min_b,
            row.min_c,
            row.cg_iters[0],
            row.cg_iters[1],
            row.cg_iters[2]
        );
        Ok(())
    }
}

fn main() -> Result<(), rxd::Error> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let grid = Grid::cube(2, n, -1.0, 1.0)?;
    let initial = make_initial_condition(&grid)?;
    let cadence = Cadence {
        diagnostics_every: 20,
        snapshot_every: 0,
    };
    println!("step  time             energy        min a        min b        min c  cg iterations");
    let (state, _) = run_simulation(
        &initial,
        &TimeConfig::new(0.01, 2.0)?,
        &ModelParams::default(),
        &DiffusionCoeffs::constant(0.05, 1.0, 0.1),
        &SolverOptions::default(),
        cadence,
        &mut Printer,
    )?;
    let (ac, bc) = state.masses();
    let (ac0, bc0) = initial.masses();
    println!("relative mass drift a+c {:.2e}, b+c {:.2e}", (ac - ac0) / ac0, (bc - bc0) / bc0);
    Ok(())
}
