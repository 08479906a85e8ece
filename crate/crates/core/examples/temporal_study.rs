//! Temporal refinement of the two-disc scene on a fixed 100 x 100 grid,
//! dt = 1/25 ... 1/200 against a dt = 1/800 reference at T = 0.2.
//!
//! Pass `--full` for the 400 x 400 grid with dt down to 1/400 and a 1/1600
//! reference; that takes a few minutes.
//!
//! ```bash
//! cargo run --release -p rxd --example temporal_study
//! cargo run --release -p rxd --example temporal_study -- --full
//! ```

use rxd::study::{temporal_order, Scene};
use rxd::Grid;

fn main() -> Result<(), rxd::Error> {
    let full = std::env::args().any(|a| a == "--full");
    let (n, dts, ref_dt) = if full {
        (400, vec![1.0 / 25.0, 1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0], 1.0 / 1600.0)
    } else {
        (100, vec![1.0 / 25.0, 1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0], 1.0 / 800.0)
    };
    let grid = Grid::cube(2, n, -1.0, 1.0)?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = temporal_order(&dts, ref_dt, &grid, 0.2, &Scene::two_disc(), jobs)?;
    print!("{}", report.table());
    Ok(())
}
