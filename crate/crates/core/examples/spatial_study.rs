//! Spatial Cauchy refinement of the two-disc scene: h = 1/20 ... 1/60 on
//! (-1, 1)^2 with dt = h^2, compared at T = 0.2.
//!
//! ```bash
//! cargo run --release -p rxd --example spatial_study
//! ```

use rxd::study::{spatial_cauchy_order, DtRule, Interpolation, Scene};
use rxd::Grid;

fn main() -> Result<(), rxd::Error> {
    let grids = [20, 30, 40, 50, 60]
        .iter()
        .map(|inv_h| Grid::cube(2, 2 * inv_h, -1.0, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let interpolation = if std::env::args().any(|a| a == "--multilinear") {
        Interpolation::Multilinear
    } else {
        Interpolation::Trigonometric
    };
    let report = spatial_cauchy_order(&grids, DtRule::HSquared, interpolation, 0.2, &Scene::two_disc(), jobs)?;
    print!("{}", report.table());
    Ok(())
}
