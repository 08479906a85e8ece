//! Writes rxd-field v1 snapshots halfway through a run, reads them back, and
//! checks that restarting from disk lands on the same final state bit for bit.
//!
//! ```bash
//! cargo run --release -p rxd --example snapshot_restart
//! ```

use rxd::snapshot::{read_field, write_field};
use rxd::{
    make_initial_condition, run_simulation, Cadence, DiffusionCoeffs, Grid, ModelParams, SolverOptions, State,
    TimeConfig,
};

fn main() -> Result<(), rxd::Error> {
    let grid = Grid::cube(2, 32, -1.0, 1.0)?;
    let params = ModelParams::default();
    let coeffs = DiffusionCoeffs::constant(0.05, 1.0, 0.1);
    let opts = SolverOptions::default();
    let run = |s: &State, t: f64| {
        run_simulation(s, &TimeConfig::new(0.01, t)?, &params, &coeffs, &opts, Cadence::SILENT, &mut ())
    };

    let (straight, _) = run(&make_initial_condition(&grid)?, 0.2)?;
    let (half, _) = run(&make_initial_condition(&grid)?, 0.1)?;

    let dir = std::env::temp_dir().join("rxd-snapshot-example");
    std::fs::create_dir_all(&dir).map_err(|e| rxd::Error::io(&dir, e))?;
    let paths = ["a", "b", "c"].map(|s| dir.join(format!("field_{s}.txt")));
    for (path, field) in paths.iter().zip([&half.a, &half.b, &half.c]) {
        write_field(path, field, half.time)?;
    }
    println!("{}", std::fs::read_to_string(&paths[0]).unwrap_or_default().lines().take(3).collect::<Vec<_>>().join("\n"));

    let [a, b, c] = paths.map(|p| read_field(&p));
    let (a, b, c) = (a?, b?, c?);
    let restored = State::new(a.field, b.field, c.field, a.time)?;
    let (resumed, _) = run(&restored, 0.1)?;
    let same = [(&straight.a, &resumed.a), (&straight.b, &resumed.b), (&straight.c, &resumed.c)]
        .iter()
        .all(|(x, y)| x.values().iter().zip(y.values()).all(|(u, v)| u.to_bits() == v.to_bits()));
    println!("restart matches the uninterrupted run bit for bit: {same}");
    Ok(())
}
