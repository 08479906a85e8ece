//! Builds a run from a TOML document plus `section.key=value` overrides, the
//! same path the `rxd` binary takes, and writes diagnostics CSV to stdout.
//!
//! ```bash
//! cargo run --release -p rxd --example config_run -- time.t_final=0.1
//! ```

use std::io::Write;

use rxd::config::RunConfig;
use rxd::splitting::CsvDiagnostics;
use rxd::run_simulation;

const CONFIG: &str = r#"
[grid]
n = 32

[diffusion.a]
profile = "sinusoid"
base = 0.05
amplitude = 0.4

[time]
dt = 0.02
t_final = 0.2

[output]
diagnostics_every = 2
"#;

fn main() -> Result<(), rxd::Error> {
    let overrides: Vec<String> = std::env::args().skip(1).collect();
    let config = RunConfig::from_toml_str(CONFIG, &overrides)?;
    let setup = config.run_setup()?;
    let stdout = std::io::stdout();
    let mut csv = CsvDiagnostics::new(stdout.lock(), "<stdout>");
    run_simulation(
        &setup.initial,
        &setup.time,
        &setup.params,
        &setup.coeffs,
        &setup.options,
        setup.cadence,
        &mut csv,
    )?;
    let _ = csv.into_inner().flush();
    Ok(())
}
