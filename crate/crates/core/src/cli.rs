//! `rxd` command line: `run`, `study-time`, `study-space` and `inspect`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::snapshot;
use crate::splitting::{run_simulation, CsvDiagnostics, SnapshotWriter};
use crate::study::{spatial_cauchy_order, temporal_order, RefinementReport};

#[derive(Debug, Parser)]
#[command(name = "rxd", version, about = "Operator-splitting solver for A + B <-> C reaction-diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write diagnostics.csv (and snapshots if enabled).
    Run(Common),
    /// Temporal convergence study; writes temporal_orders.csv.
    StudyTime(Common),
    /// Spatial Cauchy convergence study; writes spatial_orders.csv.
    StudySpace(Common),
    /// Print the header and min/max/mean of an rxd-field snapshot.
    Inspect { snapshot: PathBuf },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding output.out_dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a config key, e.g. `--set time.dt=0.005`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads for study runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Assert positivity, energy decay and conservation every step.
    #[arg(long, overrides_with = "unchecked")]
    pub checked: bool,
    #[arg(long, overrides_with = "checked")]
    pub unchecked: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut overrides = self.set.clone();
        if let Some(out) = &self.out {
            overrides.push(format!("output.out_dir={}", toml_string(&out.to_string_lossy())));
        }
        if self.checked {
            overrides.push("output.checked=true".into());
        }
        if self.unchecked {
            overrides.push("output.checked=false".into());
        }
        match &self.config {
            Some(path) => RunConfig::load(path, &overrides),
            None => RunConfig::from_toml_str("", &overrides),
        }
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn cmd_run(common: &Common, stdout: &mut dyn Write) -> Result<()> {
    let config = common.load()?;
    let setup = config.run_setup()?;
    create_dir(&setup.out_dir)?;
    let csv_path = setup.out_dir.join("diagnostics.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut observer = (
        CsvDiagnostics::new(BufWriter::new(file), &csv_path),
        SnapshotWriter::new(&setup.out_dir),
    );
    let (state, rows) = run_simulation(
        &setup.initial,
        &setup.time,
        &setup.params,
        &setup.coeffs,
        &setup.options,
        setup.cadence,
        &mut observer,
    )?;
    let [min_a, min_b, min_c] = state.minima();
    let _ = writeln!(
        stdout,
        "ran {} steps of dt={} on N={} ({}D), t={}",
        setup.time.steps(),
        setup.time.dt(),
        setup.grid.n(),
        setup.grid.dim(),
        state.time
    );
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        let _ = writeln!(stdout, "energy {:.10e} -> {:.10e}", first.energy, last.energy);
    }
    let _ = writeln!(stdout, "min a={min_a:.6e} b={min_b:.6e} c={min_c:.6e}");
    let _ = writeln!(stdout, "wrote {}", csv_path.display());
    Ok(())
}

fn finish_study(report: &RefinementReport, dir: &Path, name: &str, stdout: &mut dyn Write) -> Result<()> {
    create_dir(dir)?;
    let path = dir.join(name);
    write_file(&path, &report.to_csv())?;
    let _ = write!(stdout, "{}", report.table());
    let _ = writeln!(stdout, "wrote {}", path.display());
    Ok(())
}

pub fn cmd_study_time(common: &Common, stdout: &mut dyn Write) -> Result<()> {
    let config = common.load()?;
    let grid: Grid = config.grid()?;
    let scene = config.study_scene(config.output.checked && common.checked)?;
    let report = temporal_order(
        &config.study_time.dts,
        config.study_time.ref_dt,
        &grid,
        config.time.t_final,
        &scene,
        common.jobs,
    )?;
    finish_study(&report, &config.output.out_dir, "temporal_orders.csv", stdout)
}

pub fn cmd_study_space(common: &Common, stdout: &mut dyn Write) -> Result<()> {
    let config = common.load()?;
    let grids = config.study_grids()?;
    let scene = config.study_scene(config.output.checked && common.checked)?;
    let report = spatial_cauchy_order(
        &grids,
        config.study_dt_rule(),
        config.study_interpolation(),
        config.time.t_final,
        &scene,
        common.jobs,
    )?;
    finish_study(&report, &config.output.out_dir, "spatial_orders.csv", stdout)
}

pub fn cmd_inspect(path: &Path, stdout: &mut dyn Write) -> Result<()> {
    let snap = snapshot::read_field(path)?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text.lines().nth(1).unwrap_or_default();
    let _ = writeln!(stdout, "{}", snapshot::MAGIC);
    let _ = writeln!(stdout, "{header}");
    let _ = writeln!(stdout, "cells={}", snap.field.len());
    let _ = writeln!(stdout, "min={:.16e}", snap.field.min());
    let _ = writeln!(stdout, "max={:.16e}", snap.field.max());
    let _ = writeln!(stdout, "mean={:.16e}", snap.field.mean());
    Ok(())
}

/// Runs the parsed command, printing errors to `stderr`; returns the exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c, stdout),
        Command::StudyTime(c) => cmd_study_time(c, stdout),
        Command::StudySpace(c) => cmd_study_space(c, stdout),
        Command::Inspect { snapshot } => cmd_inspect(snapshot, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{e}");
            code
        }
    }
}
