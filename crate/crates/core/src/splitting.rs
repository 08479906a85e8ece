//! Lie splitting driver: a reaction substep followed by a diffusion substep,
//! each over the full `dt`, with optional runtime checks of positivity,
//! energy decay and conservation.

use std::io::Write;
use std::path::PathBuf;

use crate::diffusion::{CgOptions, DiffusionStepper, LinearSolveReport};
use crate::error::{Error, Result, Stage};
use crate::grid::{Field, Grid};
use crate::model::{discrete_energy, ModelParams, State};
use crate::reaction::{step_reaction, ReactionOptions};
use crate::snapshot;
use crate::stencil::DiffusionCoeffs;

/// Fixed step size and final time; `t_final` must be a whole number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    dt: f64,
    t_final: f64,
    steps: usize,
}

impl TimeConfig {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidTime(format!(
                "t_final must be positive, got {t_final}"
            )));
        }
        let ratio = t_final / dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio {
            return Err(Error::InvalidTime(format!(
                "t_final = {t_final} is not an integer multiple of dt = {dt} ({ratio} steps)"
            )));
        }
        Ok(TimeConfig {
            dt,
            t_final,
            steps: steps as usize,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Tolerances for both substeps and the checked-mode switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub reaction: ReactionOptions,
    pub cg: CgOptions,
    /// Assert positivity, energy decay and conservation after every step.
    pub checked: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            reaction: ReactionOptions::default(),
            cg: CgOptions::default(),
            checked: true,
        }
    }
}

/// One line of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub mass_ac: f64,
    pub mass_bc: f64,
    pub min_a: f64,
    pub min_b: f64,
    pub min_c: f64,
    pub reaction_residual: f64,
    pub cg_iters: [usize; 3],
}

pub const DIAGNOSTICS_HEADER: &str =
    "step,time,energy,mass_ac,mass_bc,min_a,min_b,min_c,reaction_residual,cg_iters_a,cg_iters_b,cg_iters_c";

impl DiagnosticsRow {
    fn measure(step: usize, s: &State, p: &ModelParams, energy: Option<f64>) -> Result<Self> {
        let energy = match energy {
            Some(e) => e,
            None => discrete_energy(s, p)?,
        };
        let (mass_ac, mass_bc) = s.masses();
        let [min_a, min_b, min_c] = s.minima();
        Ok(DiagnosticsRow {
            step,
            time: s.time,
            energy,
            mass_ac,
            mass_bc,
            min_a,
            min_b,
            min_c,
            reaction_residual: 0.0,
            cg_iters: [0; 3],
        })
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            self.step,
            self.time,
            self.energy,
            self.mass_ac,
            self.mass_bc,
            self.min_a,
            self.min_b,
            self.min_c,
            self.reaction_residual,
            self.cg_iters[0],
            self.cg_iters[1],
            self.cg_iters[2]
        )
    }
}

/// Solver statistics of one full step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub reaction_residual: f64,
    pub cg: [LinearSolveReport; 3],
}

/// Splitting scheme bound to one grid, parameter set, coefficient set and `dt`.
#[derive(Debug, Clone)]
pub struct Splitter {
    params: ModelParams,
    diffusion: DiffusionStepper,
    options: SolverOptions,
}

impl Splitter {
    pub fn new(
        grid: Grid,
        dt: f64,
        params: ModelParams,
        coeffs: &DiffusionCoeffs,
        options: SolverOptions,
    ) -> Result<Self> {
        Ok(Splitter {
            params,
            diffusion: DiffusionStepper::new(grid, coeffs, dt)?,
            options,
        })
    }

    pub fn dt(&self) -> f64 {
        self.diffusion.dt()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Reaction then diffusion. `step` only labels errors.
    pub fn step(&self, s: &State, step: usize) -> Result<(State, StepStats)> {
        let wrap = |stage| {
            move |e| Error::Step {
                step,
                stage,
                source: Box::new(e),
            }
        };
        let (star, reaction) = step_reaction(s, self.dt(), &self.params, &self.options.reaction)
            .map_err(wrap(Stage::Reaction))?;
        let (next, cg) = self
            .diffusion
            .step(&star, &self.options.cg)
            .map_err(wrap(Stage::Diffusion))?;
        Ok((
            next,
            StepStats {
                reaction_residual: reaction.max_residual,
                cg,
            },
        ))
    }
}

/// Receives diagnostics rows in step order and state snapshots.
pub trait Observer {
    fn diagnostics(&mut self, _row: &DiagnosticsRow) -> Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _step: usize, _state: &State) -> Result<()> {
        Ok(())
    }
}

/// Discards everything.
impl Observer for () {}

/// Streams diagnostics as CSV.
pub struct CsvDiagnostics<W: Write> {
    out: W,
    path: PathBuf,
    header_written: bool,
}

impl<W: Write> CsvDiagnostics<W> {
    /// `path` is only used in error messages.
    pub fn new(out: W, path: impl Into<PathBuf>) -> Self {
        CsvDiagnostics {
            out,
            path: path.into(),
            header_written: false,
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> Observer for CsvDiagnostics<W> {
    fn diagnostics(&mut self, row: &DiagnosticsRow) -> Result<()> {
        let mut write = || -> std::io::Result<()> {
            if !self.header_written {
                writeln!(self.out, "{DIAGNOSTICS_HEADER}")?;
                self.header_written = true;
            }
            writeln!(self.out, "{}", row.to_csv())?;
            self.out.flush()
        };
        write().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes `field_{a,b,c}_step<k>.txt` snapshots into a directory.
pub struct SnapshotWriter {
    dir: PathBuf,
}

impl SnapshotWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SnapshotWriter { dir: dir.into() }
    }

    pub fn path_for(&self, species: crate::error::Species, step: usize) -> PathBuf {
        self.dir.join(format!("field_{species}_step{step}.txt"))
    }
}

impl Observer for SnapshotWriter {
    fn snapshot(&mut self, step: usize, state: &State) -> Result<()> {
        for (species, field) in state.fields() {
            snapshot::write_field(&self.path_for(species, step), field, state.time)?;
        }
        Ok(())
    }
}

/// Fans out to several observers in order.
impl<A: Observer, B: Observer> Observer for (A, B) {
    fn diagnostics(&mut self, row: &DiagnosticsRow) -> Result<()> {
        self.0.diagnostics(row)?;
        self.1.diagnostics(row)
    }

    fn snapshot(&mut self, step: usize, state: &State) -> Result<()> {
        self.0.snapshot(step, state)?;
        self.1.snapshot(step, state)
    }
}

/// Output cadence. Zero turns a stream off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cadence {
    pub diagnostics_every: usize,
    pub snapshot_every: usize,
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence {
            diagnostics_every: 1,
            snapshot_every: 0,
        }
    }
}

impl Cadence {
    pub const SILENT: Cadence = Cadence {
        diagnostics_every: 0,
        snapshot_every: 0,
    };

    fn hits(every: usize, step: usize) -> bool {
        every != 0 && step % every == 0
    }
}

/// One full step with a freshly built [`Splitter`]. The row's step index is
/// the new time divided by `dt`.
pub fn full_step(
    s: &State,
    dt: f64,
    p: &ModelParams,
    coeffs: &DiffusionCoeffs,
    options: &SolverOptions,
) -> Result<(State, DiagnosticsRow)> {
    let splitter = Splitter::new(*s.grid(), dt, *p, coeffs, *options)?;
    let step = ((s.time + dt) / dt).round() as usize;
    let (next, stats) = splitter.step(s, step)?;
    let energy = discrete_energy(&next, p)?;
    if options.checked {
        let before = DiagnosticsRow::measure(step.saturating_sub(1), s, p, None)?;
        let mut checker = Checker::new(&before);
        checker.check(step, &next, energy)?;
    }
    let mut row = DiagnosticsRow::measure(step, &next, p, Some(energy))?;
    row.reaction_residual = stats.reaction_residual;
    row.cg_iters = stats.cg.map(|r| r.iterations);
    Ok((next, row))
}

/// Runtime checks of the scheme's guarantees.
struct Checker {
    mass0: (f64, f64),
    last_energy: f64,
}

const ENERGY_SLACK: f64 = 1e-10;
const MASS_DRIFT: f64 = 1e-8;

impl Checker {
    fn new(initial: &DiagnosticsRow) -> Self {
        Checker {
            mass0: (initial.mass_ac, initial.mass_bc),
            last_energy: initial.energy,
        }
    }

    fn check(&mut self, step: usize, s: &State, energy: f64) -> Result<()> {
        let fail = |msg: String| Error::Step {
            step,
            stage: Stage::Check,
            source: Box::new(Error::Invariant(msg)),
        };
        s.check_positive().map_err(|e| Error::Step {
            step,
            stage: Stage::Check,
            source: Box::new(e),
        })?;
        if energy > self.last_energy + ENERGY_SLACK * (1.0 + self.last_energy.abs()) {
            return Err(fail(format!(
                "energy increased from {:.17e} to {:.17e}",
                self.last_energy, energy
            )));
        }
        let (ac, bc) = s.masses();
        for (name, now, start) in [("a+c", ac, self.mass0.0), ("b+c", bc, self.mass0.1)] {
            if (now - start).abs() > MASS_DRIFT * start.abs() {
                return Err(fail(format!(
                    "mass of {name} drifted from {start:.17e} to {now:.17e}"
                )));
            }
        }
        self.last_energy = energy;
        Ok(())
    }
}

/// Runs `tc.steps()` full steps from `initial`.
///
/// Diagnostics rows (step 0 included) and snapshots are emitted to `observer`
/// at the configured cadence; the recorded rows are also returned.
pub fn run_simulation(
    initial: &State,
    tc: &TimeConfig,
    params: &ModelParams,
    coeffs: &DiffusionCoeffs,
    options: &SolverOptions,
    cadence: Cadence,
    observer: &mut dyn Observer,
) -> Result<(State, Vec<DiagnosticsRow>)> {
    initial.check_positive()?;
    let splitter = Splitter::new(*initial.grid(), tc.dt(), *params, coeffs, *options)?;
    let needs_energy = options.checked || cadence.diagnostics_every != 0;

    let mut rows = Vec::new();
    let mut checker = None;
    if needs_energy {
        let row0 = DiagnosticsRow::measure(0, initial, params, None)?;
        if options.checked {
            checker = Some(Checker::new(&row0));
        }
        if Cadence::hits(cadence.diagnostics_every, 0) {
            observer.diagnostics(&row0)?;
            rows.push(row0);
        }
    }
    if Cadence::hits(cadence.snapshot_every, 0) {
        observer.snapshot(0, initial)?;
    }

    let mut state = initial.clone();
    for step in 1..=tc.steps() {
        let (mut next, stats) = splitter.step(&state, step)?;
        next.time = initial.time + step as f64 * tc.dt();
        let record = Cadence::hits(cadence.diagnostics_every, step);
        if record || checker.is_some() {
            let energy = discrete_energy(&next, params).map_err(|e| Error::Step {
                step,
                stage: Stage::Check,
                source: Box::new(e),
            })?;
            if let Some(checker) = checker.as_mut() {
                checker.check(step, &next, energy)?;
            }
            if record {
                let mut row = DiagnosticsRow::measure(step, &next, params, Some(energy))?;
                row.reaction_residual = stats.reaction_residual;
                row.cg_iters = stats.cg.map(|r| r.iterations);
                observer.diagnostics(&row)?;
                rows.push(row);
            }
        }
        if Cadence::hits(cadence.snapshot_every, step) {
            observer.snapshot(step, &next)?;
        }
        state = next;
    }
    Ok((state, rows))
}

/// Two tanh discs on `(-1, 1)^2`: `a` inside a disc of radius 0.2, `b`
/// outside it, and `c` in two bumps centred at `(0, +-0.2)`.
pub fn make_initial_condition(grid: &Grid) -> Result<State> {
    let unit_box = Grid::cube(2, grid.n(), -1.0, 1.0)?;
    if grid.dim() != 2 || !grid.same_domain(&unit_box) {
        return Err(Error::InvalidGrid(
            "the two-disc initial condition needs the 2D domain (-1, 1)^2".into(),
        ));
    }
    let front = |r: f64| ((r - 0.2) / 0.1).tanh();
    let a = Field::from_fn(*grid, |x| 0.5 * (-front(x[0].hypot(x[1])) + 1.0) + 0.01);
    let b = Field::from_fn(*grid, |x| 0.5 * (front(x[0].hypot(x[1])) + 1.0) + 0.01);
    let bump = |x: f64, y: f64| 0.25 * ((x.hypot(y) - 0.2) / 0.1 + 1.0).tanh();
    let c = Field::from_fn(*grid, |x| bump(x[0], x[1] - 0.2) + bump(x[0], x[1] + 0.2) + 0.01);
    Ok(State { a, b, c, time: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn time_config_validation() {
        assert_eq!(TimeConfig::new(0.01, 0.2).unwrap().steps(), 20);
        assert_eq!(TimeConfig::new(1.0 / 3600.0, 0.2).unwrap().steps(), 720);
        assert!(TimeConfig::new(0.013, 0.2).is_err());
        assert!(TimeConfig::new(0.3, 0.2).is_err());
        assert!(TimeConfig::new(0.0, 0.2).is_err());
        assert!(TimeConfig::new(0.1, 0.0).is_err());
    }

    #[test]
    fn initial_condition_values() {
        // N = 1 puts the only cell center at the origin.
        let g = Grid::cube(2, 1, -1.0, 1.0).unwrap();
        let s = make_initial_condition(&g).unwrap();
        assert_abs_diff_eq!(s.a.values()[0], 0.5 * (-(-2f64).tanh() + 1.0) + 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(s.a.values()[0], 0.9920137900, epsilon = 1e-10);
        assert_abs_diff_eq!(s.b.values()[0], 0.0279862100, epsilon = 1e-10);

        let g = Grid::cube(2, 37, -1.0, 1.0).unwrap();
        let s = make_initial_condition(&g).unwrap();
        for (a, b) in s.a.values().iter().zip(s.b.values()) {
            assert_abs_diff_eq!(a + b, 1.02, epsilon = 1e-15);
        }
        assert!(s.c.min() > 0.0);
    }

    #[test]
    fn initial_condition_rejects_other_domains() {
        assert!(make_initial_condition(&Grid::cube(2, 8, 0.0, 1.0).unwrap()).is_err());
        assert!(make_initial_condition(&Grid::cube(1, 8, -1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = Grid::cube(2, 8, -1.0, 1.0).unwrap();
        let s = State::uniform(g, 1.0, 1.0, 1.0);
        let coeffs = DiffusionCoeffs::constant(0.05, 1.0, 0.1);
        let (next, row) = full_step(&s, 0.1, &ModelParams::default(), &coeffs, &Default::default()).unwrap();
        for (sp, f) in next.fields() {
            for (x, y) in f.values().iter().zip(s.field(sp).values()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
        assert_eq!(row.step, 1);
        assert_abs_diff_eq!(row.energy, -12.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_state_follows_pure_reaction() {
        let g = Grid::cube(2, 6, -1.0, 1.0).unwrap();
        let s = State::uniform(g, 2.0, 2.0, 1.0);
        let coeffs = DiffusionCoeffs::constant(0.3, 2.0, 0.01);
        let (next, _) = full_step(&s, 0.1, &ModelParams::default(), &coeffs, &Default::default()).unwrap();
        assert!(next.a.values().iter().all(|v| (v - 1.8195395783).abs() < 1e-10));
        assert!(next.b.values().iter().all(|v| (v - 1.8195395783).abs() < 1e-10));
        assert!(next.c.values().iter().all(|v| (v - 1.1804604217).abs() < 1e-10));
        assert_abs_diff_eq!(next.time, 0.1);
    }

    #[test]
    fn energy_strictly_decreases_on_two_disc_scene() {
        let g = Grid::cube(2, 32, -1.0, 1.0).unwrap();
        let s = make_initial_condition(&g).unwrap();
        let p = ModelParams::default();
        let (_, row) = full_step(&s, 0.01, &p, &DiffusionCoeffs::constant(0.05, 1.0, 0.1), &Default::default())
            .unwrap();
        assert!(row.energy < discrete_energy(&s, &p).unwrap());
    }

    #[test]
    fn equilibrium_run_has_constant_energy() {
        let g = Grid::cube(2, 4, -1.0, 1.0).unwrap();
        let s = State::uniform(g, 1.0, 1.0, 1.0);
        let tc = TimeConfig::new(0.1, 1.0).unwrap();
        let (_, rows) = run_simulation(
            &s,
            &tc,
            &ModelParams::default(),
            &DiffusionCoeffs::constant(1.0, 1.0, 1.0),
            &Default::default(),
            Cadence::default(),
            &mut (),
        )
        .unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().all(|r| r.energy == rows[0].energy));
    }

    #[test]
    fn csv_rows_follow_header() {
        let g = Grid::cube(2, 8, -1.0, 1.0).unwrap();
        let s = make_initial_condition(&g).unwrap();
        let tc = TimeConfig::new(0.05, 0.2).unwrap();
        let mut csv = CsvDiagnostics::new(Vec::new(), "memory");
        run_simulation(
            &s,
            &tc,
            &ModelParams::default(),
            &DiffusionCoeffs::constant(0.05, 1.0, 0.1),
            &Default::default(),
            Cadence {
                diagnostics_every: 2,
                snapshot_every: 0,
            },
            &mut csv,
        )
        .unwrap();
        let text = String::from_utf8(csv.into_inner()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], DIAGNOSTICS_HEADER);
        assert_eq!(lines.len(), 1 + 3);
        assert!(lines[2].starts_with("2,1.0000000000000001e-1,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 12));
    }

    #[test]
    fn checked_mode_reports_step_and_stage() {
        let g = Grid::cube(1, 16, 0.0, 1.0).unwrap();
        let s = State::new(
            Field::from_fn(g, |x| 1.0 + (6.0 * x[0]).sin()),
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            0.0,
        )
        .unwrap();
        let opts = SolverOptions {
            cg: CgOptions {
                tol: 1e-10,
                max_iter: Some(1),
            },
            ..Default::default()
        };
        let err = run_simulation(
            &s,
            &TimeConfig::new(0.1, 0.5).unwrap(),
            &ModelParams::default(),
            &DiffusionCoeffs::constant(1.0, 1.0, 1.0),
            &opts,
            Cadence::SILENT,
            &mut (),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Step {
                step: 1,
                stage: Stage::Diffusion,
                ..
            }
        ));
        assert_eq!(err.exit_code(), 3);
    }
}
