//! TOML run configuration.
//!
//! Every section is optional; omitted keys fall back to the two-disc scene
//! on `(-1, 1)^2` with `D = (0.05, 1, 0.1)` and `T = 0.2`.
//!
//! ```toml
//! [grid]
//! dim = 2
//! n = 64
//! lower = [-1.0, -1.0]
//! upper = [1.0, 1.0]
//!
//! [model]
//! a_inf = 1.0
//! b_inf = 1.0
//! c_inf = 1.0
//! k_plus = 1.0
//! k_minus = 1.0
//!
//! [diffusion.a]
//! profile = "constant"      # or "sinusoid" with `base` and `amplitude`
//! value = 0.05
//!
//! [time]
//! dt = 0.01
//! t_final = 0.2
//!
//! [solver]
//! reaction_tol = 1e-12
//! reaction_max_iter = 100
//! cg_tol = 1e-10
//! cg_max_iter = 0           # 0 selects 10 * cells
//!
//! [output]
//! out_dir = "out"
//! diagnostics_every = 1
//! snapshot_every = 0
//! checked = true
//!
//! [initial]
//! kind = "two-disc"         # or "uniform" (a, b, c) or "snapshot" (paths a, b, c)
//!
//! [study_time]
//! dts = [0.04, 0.02, 0.01, 0.005]
//! ref_dt = 0.00125
//!
//! [study_space]
//! inverse_h = [20, 30, 40, 50, 60]
//! dt_rule = "h2"            # or "fixed" together with `dt`
//! interpolation = "trigonometric"  # or "multilinear"
//! ```
//!
//! Dotted overrides such as `time.dt=0.005` are applied to the parsed table
//! before validation.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diffusion::CgOptions;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{ModelParams, State};
use crate::reaction::ReactionOptions;
use crate::snapshot;
use crate::splitting::{Cadence, SolverOptions, TimeConfig};
use crate::stencil::{DiffusionCoeff, DiffusionCoeffs};
use crate::study::{DtRule, InitialCondition, Interpolation, Scene};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub model: ModelSpec,
    pub diffusion: DiffusionSpec,
    pub time: TimeSpec,
    pub solver: SolverSpec,
    pub output: OutputSpec,
    pub initial: InitialSpec,
    pub study_time: StudyTimeSpec,
    pub study_space: StudySpaceSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::default(),
            model: ModelSpec::default(),
            diffusion: DiffusionSpec::default(),
            time: TimeSpec::default(),
            solver: SolverSpec::default(),
            output: OutputSpec::default(),
            initial: InitialSpec::TwoDisc,
            study_time: StudyTimeSpec::default(),
            study_space: StudySpaceSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dim: 2,
            n: 64,
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub a_inf: f64,
    pub b_inf: f64,
    pub c_inf: f64,
    pub k_plus: f64,
    pub k_minus: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            a_inf: 1.0,
            b_inf: 1.0,
            c_inf: 1.0,
            k_plus: 1.0,
            k_minus: 1.0,
        }
    }
}

/// Named diffusion profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiffusionProfile {
    Constant { value: f64 },
    /// `base * (1 + amplitude * prod_k sin(2 pi (x_k - lower_k) / L_k))`; needs `|amplitude| < 1`.
    Sinusoid { base: f64, amplitude: f64 },
}

impl DiffusionProfile {
    fn validate(&self, species: &str) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("diffusion.{species}: {m}")));
        match *self {
            DiffusionProfile::Constant { value } if !(value.is_finite() && value > 0.0) => {
                bad(format!("value must be positive, got {value}"))
            }
            DiffusionProfile::Sinusoid { base, .. } if !(base.is_finite() && base > 0.0) => {
                bad(format!("base must be positive, got {base}"))
            }
            DiffusionProfile::Sinusoid { amplitude, .. } if !(amplitude.abs() < 1.0) => {
                bad(format!("amplitude must lie in (-1, 1), got {amplitude}"))
            }
            _ => Ok(()),
        }
    }

    pub fn to_coeff(&self, grid: &Grid) -> DiffusionCoeff {
        match *self {
            DiffusionProfile::Constant { value } => DiffusionCoeff::Constant(value),
            DiffusionProfile::Sinusoid { base, amplitude } => {
                let lower = grid.lower().to_vec();
                let upper = grid.upper().to_vec();
                DiffusionCoeff::function(move |x| {
                    let wave: f64 = x
                        .iter()
                        .enumerate()
                        .map(|(k, xk)| (2.0 * PI * (xk - lower[k]) / (upper[k] - lower[k])).sin())
                        .product();
                    base * (1.0 + amplitude * wave)
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionSpec {
    pub a: DiffusionProfile,
    pub b: DiffusionProfile,
    pub c: DiffusionProfile,
}

impl Default for DiffusionSpec {
    fn default() -> Self {
        DiffusionSpec {
            a: DiffusionProfile::Constant { value: 0.05 },
            b: DiffusionProfile::Constant { value: 1.0 },
            c: DiffusionProfile::Constant { value: 0.1 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_final: f64,
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            dt: 0.01,
            t_final: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub reaction_tol: f64,
    pub reaction_max_iter: usize,
    pub cg_tol: f64,
    /// Zero selects `10 * cells`.
    pub cg_max_iter: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            reaction_tol: 1e-12,
            reaction_max_iter: 100,
            cg_tol: 1e-10,
            cg_max_iter: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub out_dir: PathBuf,
    pub diagnostics_every: usize,
    pub snapshot_every: usize,
    pub checked: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            out_dir: PathBuf::from("out"),
            diagnostics_every: 1,
            snapshot_every: 0,
            checked: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    TwoDisc,
    Uniform { a: f64, b: f64, c: f64 },
    Snapshot { a: PathBuf, b: PathBuf, c: PathBuf },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::TwoDisc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyTimeSpec {
    pub dts: Vec<f64>,
    pub ref_dt: f64,
}

impl Default for StudyTimeSpec {
    fn default() -> Self {
        StudyTimeSpec {
            dts: vec![1.0 / 25.0, 1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0],
            ref_dt: 1.0 / 800.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtRuleSpec {
    H2,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySpaceSpec {
    /// Mesh sizes as `1 / h`.
    pub inverse_h: Vec<u32>,
    pub dt_rule: DtRuleSpec,
    /// Used with `dt_rule = "fixed"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// How fine solutions are sampled at coarse cell centers.
    pub interpolation: InterpolationSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolationSpec {
    Trigonometric,
    Multilinear,
}

impl Default for StudySpaceSpec {
    fn default() -> Self {
        StudySpaceSpec {
            inverse_h: vec![20, 30, 40, 50, 60],
            dt_rule: DtRuleSpec::H2,
            dt: None,
            interpolation: InterpolationSpec::Trigonometric,
        }
    }
}

/// Everything needed to launch a simulation, validated.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub grid: Grid,
    pub params: ModelParams,
    pub coeffs: DiffusionCoeffs,
    pub time: TimeConfig,
    pub options: SolverOptions,
    pub cadence: Cadence,
    pub initial: State,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and validates a config file. Unreadable files are configuration errors.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = &self.grid;
        Grid::new(g.dim, g.n, &g.lower, &g.upper).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        ModelParams::new(m.a_inf, m.b_inf, m.c_inf, m.k_plus, m.k_minus)
            .map_err(|e| Error::Config(format!("model: {e}")))
    }

    pub fn time_config(&self) -> Result<TimeConfig> {
        TimeConfig::new(self.time.dt, self.time.t_final).map_err(|e| Error::Config(format!("time: {e}")))
    }

    pub fn coeffs(&self, grid: &Grid) -> DiffusionCoeffs {
        DiffusionCoeffs {
            a: self.diffusion.a.to_coeff(grid),
            b: self.diffusion.b.to_coeff(grid),
            c: self.diffusion.c.to_coeff(grid),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            reaction: ReactionOptions {
                tol: self.solver.reaction_tol,
                max_iter: self.solver.reaction_max_iter,
            },
            cg: CgOptions {
                tol: self.solver.cg_tol,
                max_iter: (self.solver.cg_max_iter != 0).then_some(self.solver.cg_max_iter),
            },
            checked: self.output.checked,
        }
    }

    /// Field-level checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.params()?;
        self.time_config()?;
        self.diffusion.a.validate("a")?;
        self.diffusion.b.validate("b")?;
        self.diffusion.c.validate("c")?;
        let s = &self.solver;
        if !(s.reaction_tol > 0.0 && s.cg_tol > 0.0) {
            return Err(Error::Config("solver: tolerances must be positive".into()));
        }
        if s.reaction_max_iter == 0 {
            return Err(Error::Config("solver: reaction_max_iter must be positive".into()));
        }
        if let InitialSpec::Uniform { a, b, c } = self.initial {
            if !(a > 0.0 && b > 0.0 && c > 0.0) {
                return Err(Error::Config(format!(
                    "initial: uniform concentrations must be positive, got ({a}, {b}, {c})"
                )));
            }
        }
        if let InitialSpec::TwoDisc = self.initial {
            let unit_box = Grid::cube(2, grid.n(), -1.0, 1.0)?;
            if grid.dim() != 2 || !grid.same_domain(&unit_box) {
                return Err(Error::Config(
                    "initial: kind \"two-disc\" needs grid dim = 2 on (-1, 1)^2".into(),
                ));
            }
        }
        let st = &self.study_time;
        if st.dts.len() < 2 {
            return Err(Error::Config(format!(
                "study_time.dts: need at least two step sizes, got {}",
                st.dts.len()
            )));
        }
        if st.dts.iter().chain([&st.ref_dt]).any(|dt| !(*dt > 0.0)) {
            return Err(Error::Config("study_time: step sizes must be positive".into()));
        }
        let sp = &self.study_space;
        if sp.inverse_h.len() < 3 {
            return Err(Error::Config(format!(
                "study_space.inverse_h: need at least three resolutions, got {}",
                sp.inverse_h.len()
            )));
        }
        if sp.inverse_h.windows(2).any(|w| w[0] >= w[1]) || sp.inverse_h[0] == 0 {
            return Err(Error::Config(
                "study_space.inverse_h must be positive and strictly increasing".into(),
            ));
        }
        if sp.dt_rule == DtRuleSpec::Fixed && !matches!(sp.dt, Some(dt) if dt > 0.0) {
            return Err(Error::Config(
                "study_space: dt_rule = \"fixed\" needs a positive dt".into(),
            ));
        }
        Ok(())
    }

    fn initial_condition(&self) -> InitialCondition {
        match self.initial {
            InitialSpec::Uniform { a, b, c } => InitialCondition::Uniform { a, b, c },
            _ => InitialCondition::TwoDisc,
        }
    }

    /// Builds everything `run` needs, reading snapshot files if requested.
    pub fn run_setup(&self) -> Result<RunSetup> {
        let grid = self.grid()?;
        let initial = match &self.initial {
            InitialSpec::Snapshot { a, b, c } => {
                let read = |p: &PathBuf| -> Result<snapshot::Snapshot> {
                    let s = snapshot::read_field(p)?;
                    if s.field.grid() != &grid {
                        return Err(Error::Config(format!(
                            "initial: snapshot {} does not match the configured grid",
                            p.display()
                        )));
                    }
                    Ok(s)
                };
                let (sa, sb, sc) = (read(a)?, read(b)?, read(c)?);
                let s = State::new(sa.field, sb.field, sc.field, sa.time)?;
                s.check_positive()
                    .map_err(|e| Error::Config(format!("initial: {e}")))?;
                s
            }
            _ => self.initial_condition().build(&grid)?,
        };
        Ok(RunSetup {
            grid,
            params: self.params()?,
            coeffs: self.coeffs(&grid),
            time: self.time_config()?,
            options: self.solver_options(),
            cadence: Cadence {
                diagnostics_every: self.output.diagnostics_every,
                snapshot_every: self.output.snapshot_every,
            },
            initial,
            out_dir: self.output.out_dir.clone(),
        })
    }

    /// Scene shared by both studies. Snapshot initial data are grid-bound and
    /// so cannot seed a study over several resolutions.
    pub fn study_scene(&self, checked: bool) -> Result<Scene> {
        if let InitialSpec::Snapshot { .. } = self.initial {
            return Err(Error::Config(
                "studies need an analytic initial condition, not snapshot files".into(),
            ));
        }
        let grid = self.grid()?;
        let mut options = self.solver_options();
        options.checked = checked;
        Ok(Scene {
            params: self.params()?,
            coeffs: self.coeffs(&grid),
            initial: self.initial_condition(),
            options,
        })
    }

    pub fn study_grids(&self) -> Result<Vec<Grid>> {
        let g = &self.grid;
        let length = g.upper[0] - g.lower[0];
        self.study_space
            .inverse_h
            .iter()
            .map(|&inv| {
                let cells = length * inv as f64;
                let n = cells.round();
                if (cells - n).abs() > 1e-9 * cells {
                    return Err(Error::Config(format!(
                        "study_space: h = 1/{inv} does not divide the domain length {length}"
                    )));
                }
                Grid::new(g.dim, n as usize, &g.lower, &g.upper)
                    .map_err(|e| Error::Config(format!("study_space: {e}")))
            })
            .collect()
    }

    pub fn study_dt_rule(&self) -> DtRule {
        match self.study_space.dt_rule {
            DtRuleSpec::H2 => DtRule::HSquared,
            DtRuleSpec::Fixed => DtRule::Fixed(self.study_space.dt.unwrap_or(0.0)),
        }
    }

    pub fn study_interpolation(&self) -> Interpolation {
        match self.study_space.interpolation {
            InterpolationSpec::Trigonometric => Interpolation::Trigonometric,
            InterpolationSpec::Multilinear => Interpolation::Multilinear,
        }
    }
}

/// Applies one `section.key=value` override. The value is read as a TOML
/// value when it parses as one and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| {
        Error::Config(format!("override `{assignment}` has an empty key"))
    })?;
    let mut node = table;
    for part in parts {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            _ => {
                return Err(Error::Config(format!(
                    "override `{assignment}`: `{part}` is not a section"
                )))
            }
        };
    }
    node.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.time_config().unwrap().steps(), 20);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let text = r#"
            [grid]
            n = 32
            [diffusion.b]
            profile = "sinusoid"
            base = 1.0
            amplitude = 0.5
            [initial]
            kind = "uniform"
            a = 1.0
            b = 2.0
            c = 0.5
            [study_space]
            dt_rule = "fixed"
            dt = 0.001
        "#;
        let c = RunConfig::from_toml_str(text, &[]).unwrap();
        let once = c.to_toml_string();
        let again = RunConfig::from_toml_str(&once, &[]).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml_string(), once);
    }

    #[test]
    fn overrides() {
        let c = RunConfig::from_toml_str("", &["time.dt=0.005".into(), "grid.n = 16".into()]).unwrap();
        assert_eq!(c.time.dt, 0.005);
        assert_eq!(c.grid.n, 16);
        let c = RunConfig::from_toml_str("", &["output.out_dir=results/x".into()]).unwrap();
        assert_eq!(c.output.out_dir, PathBuf::from("results/x"));

        let err = RunConfig::from_toml_str("", &["time.dt=0.013".into()]).unwrap_err();
        assert!(err.to_string().contains("integer multiple"), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(RunConfig::from_toml_str("", &["nonsense".into()]).is_err());
        assert!(RunConfig::from_toml_str("", &["time.dt.x=1".into()]).is_err());
    }

    #[test]
    fn field_level_errors() {
        let cases = [
            ("[grid]\ndim = 4", "grid"),
            ("[model]\nc_inf = 2.0", "detailed balance"),
            ("[diffusion.a]\nprofile = \"constant\"\nvalue = -1.0", "diffusion.a"),
            ("[diffusion.c]\nprofile = \"sinusoid\"\nbase = 1.0\namplitude = 1.5", "amplitude"),
            ("[study_time]\ndts = [0.01]", "study_time.dts"),
            ("[study_space]\ninverse_h = [20, 30]", "study_space.inverse_h"),
            ("[grid]\nlower = [0.0, 0.0]", "two-disc"),
            ("[bogus]\nx = 1", "unknown field"),
        ];
        for (text, needle) in cases {
            let err = RunConfig::from_toml_str(text, &[]).unwrap_err();
            assert!(err.to_string().contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = RunConfig::load(Path::new("/definitely/not/here.toml"), &[]).unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.toml"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn study_grids_from_inverse_h() {
        let c = RunConfig::default();
        let grids = c.study_grids().unwrap();
        let ns: Vec<usize> = grids.iter().map(|g| g.n()).collect();
        assert_eq!(ns, vec![40, 60, 80, 100, 120]);
        assert!((grids[1].spacing() - 1.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn sinusoid_profile_is_positive_and_periodic() {
        let g = Grid::cube(2, 8, -1.0, 1.0).unwrap();
        let p = DiffusionProfile::Sinusoid {
            base: 0.5,
            amplitude: 0.9,
        };
        let DiffusionCoeff::Function(f) = p.to_coeff(&g) else {
            panic!("expected a function coefficient")
        };
        assert!((f(&[-1.0, 0.3]) - f(&[1.0, 0.3])).abs() < 1e-15);
        assert!((f(&[-0.5, -0.5]) - 0.5 * 1.9).abs() < 1e-15);
    }
}
