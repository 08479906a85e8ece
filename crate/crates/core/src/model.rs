//! Model parameters, the three-species state and the free energy.

use crate::error::{Error, Result, Species};
use crate::grid::{ensure_same_grid, integral, Field, Grid};

/// Reference concentrations and rate constants of `A + B <-> C`.
///
/// Construction enforces detailed balance, `k_plus * a_inf * b_inf == k_minus * c_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    a_inf: f64,
    b_inf: f64,
    c_inf: f64,
    k_plus: f64,
    k_minus: f64,
}

impl ModelParams {
    pub fn new(a_inf: f64, b_inf: f64, c_inf: f64, k_plus: f64, k_minus: f64) -> Result<Self> {
        for (name, v) in [
            ("a_inf", a_inf),
            ("b_inf", b_inf),
            ("c_inf", c_inf),
            ("k_plus", k_plus),
            ("k_minus", k_minus),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        let forward = k_plus * a_inf * b_inf;
        let backward = k_minus * c_inf;
        if (forward - backward).abs() > 1e-12 * forward.max(backward) {
            return Err(Error::InvalidParams(format!(
                "detailed balance violated: k_plus*a_inf*b_inf = {forward}, k_minus*c_inf = {backward}"
            )));
        }
        Ok(ModelParams {
            a_inf,
            b_inf,
            c_inf,
            k_plus,
            k_minus,
        })
    }

    /// Unit rate constants; `c_inf` follows from detailed balance.
    pub fn with_unit_rates(a_inf: f64, b_inf: f64) -> Result<Self> {
        ModelParams::new(a_inf, b_inf, a_inf * b_inf, 1.0, 1.0)
    }

    pub fn a_inf(&self) -> f64 {
        self.a_inf
    }

    pub fn b_inf(&self) -> f64 {
        self.b_inf
    }

    pub fn c_inf(&self) -> f64 {
        self.c_inf
    }

    pub fn k_plus(&self) -> f64 {
        self.k_plus
    }

    pub fn k_minus(&self) -> f64 {
        self.k_minus
    }

    pub fn reference(&self, species: Species) -> f64 {
        match species {
            Species::A => self.a_inf,
            Species::B => self.b_inf,
            Species::C => self.c_inf,
        }
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            a_inf: 1.0,
            b_inf: 1.0,
            c_inf: 1.0,
            k_plus: 1.0,
            k_minus: 1.0,
        }
    }
}

/// Concentrations `(a, b, c)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub a: Field,
    pub b: Field,
    pub c: Field,
    pub time: f64,
}

impl State {
    pub fn new(a: Field, b: Field, c: Field, time: f64) -> Result<Self> {
        ensure_same_grid(&a, &b)?;
        ensure_same_grid(&a, &c)?;
        Ok(State { a, b, c, time })
    }

    pub fn uniform(grid: Grid, a: f64, b: f64, c: f64) -> Self {
        State {
            a: Field::constant(grid, a),
            b: Field::constant(grid, b),
            c: Field::constant(grid, c),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    pub fn field(&self, species: Species) -> &Field {
        match species {
            Species::A => &self.a,
            Species::B => &self.b,
            Species::C => &self.c,
        }
    }

    pub fn fields(&self) -> [(Species, &Field); 3] {
        [(Species::A, &self.a), (Species::B, &self.b), (Species::C, &self.c)]
    }

    /// Fails with the first nonpositive cell found, scanning a, then b, then c.
    pub fn check_positive(&self) -> Result<()> {
        for (species, field) in self.fields() {
            if let Some(index) = field.values().iter().position(|&v| !(v > 0.0)) {
                return Err(Error::NonPositive {
                    species,
                    index,
                    value: field.values()[index],
                });
            }
        }
        Ok(())
    }

    /// Conserved totals `(<a + c, 1>, <b + c, 1>)`.
    pub fn masses(&self) -> (f64, f64) {
        let c = integral(&self.c);
        (integral(&self.a) + c, integral(&self.b) + c)
    }

    pub fn minima(&self) -> [f64; 3] {
        [self.a.min(), self.b.min(), self.c.min()]
    }
}

/// Discrete free energy `<x (ln(x / x_inf) - 1), 1>` summed over the three species.
pub fn discrete_energy(s: &State, p: &ModelParams) -> Result<f64> {
    let mut total = 0.0;
    for (species, field) in s.fields() {
        let inf = p.reference(species);
        let mut sum = 0.0;
        for (index, &x) in field.values().iter().enumerate() {
            if !(x > 0.0) {
                return Err(Error::NonPositive {
                    species,
                    index,
                    value: x,
                });
            }
            sum += x * ((x / inf).ln() - 1.0);
        }
        total += sum;
    }
    Ok(s.grid().cell_volume() * total)
}

/// Chemical potentials `ln(x / x_inf)` for each species.
pub fn chemical_potentials(s: &State, p: &ModelParams) -> Result<(Field, Field, Field)> {
    s.check_positive()?;
    let mu = |species| s.field(species).map(|x| (x / p.reference(species)).ln());
    Ok((mu(Species::A), mu(Species::B), mu(Species::C)))
}
