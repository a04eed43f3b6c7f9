//! Scenario files: TOML parsing and validation into a typed run description.
//!
//! Structural problems (bad TOML, wrong value types, unknown keys) are
//! reported by the deserializer. Every semantic problem found afterwards is
//! collected, so one `validate` call lists all of them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use kinclosure::radhydro::{Coefficient, DiffusionMode, Splitting};
use kinclosure::{Axis, Potential, Scheme, SeparableHamiltonian, UniformGrid, Vector};
use serde::Deserialize;

use crate::profile::Profile;

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;
/// Courant number used when neither `dt` nor `cfl` is given.
pub const DEFAULT_CFL: f64 = 0.5;
/// Largest Courant number accepted.
pub const MAX_CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Kinetic,
    Closure0,
    Closure1,
    Radhydro2t,
    CompareKineticClosure,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Kinetic => "kinetic",
            Kind::Closure0 => "closure0",
            Kind::Closure1 => "closure1",
            Kind::Radhydro2t => "radhydro2t",
            Kind::CompareKineticClosure => "compare_kinetic_closure",
        }
    }

    /// `(name, default tolerance, enabled by default)` of every check of this kind.
    pub fn checks(&self) -> &'static [(&'static str, f64, bool)] {
        match self {
            Kind::Kinetic => &[
                ("mass_conservation", 1e-12, true),
                ("energy_conservation", 1e-12, false),
                ("entropy_monotone", 1e-12, false),
                ("l1_error", 1e-2, false),
            ],
            Kind::Closure0 | Kind::Closure1 => &[
                ("mass_conservation", 1e-12, true),
                ("hamiltonian_drift", 1e-2, false),
                ("burgers_error", 1e-2, false),
            ],
            Kind::Radhydro2t => &[
                ("mass_conservation", 1e-12, true),
                ("energy_conservation", 1e-8, true),
                ("entropy_monotone", 1e-12, true),
                ("momentum_conservation", 1e-12, false),
                ("max_entropy_production", 1e-12, false),
            ],
            Kind::CompareKineticClosure => &[("gap_m0", 0.05, true), ("gap_m1", 0.05, true)],
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---- raw file layout ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    kind: Kind,
    name: Option<String>,
    grid: RawGrid,
    hamiltonian: Option<RawHamiltonian>,
    initial: RawInitial,
    #[serde(default)]
    physics: RawPhysics,
    time: RawTime,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    checks: BTreeMap<String, RawCheck>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x: Vec<RawAxis>,
    #[serde(default)]
    p: Vec<RawAxis>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    cells: usize,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawHamiltonian {
    Radiation {
        c: f64,
    },
    NonRelativistic {
        mass: f64,
        #[serde(default)]
        potential: Option<RawPotential>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawPotential {
    Zero,
    Linear {
        gradient: Vec<f64>,
    },
    Quadratic {
        coefficient: f64,
        center: Vec<f64>,
    },
    Cosine {
        amplitude: f64,
        wavevector: Vec<f64>,
    },
}

/// A profile table: `profile = "<name>"` plus its parameters.
type RawProfile = toml::Table;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    density: Option<RawProfile>,
    p_profile: Option<RawProfile>,
    momentum: Option<Vec<RawProfile>>,
    p0: Option<Vec<RawProfile>>,
    velocity: Option<Vec<RawProfile>>,
    t_e: Option<RawProfile>,
    t_r: Option<RawProfile>,
    #[serde(default)]
    cold_beam: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    collisions: Option<RawCollisions>,
    eos: Option<RawEos>,
    conductivity: Option<RawCoefficient>,
    diffusion: Option<RawCoefficient>,
    opacity: Option<f64>,
    c: Option<f64>,
    #[serde(default)]
    splitting: Splitting,
    #[serde(default)]
    diffusion_mode: DiffusionMode,
    #[serde(default = "yes")]
    advection: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollisions {
    sigma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEos {
    gamma: f64,
    c_v: f64,
    a: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawCoefficient {
    Constant { value: f64 },
    PowerLaw { k0: f64, exponent: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: f64,
    dt: Option<f64>,
    cfl: Option<f64>,
    #[serde(default)]
    scheme: Scheme,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_cadence")]
    cadence: usize,
    directory: Option<String>,
    #[serde(default = "yes")]
    fields: bool,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self {
            cadence: default_cadence(),
            directory: None,
            fields: true,
        }
    }
}

fn default_cadence() -> usize {
    10
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawCheck {
    Enabled(bool),
    Tolerance(f64),
}

// ---- validated scenario ----

/// Step size rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    Cfl(f64),
}

#[derive(Debug, Clone)]
pub struct TimeSpec {
    pub t_end: f64,
    pub step: TimeStep,
    pub scheme: Scheme,
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub cadence: usize,
    pub directory: Option<String>,
    pub fields: bool,
}

/// Initial condition profiles, already checked against the kind.
#[derive(Debug, Clone, Default)]
pub struct InitialSpec {
    pub density: Option<Profile>,
    pub p_profile: Option<Profile>,
    pub momentum: Option<Vec<Profile>>,
    pub p0: Option<Vec<Profile>>,
    pub velocity: Option<Vec<Profile>>,
    pub t_e: Option<Profile>,
    pub t_r: Option<Profile>,
    pub cold_beam: bool,
}

#[derive(Debug, Clone)]
pub struct RadHydroSpec {
    pub gamma: f64,
    pub c_v: f64,
    pub a: f64,
    pub conductivity: Coefficient,
    pub diffusion: Coefficient,
    pub opacity: f64,
    pub c: f64,
    pub splitting: Splitting,
    pub diffusion_mode: DiffusionMode,
    pub advection: bool,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub name: String,
    pub space: UniformGrid,
    pub momentum: Option<UniformGrid>,
    pub hamiltonian: Option<SeparableHamiltonian>,
    pub initial: InitialSpec,
    pub collisions: Option<f64>,
    pub radhydro: Option<RadHydroSpec>,
    pub time: TimeSpec,
    pub output: OutputSpec,
    /// Requested checks and their tolerances, in name order.
    pub checks: Vec<(String, f64)>,
}

/// Every problem found in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub errors: Vec<String>,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} problem(s) in scenario:", self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ScenarioError {}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError {
        errors: vec![format!("cannot read {}: {e}", path.display())],
    })?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario")
        .to_string();
    parse_scenario_str(&text, &stem)
}

/// Validates scenario text; `default_name` is used when `name` is absent.
pub fn parse_scenario_str(text: &str, default_name: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError {
        errors: vec![e.to_string()],
    })?;
    let mut v = Validator::default();
    let scenario = v.scenario(raw, default_name);
    match scenario {
        Some(s) if v.errors.is_empty() => Ok(s),
        _ => Err(ScenarioError { errors: v.errors }),
    }
}

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.err(format!("{field} = {v} must be positive and finite"));
        }
    }

    fn nonnegative(&mut self, field: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.err(format!("{field} = {v} must be nonnegative and finite"));
        }
    }

    fn grid(&mut self, field: &str, axes: &[RawAxis]) -> Option<UniformGrid> {
        if axes.is_empty() || axes.len() > kinclosure::MAX_DIM {
            self.err(format!("{field} needs 1 or 2 axes, got {}", axes.len()));
            return None;
        }
        let mut out = Vec::new();
        for (d, a) in axes.iter().enumerate() {
            match Axis::new(a.cells, a.lo, a.hi) {
                Ok(ax) => out.push(ax),
                Err(e) => self.err(format!("{field}[{d}]: {e}")),
            }
        }
        if out.len() != axes.len() {
            return None;
        }
        UniformGrid::new(out)
            .map_err(|e| self.err(format!("{field}: {e}")))
            .ok()
    }

    fn vector(&mut self, field: &str, v: &[f64], dim: usize) -> Vector {
        if v.len() != dim {
            self.err(format!(
                "{field} has {} components, expected {dim}",
                v.len()
            ));
        }
        let mut out = [0.0; 2];
        for (o, x) in out.iter_mut().zip(v) {
            *o = *x;
        }
        out
    }

    fn number(&mut self, field: &str, t: &toml::Table, key: &str, default: Option<f64>) -> f64 {
        match t.get(key) {
            Some(toml::Value::Float(x)) => *x,
            Some(toml::Value::Integer(i)) => *i as f64,
            Some(other) => {
                self.err(format!("{field}.{key} must be a number, got {other}"));
                0.0
            }
            None => default.unwrap_or_else(|| {
                self.err(format!("{field}.{key} is missing"));
                0.0
            }),
        }
    }

    fn numbers(
        &mut self,
        field: &str,
        t: &toml::Table,
        key: &str,
        dim: usize,
        default: Option<Vector>,
    ) -> Vector {
        match t.get(key) {
            Some(toml::Value::Array(items)) => {
                let mut vals = Vec::new();
                for it in items {
                    match it {
                        toml::Value::Float(x) => vals.push(*x),
                        toml::Value::Integer(i) => vals.push(*i as f64),
                        other => self.err(format!(
                            "{field}.{key} entries must be numbers, got {other}"
                        )),
                    }
                }
                self.vector(&format!("{field}.{key}"), &vals, dim)
            }
            Some(other) => {
                self.err(format!("{field}.{key} must be an array, got {other}"));
                [0.0; 2]
            }
            None => default.unwrap_or_else(|| {
                self.err(format!("{field}.{key} is missing"));
                [0.0; 2]
            }),
        }
    }

    fn profile(&mut self, field: &str, t: &toml::Table, dim: usize) -> Option<Profile> {
        let allowed: &[&str] = match t.get("profile").and_then(|v| v.as_str()) {
            Some("uniform") => &["value"],
            Some("sine") => &["mean", "amplitude", "modes", "phase"],
            Some("gaussian") => &["background", "amplitude", "center", "width"],
            Some("step") => &["left", "right", "position", "axis"],
            Some(other) => {
                self.err(format!(
                    "{field}: unknown profile `{other}` (expected uniform, sine, gaussian or step)"
                ));
                return None;
            }
            None => {
                self.err(format!("{field}: missing string key `profile`"));
                return None;
            }
        };
        for k in t.keys() {
            if k != "profile" && !allowed.contains(&k.as_str()) {
                self.err(format!("{field}: unknown parameter `{k}`"));
            }
        }
        let mut unit = [0.0; 2];
        unit[0] = 1.0;
        let p = match t["profile"].as_str() {
            Some("uniform") => Profile::Uniform {
                value: self.number(field, t, "value", None),
            },
            Some("sine") => Profile::Sine {
                mean: self.number(field, t, "mean", Some(0.0)),
                amplitude: self.number(field, t, "amplitude", None),
                modes: self.numbers(field, t, "modes", dim, Some(unit)),
                phase: self.number(field, t, "phase", Some(0.0)),
            },
            Some("gaussian") => {
                let width = self.number(field, t, "width", None);
                self.positive(&format!("{field}.width"), width);
                Profile::Gaussian {
                    background: self.number(field, t, "background", Some(0.0)),
                    amplitude: self.number(field, t, "amplitude", None),
                    center: self.numbers(field, t, "center", dim, None),
                    width,
                }
            }
            _ => {
                let axis = self.number(field, t, "axis", Some(0.0));
                if !(axis >= 0.0 && axis.fract() == 0.0 && (axis as usize) < dim) {
                    self.err(format!(
                        "{field}.axis = {axis} must be an axis index below {dim}"
                    ));
                }
                Profile::Step {
                    left: self.number(field, t, "left", None),
                    right: self.number(field, t, "right", None),
                    position: self.number(field, t, "position", None),
                    axis: (axis.max(0.0) as usize).min(dim - 1),
                }
            }
        };
        Some(p)
    }

    fn profiles(&mut self, field: &str, ts: &[toml::Table], dim: usize) -> Option<Vec<Profile>> {
        if ts.len() != dim {
            self.err(format!(
                "{field} needs one profile per axis ({dim}), got {}",
                ts.len()
            ));
            return None;
        }
        let out: Vec<Option<Profile>> = ts
            .iter()
            .enumerate()
            .map(|(d, t)| self.profile(&format!("{field}[{d}]"), t, dim))
            .collect();
        out.into_iter().collect()
    }

    fn require<T>(&mut self, kind: Kind, field: &str, v: Option<T>) -> Option<T> {
        if v.is_none() {
            self.err(format!("initial.{field} is required for kind {kind}"));
        }
        v
    }

    fn forbid<T>(&mut self, kind: Kind, field: &str, v: &Option<T>) {
        if v.is_some() {
            self.err(format!("initial.{field} is not used by kind {kind}"));
        }
    }

    fn hamiltonian(
        &mut self,
        raw: Option<RawHamiltonian>,
        kind: Kind,
        dim: usize,
    ) -> Option<SeparableHamiltonian> {
        let raw = match (raw, kind) {
            (None, Kind::Radhydro2t) => return None,
            (Some(_), Kind::Radhydro2t) => {
                self.err("hamiltonian is not used by kind radhydro2t");
                return None;
            }
            (None, _) => {
                self.err(format!("hamiltonian is required for kind {kind}"));
                return None;
            }
            (Some(r), _) => r,
        };
        match raw {
            RawHamiltonian::Radiation { c } => {
                self.positive("hamiltonian.c", c);
                SeparableHamiltonian::radiation(c).ok()
            }
            RawHamiltonian::NonRelativistic { mass, potential } => {
                self.positive("hamiltonian.mass", mass);
                let v = match potential.unwrap_or(RawPotential::Zero) {
                    RawPotential::Zero => Potential::Zero,
                    RawPotential::Linear { gradient } => Potential::Linear {
                        gradient: self.vector("hamiltonian.potential.gradient", &gradient, dim),
                    },
                    RawPotential::Quadratic {
                        coefficient,
                        center,
                    } => Potential::Quadratic {
                        coefficient,
                        center: self.vector("hamiltonian.potential.center", &center, dim),
                    },
                    RawPotential::Cosine {
                        amplitude,
                        wavevector,
                    } => Potential::Cosine {
                        amplitude,
                        wavevector: self.vector(
                            "hamiltonian.potential.wavevector",
                            &wavevector,
                            dim,
                        ),
                    },
                };
                SeparableHamiltonian::non_relativistic(mass, v).ok()
            }
        }
    }

    fn coefficient(&mut self, field: &str, raw: Option<RawCoefficient>) -> Coefficient {
        match raw {
            None => Coefficient::Constant(0.0),
            Some(RawCoefficient::Constant { value }) => {
                self.nonnegative(field, value);
                Coefficient::Constant(value)
            }
            Some(RawCoefficient::PowerLaw { k0, exponent }) => {
                self.nonnegative(&format!("{field}.k0"), k0);
                if !exponent.is_finite() {
                    self.err(format!("{field}.exponent must be finite"));
                }
                Coefficient::PowerLaw { k0, exponent }
            }
        }
    }

    fn scenario(&mut self, raw: RawScenario, default_name: &str) -> Option<Scenario> {
        let kind = raw.kind;
        if raw.schema_version != SCHEMA_VERSION {
            self.err(format!(
                "schema_version = {} is not supported (expected {SCHEMA_VERSION})",
                raw.schema_version
            ));
        }
        let space = self.grid("grid.x", &raw.grid.x);
        let dim = space
            .as_ref()
            .map(|g| g.dim())
            .unwrap_or(raw.grid.x.len().clamp(1, 2));
        let needs_p = matches!(kind, Kind::Kinetic | Kind::CompareKineticClosure);
        let momentum = if needs_p {
            let g = self.grid("grid.p", &raw.grid.p);
            if let Some(m) = &g {
                if m.dim() != dim {
                    self.err(format!("grid.p has {} axes but grid.x has {dim}", m.dim()));
                }
            }
            g
        } else {
            if !raw.grid.p.is_empty() {
                self.err(format!("grid.p is not used by kind {kind}"));
            }
            None
        };
        let hamiltonian = self.hamiltonian(raw.hamiltonian, kind, dim);
        if let (Some(h), Some(x), Some(m)) = (&hamiltonian, &space, &momentum) {
            if let Ok(pg) = kinclosure::PhaseGrid::new(x.clone(), m.clone()) {
                if let Err(e) = h.check_momentum_grid(&pg) {
                    self.err(format!("grid.p: {e}"));
                }
            }
        }

        let ri = raw.initial;
        let mut init = InitialSpec {
            cold_beam: ri.cold_beam,
            ..Default::default()
        };
        let one = |v: &mut Validator, name: &str, t: &Option<toml::Table>| {
            t.as_ref()
                .and_then(|t| v.profile(&format!("initial.{name}"), t, dim))
        };
        let many = |v: &mut Validator, name: &str, t: &Option<Vec<toml::Table>>| {
            t.as_ref()
                .and_then(|t| v.profiles(&format!("initial.{name}"), t, dim))
        };
        init.density = one(self, "density", &ri.density);
        self.require(kind, "density", ri.density.as_ref());
        match kind {
            Kind::Kinetic => {
                if ri.cold_beam {
                    init.momentum = many(self, "momentum", &ri.momentum);
                    self.require(kind, "momentum (cold beam)", ri.momentum.as_ref());
                    self.forbid(kind, "p_profile (cold beam)", &ri.p_profile);
                } else {
                    init.p_profile = one(self, "p_profile", &ri.p_profile);
                    self.require(kind, "p_profile", ri.p_profile.as_ref());
                    self.forbid(kind, "momentum (without cold_beam)", &ri.momentum);
                }
                self.forbid(kind, "p0", &ri.p0);
                self.forbid(kind, "velocity", &ri.velocity);
                self.forbid(kind, "t_e", &ri.t_e);
                self.forbid(kind, "t_r", &ri.t_r);
            }
            Kind::Closure0 | Kind::Closure1 | Kind::CompareKineticClosure => {
                init.momentum = many(self, "momentum", &ri.momentum);
                self.require(kind, "momentum", ri.momentum.as_ref());
                if kind == Kind::Closure1 {
                    init.p0 = many(self, "p0", &ri.p0);
                } else {
                    self.forbid(kind, "p0", &ri.p0);
                }
                self.forbid(kind, "p_profile", &ri.p_profile);
                self.forbid(kind, "velocity", &ri.velocity);
                self.forbid(kind, "t_e", &ri.t_e);
                self.forbid(kind, "t_r", &ri.t_r);
                if ri.cold_beam {
                    self.err(format!("initial.cold_beam is not used by kind {kind}"));
                }
            }
            Kind::Radhydro2t => {
                init.t_e = one(self, "t_e", &ri.t_e);
                init.t_r = one(self, "t_r", &ri.t_r);
                init.velocity = many(self, "velocity", &ri.velocity);
                self.require(kind, "t_e", ri.t_e.as_ref());
                self.require(kind, "t_r", ri.t_r.as_ref());
                self.forbid(kind, "p_profile", &ri.p_profile);
                self.forbid(kind, "momentum", &ri.momentum);
                self.forbid(kind, "p0", &ri.p0);
                if ri.cold_beam {
                    self.err("initial.cold_beam is not used by kind radhydro2t");
                }
            }
        }

        let phys = raw.physics;
        let collisions = phys.collisions.map(|c| {
            self.nonnegative("physics.collisions.sigma", c.sigma);
            c.sigma
        });
        if collisions.is_some() {
            let radiation = hamiltonian
                .as_ref()
                .map(|h| h.is_radiation())
                .unwrap_or(false);
            if kind != Kind::Kinetic || !radiation {
                self.err("physics.collisions needs kind kinetic with a radiation hamiltonian");
            }
            if ri.cold_beam {
                self.err("physics.collisions cannot be combined with initial.cold_beam");
            }
        }
        let radhydro = if kind == Kind::Radhydro2t {
            let eos = phys.eos.map(|e| {
                if !(e.gamma > 1.0 && e.gamma.is_finite()) {
                    self.err(format!("physics.eos.gamma = {} must exceed 1", e.gamma));
                }
                self.positive("physics.eos.c_v", e.c_v);
                self.positive("physics.eos.a", e.a);
                e
            });
            if eos.is_none() {
                self.err("physics.eos is required for kind radhydro2t");
            }
            let conductivity = self.coefficient("physics.conductivity", phys.conductivity);
            let diffusion = self.coefficient("physics.diffusion", phys.diffusion);
            let opacity = phys.opacity.unwrap_or(0.0);
            self.nonnegative("physics.opacity", opacity);
            let c = phys.c.unwrap_or(1.0);
            self.positive("physics.c", c);
            eos.map(|e| RadHydroSpec {
                gamma: e.gamma,
                c_v: e.c_v,
                a: e.a,
                conductivity,
                diffusion,
                opacity,
                c,
                splitting: phys.splitting,
                diffusion_mode: phys.diffusion_mode,
                advection: phys.advection,
            })
        } else {
            if phys.eos.is_some()
                || phys.conductivity.is_some()
                || phys.diffusion.is_some()
                || phys.opacity.is_some()
            {
                self.err(format!(
                    "physics.eos/conductivity/diffusion/opacity are not used by kind {kind}"
                ));
            }
            None
        };

        let t = raw.time;
        self.positive("time.t_end", t.t_end);
        let step = match (t.dt, t.cfl) {
            (Some(_), Some(_)) => {
                self.err("time.dt and time.cfl are mutually exclusive");
                TimeStep::Cfl(DEFAULT_CFL)
            }
            (Some(dt), None) => {
                self.positive("time.dt", dt);
                TimeStep::Fixed(dt)
            }
            (None, Some(cfl)) => {
                if !(cfl > 0.0 && cfl <= MAX_CFL) {
                    self.err(format!("time.cfl = {cfl} must lie in (0, {MAX_CFL}]"));
                }
                TimeStep::Cfl(cfl)
            }
            (None, None) => TimeStep::Cfl(DEFAULT_CFL),
        };
        if raw.output.cadence == 0 {
            self.err("output.cadence must be at least 1");
        }

        let mut checks: BTreeMap<String, f64> = kind
            .checks()
            .iter()
            .filter(|c| c.2)
            .map(|c| (c.0.to_string(), c.1))
            .collect();
        for (name, chk) in &raw.checks {
            let Some(known) = kind.checks().iter().find(|c| c.0 == name) else {
                let names: Vec<&str> = kind.checks().iter().map(|c| c.0).collect();
                self.err(format!(
                    "checks.{name} is not a check of kind {kind} (known: {})",
                    names.join(", ")
                ));
                continue;
            };
            match chk {
                RawCheck::Enabled(true) => {
                    checks.insert(name.clone(), known.1);
                }
                RawCheck::Enabled(false) => {
                    checks.remove(name);
                }
                RawCheck::Tolerance(tol) => {
                    self.positive(&format!("checks.{name}"), *tol);
                    checks.insert(name.clone(), *tol);
                }
            }
        }
        let has = |c: &str| checks.contains_key(c);
        if has("l1_error") {
            let force_free = hamiltonian
                .as_ref()
                .map(|h| h.is_force_free())
                .unwrap_or(true);
            if ri.cold_beam || collisions.is_some() || !force_free {
                self.err(
                    "checks.l1_error needs force-free transport without collisions or cold_beam",
                );
            }
        }
        if has("burgers_error") {
            let fluid = matches!(
                hamiltonian,
                Some(SeparableHamiltonian::NonRelativistic { .. })
            );
            let force_free = hamiltonian
                .as_ref()
                .map(|h| h.is_force_free())
                .unwrap_or(false);
            if !(fluid && force_free && dim == 1 && kind == Kind::Closure0) {
                self.err("checks.burgers_error needs kind closure0 on a line with a force-free nonrelativistic hamiltonian");
            }
        }
        let name = raw.name.unwrap_or_else(|| default_name.to_string());
        if name.is_empty() || name.contains(['/', '\\']) {
            self.err(format!("name `{name}` must be a nonempty plain file name"));
        }

        Some(Scenario {
            kind,
            name,
            space: space?,
            momentum: if needs_p { Some(momentum?) } else { None },
            hamiltonian: if kind == Kind::Radhydro2t {
                None
            } else {
                Some(hamiltonian?)
            },
            initial: init,
            collisions,
            radhydro: if kind == Kind::Radhydro2t {
                Some(radhydro?)
            } else {
                None
            },
            time: TimeSpec {
                t_end: t.t_end,
                step,
                scheme: t.scheme,
            },
            output: OutputSpec {
                cadence: raw.output.cadence,
                directory: raw.output.directory,
                fields: raw.output.fields,
            },
            checks: checks.into_iter().collect(),
        })
    }
}
