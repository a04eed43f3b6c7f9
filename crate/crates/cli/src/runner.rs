//! Run orchestration: builds initial data, advances the solver of the
//! scenario's kind, records diagnostics and evaluates the requested checks.

use kinclosure::closures::{
    collective_hamiltonian, init_phi_from_momentum, m1_from_state0, m1_from_state1, max_closure_dt,
    step_closure, ClosureState,
};
use kinclosure::collisions::{step_transport_collisions, ScatteringKernel};
use kinclosure::kinetics::{
    boltzmann_entropy, max_stable_dt, step_transport, total_energy, total_mass, total_momentum,
    wave_entropy,
};
use kinclosure::moments::{grid_delta_linear, kinetic_moment};
use kinclosure::radhydro::{
    diagnostics_2t, max_advection_dt, max_diffusion_dt, step_2t, temperatures, DiffusionMode,
    EquationOfState, Opacity, StepOptions, TransportCoefficients, TwoTempState,
};
use kinclosure::{
    DistributionField, PhaseGrid, ScalarField, SeparableHamiltonian, UniformGrid, Vector,
    VectorField,
};

use crate::profile::{Domain, Profile};
use crate::scenario::{Kind, Scenario, TimeStep};

/// Column-labelled numeric table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// One diagnostics row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

/// Outcome of one requested check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Solver abort with its location in the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub step: usize,
    pub time: f64,
    pub message: String,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub kind: Kind,
    /// Names of the columns after `step` and `time`.
    pub diagnostics_header: Vec<String>,
    /// Rows at the output cadence, always including the first and last step.
    pub diagnostics: Vec<DiagnosticsRow>,
    /// Final cell fields.
    pub fields: Table,
    pub verdicts: Vec<Verdict>,
    pub summary: Vec<(String, String)>,
    pub failure: Option<Failure>,
}

impl RunReport {
    /// The run finished and every verdict passed.
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.verdicts.iter().all(|v| v.pass)
    }

    /// Value of a summary key parsed as a number.
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.parse().ok())
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }
}

/// Per-step history shared by every kind.
struct History {
    header: Vec<String>,
    rows: Vec<DiagnosticsRow>,
}

impl History {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, step: usize, time: f64, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.header.len());
        self.rows.push(DiagnosticsRow { step, time, values });
    }

    fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }
}

/// Largest relative departure from the first value.
fn relative_drift(col: &[f64]) -> f64 {
    let Some(first) = col.first() else {
        return f64::NAN;
    };
    let scale = if *first != 0.0 { first.abs() } else { 1.0 };
    col.iter()
        .map(|v| (v - first).abs() / scale)
        .fold(0.0, f64::max)
}

/// Largest one-step decrease relative to the initial magnitude.
fn worst_decrease(col: &[f64]) -> f64 {
    let Some(first) = col.first() else {
        return f64::NAN;
    };
    let scale = if *first != 0.0 { first.abs() } else { 1.0 };
    col.windows(2)
        .map(|w| (w[0] - w[1]) / scale)
        .fold(0.0, f64::max)
}

fn nan_max(col: &[f64]) -> f64 {
    col.iter().fold(f64::NEG_INFINITY, |m, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(*v)
        }
    })
}

/// Sampled profile on cell centers.
fn sample(profile: &Profile, grid: &UniformGrid) -> ScalarField {
    let domain = Domain::of(grid);
    ScalarField::from_fn(grid, |x| profile.eval(&domain, x))
}

fn sample_vector(profiles: &[Profile], grid: &UniformGrid) -> VectorField {
    let domain = Domain::of(grid);
    VectorField::from_fn(grid, |x| {
        let mut v = [0.0; 2];
        for (d, p) in profiles.iter().enumerate() {
            v[d] = p.eval(&domain, x);
        }
        v
    })
}

/// Step length for the next step, clipped to land on `t_end`.
fn next_dt(rule: TimeStep, limit: f64, t: f64, t_end: f64) -> f64 {
    let dt = match rule {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Cfl(c) => {
            if limit.is_finite() {
                c * limit
            } else {
                t_end
            }
        }
    };
    let remaining = t_end - t;
    if dt >= remaining * (1.0 - 1e-12) {
        remaining
    } else {
        dt
    }
}

/// Shared time loop. `limit` gives the current stability bound, `advance` the
/// step itself and `record` the diagnostics values of the current state.
struct Driver<'a, S> {
    scenario: &'a Scenario,
    state: S,
    history: History,
    t: f64,
    step: usize,
}

impl<'a, S> Driver<'a, S> {
    fn run(
        mut self,
        mut limit: impl FnMut(&S) -> Result<f64, String>,
        mut advance: impl FnMut(&S, f64) -> Result<S, String>,
        mut record: impl FnMut(&S) -> Result<Vec<f64>, String>,
    ) -> (S, History, f64, usize, Option<Failure>) {
        let t_end = self.scenario.time.t_end;
        let fail = |d: &Self, e: String| {
            Some(Failure {
                step: d.step,
                time: d.t,
                message: e,
            })
        };
        match record(&self.state) {
            Ok(v) => self.history.push(0, 0.0, v),
            Err(e) => {
                let f = fail(&self, e);
                return (self.state, self.history, self.t, self.step, f);
            }
        }
        while self.t < t_end {
            let lim = match limit(&self.state) {
                Ok(l) => l,
                Err(e) => {
                    let f = fail(&self, e);
                    return (self.state, self.history, self.t, self.step, f);
                }
            };
            let dt = next_dt(self.scenario.time.step, lim, self.t, t_end);
            match advance(&self.state, dt) {
                Ok(s) => self.state = s,
                Err(e) => {
                    let f = fail(&self, e);
                    return (self.state, self.history, self.t, self.step, f);
                }
            }
            self.step += 1;
            self.t = if dt == t_end - self.t {
                t_end
            } else {
                self.t + dt
            };
            match record(&self.state) {
                Ok(v) => self.history.push(self.step, self.t, v),
                Err(e) => {
                    let f = fail(&self, e);
                    return (self.state, self.history, self.t, self.step, f);
                }
            }
        }
        (self.state, self.history, self.t, self.step, None)
    }
}

/// Partial result assembled by each kind.
struct Outcome {
    history: History,
    fields: Table,
    metrics: Vec<(String, f64)>,
    steps: usize,
    t: f64,
    failure: Option<Failure>,
}

/// Runs a validated scenario. Solver aborts are reported in
/// [`RunReport::failure`] with the partial outputs up to that point.
pub fn run(scenario: &Scenario) -> RunReport {
    log::info!("running {} ({})", scenario.name, scenario.kind);
    let outcome = match scenario.kind {
        Kind::Kinetic => run_kinetic(scenario),
        Kind::Closure0 | Kind::Closure1 => run_closure(scenario),
        Kind::Radhydro2t => run_radhydro(scenario),
        Kind::CompareKineticClosure => run_compare(scenario),
    };
    let outcome = outcome.unwrap_or_else(|message| Outcome {
        history: History::new(&[]),
        fields: Table::default(),
        metrics: Vec::new(),
        steps: 0,
        t: 0.0,
        failure: Some(Failure {
            step: 0,
            time: 0.0,
            message,
        }),
    });
    finish(scenario, outcome)
}

fn finish(scenario: &Scenario, o: Outcome) -> RunReport {
    let mut verdicts = Vec::new();
    for (check, tol) in &scenario.checks {
        let measured = match check.as_str() {
            "mass_conservation" => o.history.column("mass").map(|c| relative_drift(&c)),
            "energy_conservation" => o.history.column("energy").map(|c| relative_drift(&c)),
            "hamiltonian_drift" => o.history.column("hamiltonian").map(|c| relative_drift(&c)),
            "entropy_monotone" => o.history.column("entropy").map(|c| worst_decrease(&c)),
            "momentum_conservation" => {
                let cols: Vec<Vec<f64>> = ["momentum_x", "momentum_y"]
                    .iter()
                    .filter_map(|c| o.history.column(c))
                    .collect();
                if cols.is_empty() {
                    None
                } else {
                    Some(
                        cols.iter()
                            .map(|c| c.iter().map(|v| (v - c[0]).abs()).fold(0.0, f64::max))
                            .fold(0.0, f64::max),
                    )
                }
            }
            "max_entropy_production" => {
                match (
                    o.history.column("flux_production"),
                    o.history.column("interaction_production"),
                ) {
                    (Some(a), Some(b)) => Some(nan_max(
                        &a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>(),
                    )),
                    _ => None,
                }
            }
            other => o.metrics.iter().find(|(k, _)| k == other).map(|(_, v)| *v),
        }
        .unwrap_or(f64::NAN);
        verdicts.push(Verdict {
            check: check.clone(),
            measured,
            tolerance: *tol,
            pass: measured <= *tol,
        });
    }

    let cadence = scenario.output.cadence;
    let last = o.history.rows.last().map(|r| r.step);
    let diagnostics = o
        .history
        .rows
        .iter()
        .filter(|r| r.step % cadence == 0 || Some(r.step) == last)
        .cloned()
        .collect();

    let mut summary = vec![
        ("name".to_string(), scenario.name.clone()),
        ("kind".to_string(), scenario.kind.to_string()),
        (
            "status".to_string(),
            if o.failure.is_some() {
                "aborted"
            } else {
                "completed"
            }
            .to_string(),
        ),
        ("steps".to_string(), o.steps.to_string()),
        ("time".to_string(), format!("{:.16e}", o.t)),
        (
            "dx".to_string(),
            format!("{:.16e}", scenario.space.spacing(0)),
        ),
        ("cells".to_string(), scenario.space.len().to_string()),
    ];
    if let Some(m) = &scenario.momentum {
        summary.push(("dp".to_string(), format!("{:.16e}", m.spacing(0))));
    }
    for (k, v) in &o.metrics {
        summary.push((k.clone(), format!("{v:.16e}")));
    }
    if let Some(f) = &o.failure {
        summary.push(("error".to_string(), f.message.clone()));
        summary.push(("error_step".to_string(), f.step.to_string()));
        summary.push(("error_time".to_string(), format!("{:.16e}", f.time)));
    }
    RunReport {
        name: scenario.name.clone(),
        kind: scenario.kind,
        diagnostics_header: o.history.header,
        diagnostics,
        fields: o.fields,
        verdicts,
        summary,
        failure: o.failure,
    }
}

fn driver<'a, S>(scenario: &'a Scenario, state: S, header: &[&str]) -> Driver<'a, S> {
    Driver {
        scenario,
        state,
        history: History::new(header),
        t: 0.0,
        step: 0,
    }
}

fn coords(grid: &UniformGrid) -> (Vec<String>, Vec<Vec<f64>>) {
    let names = ["x", "y"][..grid.dim()]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = grid
        .centers()
        .iter()
        .map(|c| c[..grid.dim()].to_vec())
        .collect();
    (names, rows)
}

fn field_table(grid: &UniformGrid, columns: Vec<(&str, Vec<f64>)>) -> Table {
    let (mut header, mut rows) = coords(grid);
    for (name, col) in columns {
        header.push(name.to_string());
        for (r, v) in rows.iter_mut().zip(col) {
            r.push(v);
        }
    }
    Table { header, rows }
}

fn axis_names(prefix: &str, dim: usize) -> Vec<String> {
    ["x", "y"][..dim]
        .iter()
        .map(|a| format!("{prefix}_{a}"))
        .collect()
}

// ---- kinetic ----

fn phase_grid(s: &Scenario) -> Result<PhaseGrid, String> {
    let m = s.momentum.clone().ok_or("missing momentum grid")?;
    PhaseGrid::new(s.space.clone(), m).map_err(|e| e.to_string())
}

fn hamiltonian(s: &Scenario) -> Result<SeparableHamiltonian, String> {
    s.hamiltonian
        .clone()
        .ok_or_else(|| "missing hamiltonian".to_string())
}

fn kinetic_initial(s: &Scenario, grid: &PhaseGrid) -> Result<DistributionField, String> {
    let density = sample(
        s.initial.density.as_ref().ok_or("missing density")?,
        grid.space(),
    );
    if s.initial.cold_beam {
        let p0 = sample_vector(
            s.initial.momentum.as_deref().ok_or("missing momentum")?,
            grid.space(),
        );
        return grid_delta_linear(grid, &density, &p0).map_err(|e| e.to_string());
    }
    let prof = s.initial.p_profile.as_ref().ok_or("missing p_profile")?;
    let pd = Domain::of(grid.momentum());
    let xd = Domain::of(grid.space());
    let rho = s.initial.density.clone().ok_or("missing density")?;
    Ok(DistributionField::from_fn(grid, |x, p| {
        rho.eval(&xd, x) * prof.eval(&pd, p)
    }))
}

fn kinetic_entropy(g: &DistributionField, h: &SeparableHamiltonian) -> f64 {
    let s = if h.is_radiation() {
        wave_entropy(g)
    } else {
        boltzmann_entropy(g).map(|v| -v)
    };
    s.unwrap_or(f64::NAN)
}

fn run_kinetic(s: &Scenario) -> Result<Outcome, String> {
    let grid = phase_grid(s)?;
    let h = hamiltonian(s)?;
    h.check_momentum_grid(&grid).map_err(|e| e.to_string())?;
    let g0 = kinetic_initial(s, &grid)?;
    let dim = grid.dim();
    let kernel = match s.collisions {
        Some(sigma) => Some(
            ScatteringKernel::isotropic(&grid, &ScalarField::constant(grid.space(), sigma))
                .map_err(|e| e.to_string())?,
        ),
        None => None,
    };
    let mut header = vec!["mass".to_string(), "energy".to_string()];
    header.extend(axis_names("momentum", dim));
    header.extend(["min_value".to_string(), "entropy".to_string()]);
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let stable = max_stable_dt(&grid, &h);
    let scheme = s.time.scheme;
    let (g, history, t, steps, failure) = driver(s, g0, &header).run(
        |_| Ok(stable),
        |g, dt| {
            match &kernel {
                Some(k) => step_transport_collisions(g, k, &h, dt, scheme),
                None => step_transport(g, &h, dt, scheme),
            }
            .map_err(|e| e.to_string())
        },
        |g| {
            let p = total_momentum(g);
            let mut v = vec![total_mass(g), total_energy(g, &h)];
            v.extend_from_slice(&p[..dim]);
            v.push(g.min());
            v.push(kinetic_entropy(g, &h));
            Ok(v)
        },
    );

    let mut metrics = Vec::new();
    if failure.is_none() && !s.initial.cold_beam && s.collisions.is_none() && h.is_force_free() {
        metrics.push(("l1_error".to_string(), translate_error(s, &g, &h, t)?));
    }
    let m0 = kinetic_moment(&g, &h, 0)
        .and_then(|m| m.to_scalar())
        .map_err(|e| e.to_string())?;
    let m1 = kinetic_moment(&g, &h, 1)
        .and_then(|m| m.to_vector())
        .map_err(|e| e.to_string())?;
    let mut cols = vec![("m0", m0.into_values())];
    let names = axis_names("m1", dim);
    for (d, n) in names.iter().enumerate() {
        cols.push((n.as_str(), m1.component(d).into_values()));
    }
    let fields = field_table(grid.space(), cols);
    Ok(Outcome {
        history,
        fields,
        metrics,
        steps,
        t,
        failure,
    })
}

/// Relative L1 distance to the exact free-streaming translate at time `t`.
fn translate_error(
    s: &Scenario,
    g: &DistributionField,
    h: &SeparableHamiltonian,
    t: f64,
) -> Result<f64, String> {
    let grid = g.grid();
    let rho = s.initial.density.as_ref().ok_or("missing density")?;
    let prof = s.initial.p_profile.as_ref().ok_or("missing p_profile")?;
    let (xd, pd) = (Domain::of(grid.space()), Domain::of(grid.momentum()));
    let exact = DistributionField::from_fn(grid, |x, p| {
        let z = h.velocity(p);
        let back = xd.wrap(&[x[0] - z[0] * t, x[1] - z[1] * t]);
        rho.eval(&xd, &back) * prof.eval(&pd, p)
    });
    let num = g.l1_distance(&exact).map_err(|e| e.to_string())?;
    let den = exact.values().iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume();
    Ok(num / den)
}

// ---- closures ----

/// Potential and slope matching `P = -grad phi` for a periodic momentum field.
fn closure_potential(p: &VectorField) -> Result<(ScalarField, Vector), String> {
    let mean = p.integral();
    let vol: f64 = p.grid().len() as f64 * p.grid().cell_volume();
    let mut slope = [0.0; 2];
    for d in 0..p.dim() {
        slope[d] = -mean[d] / vol;
    }
    let mut shifted = p.clone();
    for c in 0..p.grid().len() {
        let v = p.get(c);
        shifted.set(c, [v[0] + slope[0], v[1] + slope[1]]);
    }
    let phi = init_phi_from_momentum(&shifted).map_err(|e| e.to_string())?;
    Ok((phi, slope))
}

fn closure_initial(s: &Scenario) -> Result<ClosureState, String> {
    let h = hamiltonian(s)?;
    let m0 = sample(
        s.initial.density.as_ref().ok_or("missing density")?,
        &s.space,
    );
    let p = sample_vector(
        s.initial.momentum.as_deref().ok_or("missing momentum")?,
        &s.space,
    );
    let (phi, slope) = closure_potential(&p)?;
    let state = if s.kind == Kind::Closure1 {
        let p0 = match &s.initial.p0 {
            Some(ps) => sample_vector(ps, &s.space),
            None => VectorField::zeros(&s.space),
        };
        ClosureState::degree1(h, m0, p0, phi, slope)
    } else {
        ClosureState::degree0(h, m0, phi, slope)
    };
    state.map_err(|e| e.to_string())
}

fn closure_m1(state: &ClosureState) -> Result<VectorField, String> {
    if state.degree() == 0 {
        m1_from_state0(state)
    } else {
        m1_from_state1(state)
    }
    .map_err(|e| e.to_string())
}

fn run_closure(s: &Scenario) -> Result<Outcome, String> {
    let state = closure_initial(s)?;
    let dim = s.space.dim();
    let scheme = s.time.scheme;
    let (state, history, t, steps, failure) =
        driver(s, state, &["mass", "hamiltonian", "max_grad_phi"]).run(
            |c| Ok(max_closure_dt(c)),
            |c, dt| step_closure(c, dt, scheme).map_err(|e| e.to_string()),
            |c| {
                Ok(vec![
                    c.fields.m0.integral(),
                    collective_hamiltonian(c),
                    c.grad_phi().max_abs(),
                ])
            },
        );
    let mut metrics = Vec::new();
    if failure.is_none() {
        if let Some(err) = burgers_error(s, &state, t)? {
            metrics.push(("burgers_error".to_string(), err));
        }
    }
    let grad = state.grad_phi();
    let mut cols = vec![
        ("m0", state.fields.m0.values().to_vec()),
        ("phi", state.phi_total().into_values()),
    ];
    let gnames = axis_names("grad_phi", dim);
    let pnames = axis_names("p0", dim);
    let mnames = axis_names("m1", dim);
    for (d, n) in gnames.iter().enumerate() {
        cols.push((n.as_str(), grad.component(d).into_values()));
    }
    if let Some(p0) = &state.fields.p0 {
        for (d, n) in pnames.iter().enumerate() {
            cols.push((n.as_str(), p0.component(d).into_values()));
        }
    }
    if let Ok(m1) = closure_m1(&state) {
        for (d, n) in mnames.iter().enumerate() {
            cols.push((n.as_str(), m1.component(d).into_values()));
        }
    }
    let fields = field_table(&s.space, cols);
    Ok(Outcome {
        history,
        fields,
        metrics,
        steps,
        t,
        failure,
    })
}

/// `max |u - u_exact|` with `u = -grad phi / m` against the characteristics
/// solution of pressureless Burgers. Only defined for force-free fluid
/// closures on a line.
fn burgers_error(s: &Scenario, state: &ClosureState, t: f64) -> Result<Option<f64>, String> {
    let SeparableHamiltonian::NonRelativistic { mass, .. } = &state.hamiltonian else {
        return Ok(None);
    };
    if s.space.dim() != 1 || !state.hamiltonian.is_force_free() {
        return Ok(None);
    }
    let momentum = s.initial.momentum.as_ref().ok_or("missing momentum")?;
    let dom = Domain::of(&s.space);
    let u0 = |x: f64| momentum[0].eval(&dom, &dom.wrap(&[x, 0.0])) / mass;
    let umax = (0..4096)
        .map(|i| u0(dom.lo[0] + dom.length[0] * i as f64 / 4096.0).abs())
        .fold(0.0, f64::max);
    let grad = state.grad_phi();
    let mut err: f64 = 0.0;
    for c in 0..s.space.len() {
        let x = s.space.center(c)[0];
        // the foot x0 solves x0 + u0(x0) t = x, monotone before the shock
        let (mut lo, mut hi) = (x - umax * t - 1e-12, x + umax * t + 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + u0(mid) * t < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let exact = u0(0.5 * (lo + hi));
        let u = -grad.get(c)[0] / mass;
        err = err.max((u - exact).abs());
    }
    Ok(Some(err))
}

// ---- compare ----

fn run_compare(s: &Scenario) -> Result<Outcome, String> {
    let grid = phase_grid(s)?;
    let h = hamiltonian(s)?;
    h.check_momentum_grid(&grid).map_err(|e| e.to_string())?;
    let closure = closure_initial(s)?;
    let mut beam = closure.grad_phi();
    for c in 0..beam.grid().len() {
        let q = beam.get(c);
        beam.set(c, [-q[0], -q[1]]);
    }
    let g = grid_delta_linear(&grid, &closure.fields.m0, &beam).map_err(|e| e.to_string())?;
    let stable = max_stable_dt(&grid, &h);
    let scheme = s.time.scheme;
    let gaps = |g: &DistributionField, c: &ClosureState| -> Result<(f64, f64), String> {
        let k0 = kinetic_moment(g, &h, 0)
            .and_then(|m| m.to_scalar())
            .map_err(|e| e.to_string())?;
        let k1 = kinetic_moment(g, &h, 1)
            .and_then(|m| m.to_vector())
            .map_err(|e| e.to_string())?;
        let c1 = closure_m1(c)?;
        let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        let zero = vec![0.0; k0.values().len()];
        let g0 = l1(k0.values(), c.fields.m0.values()) / l1(c.fields.m0.values(), &zero);
        let (mut num, mut den) = (0.0, 0.0);
        for d in 0..grid.dim() {
            num += l1(k1.component(d).values(), c1.component(d).values());
            den += l1(c1.component(d).values(), &zero);
        }
        Ok((g0, num / den))
    };
    let (state, history, t, steps, failure) = driver(
        s,
        (g, closure),
        &["mass_kinetic", "mass_closure", "gap_m0", "gap_m1"],
    )
    .run(
        |(_, c)| Ok(stable.min(max_closure_dt(c))),
        |(g, c), dt| {
            let g = step_transport(g, &h, dt, scheme).map_err(|e| e.to_string())?;
            let c = step_closure(c, dt, scheme).map_err(|e| e.to_string())?;
            Ok((g, c))
        },
        |(g, c)| {
            let (g0, g1) = gaps(g, c)?;
            Ok(vec![total_mass(g), c.fields.m0.integral(), g0, g1])
        },
    );
    let (g, c) = state;
    let mut metrics = Vec::new();
    if failure.is_none() {
        let (g0, g1) = gaps(&g, &c)?;
        metrics.push(("gap_m0".to_string(), g0));
        metrics.push(("gap_m1".to_string(), g1));
    }
    let k0 = kinetic_moment(&g, &h, 0)
        .and_then(|m| m.to_scalar())
        .map_err(|e| e.to_string())?;
    let k1 = kinetic_moment(&g, &h, 1)
        .and_then(|m| m.to_vector())
        .map_err(|e| e.to_string())?;
    let mut cols = vec![
        ("m0_kinetic", k0.into_values()),
        ("m0_closure", c.fields.m0.values().to_vec()),
    ];
    let kn = axis_names("m1_kinetic", grid.dim());
    let cn = axis_names("m1_closure", grid.dim());
    let c1 = closure_m1(&c).ok();
    for d in 0..grid.dim() {
        cols.push((kn[d].as_str(), k1.component(d).into_values()));
        let col = c1
            .as_ref()
            .map(|m| m.component(d).into_values())
            .unwrap_or_else(|| vec![f64::NAN; s.space.len()]);
        cols.push((cn[d].as_str(), col));
    }
    let fields = field_table(&s.space, cols);
    Ok(Outcome {
        history,
        fields,
        metrics,
        steps,
        t,
        failure,
    })
}

// ---- two-temperature radiation hydrodynamics ----

/// Validated EOS, coefficients and initial state of a 2T scenario.
pub fn radhydro_setup(
    s: &Scenario,
) -> Result<(EquationOfState, TransportCoefficients, TwoTempState), String> {
    let spec = s.radhydro.as_ref().ok_or("missing radhydro physics")?;
    let eos = EquationOfState::new(spec.gamma, spec.c_v, spec.a).map_err(|e| e.to_string())?;
    let coeffs = TransportCoefficients::new(
        spec.conductivity.clone(),
        spec.diffusion.clone(),
        Opacity::Constant(spec.opacity),
        spec.c,
    )
    .map_err(|e| e.to_string())?;
    let rho = sample(
        s.initial.density.as_ref().ok_or("missing density")?,
        &s.space,
    );
    let t_e = sample(s.initial.t_e.as_ref().ok_or("missing t_e")?, &s.space);
    let t_r = sample(s.initial.t_r.as_ref().ok_or("missing t_r")?, &s.space);
    let u = match &s.initial.velocity {
        Some(v) => sample_vector(v, &s.space),
        None => VectorField::zeros(&s.space),
    };
    let mut momentum = VectorField::zeros(&s.space);
    let mut e_e = ScalarField::zeros(&s.space);
    let mut e_r = ScalarField::zeros(&s.space);
    for c in 0..s.space.len() {
        let r = rho.values()[c];
        let v = u.get(c);
        momentum.set(c, [r * v[0], r * v[1]]);
        e_e.values_mut()[c] = r * eos.c_v * t_e.values()[c];
        e_r.values_mut()[c] = eos.radiation_energy(t_r.values()[c]);
    }
    let state = TwoTempState::new(rho, momentum, e_e, e_r).map_err(|e| e.to_string())?;
    Ok((eos, coeffs, state))
}

fn run_radhydro(s: &Scenario) -> Result<Outcome, String> {
    let (eos, coeffs, state) = radhydro_setup(s)?;
    let spec = s.radhydro.as_ref().ok_or("missing radhydro physics")?;
    let opts = StepOptions {
        splitting: spec.splitting,
        diffusion: spec.diffusion_mode,
        advection: spec.advection,
    };
    let dim = s.space.dim();
    let mut header = vec!["mass".to_string()];
    header.extend(axis_names("momentum", dim));
    header.extend(
        [
            "energy",
            "entropy",
            "flux_production",
            "interaction_production",
            "max_grad_te",
            "max_grad_tr",
            "max_temperature_gap",
        ]
        .map(String::from),
    );
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let (state, history, t, steps, failure) = driver(s, state, &header).run(
        |st| {
            let mut lim = f64::INFINITY;
            if opts.advection {
                lim = lim.min(max_advection_dt(st, &eos).map_err(|e| e.to_string())?);
            }
            if opts.diffusion == DiffusionMode::Explicit {
                lim = lim.min(max_diffusion_dt(st, &eos, &coeffs).map_err(|e| e.to_string())?);
            }
            Ok(lim)
        },
        |st, dt| step_2t(st, dt, &eos, &coeffs, &opts).map_err(|e| e.to_string()),
        |st| {
            let d = diagnostics_2t(st, &eos, &coeffs).map_err(|e| e.to_string())?;
            let mut v = vec![d.mass];
            v.extend_from_slice(&d.momentum[..dim]);
            v.extend([
                d.energy,
                d.entropy,
                d.flux_production,
                d.interaction_production,
                d.max_grad_te,
                d.max_grad_tr,
                d.max_temperature_gap,
            ]);
            Ok(v)
        },
    );
    let rho = state.rho.values().to_vec();
    let mut cols = vec![("rho", rho.clone())];
    let names = axis_names("u", dim);
    for (d, n) in names.iter().enumerate() {
        let p = state.momentum.component(d).into_values();
        cols.push((n.as_str(), p.iter().zip(&rho).map(|(p, r)| p / r).collect()));
    }
    let (te, tr) = temperatures(&state, &eos)
        .map(|(a, b)| (a.into_values(), b.into_values()))
        .unwrap_or_else(|_| (vec![f64::NAN; s.space.len()], vec![f64::NAN; s.space.len()]));
    cols.push(("t_e", te));
    cols.push(("t_r", tr));
    cols.push(("e_e", state.e_e.values().to_vec()));
    cols.push(("e_r", state.e_r.values().to_vec()));
    let fields = field_table(&s.space, cols);
    Ok(Outcome {
        history,
        fields,
        metrics: Vec::new(),
        steps,
        t,
        failure,
    })
}
