//! Operator-split time stepping of the two-temperature system.
//!
//! Advection uses two-stage SSP Runge-Kutta and additionally evolves the
//! total energy density in conservation form. After every stage both
//! internal energies are rescaled by a common factor so that their sum equals
//! total minus kinetic energy, which keeps the discrete total energy
//! conserved to roundoff. Thermal fluxes are advanced by forward Euler under
//! a stability guard, or by backward Euler with lagged coefficients. The
//! exchange term is integrated per cell with RK4 subcycling at fixed
//! `E_e + E_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::UniformGrid;
use crate::kinetics::CFL_MAX;

use super::coefficients::TransportCoefficients;
use super::eos::EquationOfState;
use super::rhs::{
    advection_terms, diffusion_operator, face_coefficients, flux_rhs, max_advection_dt,
    max_diffusion_dt,
};
use super::TwoTempState;

/// Composition of the three substeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    /// Advection, then fluxes, then interaction.
    #[default]
    First,
    /// `A(dt/2) F(dt/2) I(dt) F(dt/2) A(dt/2)`.
    Strang,
}

/// Time discretization of the thermal flux substep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionMode {
    #[default]
    Explicit,
    Implicit,
}

/// Options of [`step_2t`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    pub splitting: Splitting,
    pub diffusion: DiffusionMode,
    /// Skip the advection substep (fixed `rho` and `P`).
    pub advection: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            splitting: Splitting::First,
            diffusion: DiffusionMode::Explicit,
            advection: true,
        }
    }
}

/// Relative residual target and iteration cap of the implicit solve.
const CG_TOL: f64 = 1e-13;
const CG_MAX_ITER: usize = 10_000;

/// RK4 substeps resolve the linearized exchange time scale by this fraction.
const EXCHANGE_SUBSTEP: f64 = 0.05;
const MAX_EXCHANGE_SUBSTEPS: usize = 1_000_000;

/// Rescales the internal energies so that their sum matches `e_tot - K`.
fn sync_energy(state: &mut TwoTempState, e_tot: &[f64]) -> Result<()> {
    for (cell, target_tot) in e_tot.iter().enumerate() {
        let p = state.momentum.get(cell);
        let kinetic = (p[0] * p[0] + p[1] * p[1]) / (2.0 * state.rho.values()[cell]);
        let internal = state.e_e.values()[cell] + state.e_r.values()[cell];
        let target = target_tot - kinetic;
        if !(target > 0.0) || !(internal > 0.0) {
            return Err(Error::NonPositive {
                quantity: "internal energy",
                cell,
                value: target.min(internal),
            });
        }
        let f = target / internal;
        state.e_e.values_mut()[cell] *= f;
        state.e_r.values_mut()[cell] *= f;
    }
    state.validate()
}

/// Advection substep of length `dt` (SSP-RK2, energy-synchronized).
pub fn advect(state: &TwoTempState, dt: f64, eos: &EquationOfState) -> Result<TwoTempState> {
    let limit = CFL_MAX * max_advection_dt(state, eos)?;
    if !(dt.abs() <= limit) {
        return Err(Error::CflViolation {
            dt: dt.abs(),
            limit,
        });
    }
    let len = state.grid().len();
    let et0: Vec<f64> = (0..len).map(|c| state.total_energy_density(c)).collect();

    let (r0, de0) = advection_terms(state, eos)?;
    let mut s1 = state.clone();
    s1.apply(dt, &r0);
    let et1: Vec<f64> = (0..len).map(|c| et0[c] + dt * de0.values()[c]).collect();
    s1.validate()?;
    sync_energy(&mut s1, &et1)?;

    let (r1, de1) = advection_terms(&s1, eos)?;
    let mut s2 = s1.clone();
    s2.apply(dt, &r1);
    let mut out = state.clone();
    average_into(&mut out.rho, &s2.rho);
    for c in 0..len {
        let (a, b) = (out.momentum.get(c), s2.momentum.get(c));
        out.momentum
            .set(c, [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }
    average_into(&mut out.e_e, &s2.e_e);
    average_into(&mut out.e_r, &s2.e_r);
    let et2: Vec<f64> = (0..len)
        .map(|c| 0.5 * (et0[c] + et1[c] + dt * de1.values()[c]))
        .collect();
    out.validate()?;
    sync_energy(&mut out, &et2)?;
    Ok(out)
}

fn average_into(a: &mut ScalarField, b: &ScalarField) {
    for (x, y) in a.values_mut().iter_mut().zip(b.values()) {
        *x = 0.5 * (*x + *y);
    }
}

/// Conjugate gradients for the SPD system `(diag + L) x = b`.
fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Vec<f64>,
) -> Result<Vec<f64>> {
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let mut x = x0;
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = CG_TOL * dot(b, b).sqrt();
    for _ in 0..CG_MAX_ITER {
        if rr.sqrt() <= target {
            return Ok(x);
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rr.sqrt() <= target {
        Ok(x)
    } else {
        Err(Error::SolverDiverged {
            iterations: CG_MAX_ITER,
            residual: rr.sqrt(),
        })
    }
}

/// Thermal flux substep of length `dt`.
pub fn diffuse(
    state: &TwoTempState,
    dt: f64,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
    mode: DiffusionMode,
) -> Result<TwoTempState> {
    if coeffs.conductivity.is_zero() && coeffs.diffusion.is_zero() {
        return Ok(state.clone());
    }
    let mut out = state.clone();
    match mode {
        DiffusionMode::Explicit => {
            let limit = max_diffusion_dt(state, eos, coeffs)?;
            if !(dt.abs() <= limit) {
                return Err(Error::CflViolation {
                    dt: dt.abs(),
                    limit,
                });
            }
            out.apply(dt, &flux_rhs(state, eos, coeffs)?);
        }
        DiffusionMode::Implicit => {
            if dt < 0.0 {
                return Err(Error::InvalidParameter(
                    "implicit diffusion needs dt >= 0".into(),
                ));
            }
            let g: &UniformGrid = state.grid();
            let faces = face_coefficients(state, eos, coeffs)?;
            let heat: Vec<f64> = state
                .rho
                .values()
                .iter()
                .map(|r| r * eos.c_v / dt)
                .collect();
            let te: Vec<f64> = (0..g.len())
                .map(|c| eos.electron_temperature(state.rho.values()[c], state.e_e.values()[c]))
                .collect();
            let b: Vec<f64> = te.iter().zip(&heat).map(|(t, w)| t * w).collect();
            let te_new = conjugate_gradient(
                |x| {
                    let lx = diffusion_operator(g, &faces, true, x);
                    x.iter()
                        .zip(&heat)
                        .zip(lx)
                        .map(|((x, w), l)| w * x - l)
                        .collect()
                },
                &b,
                te,
            )?;
            for (c, t) in te_new.iter().enumerate() {
                out.e_e.values_mut()[c] = state.rho.values()[c] * eos.c_v * t;
            }
            let er = state.e_r.values();
            let b: Vec<f64> = er.iter().map(|e| e / dt).collect();
            let er_new = conjugate_gradient(
                |x| {
                    let lx = diffusion_operator(g, &faces, false, x);
                    x.iter().zip(lx).map(|(x, l)| x / dt - l).collect()
                },
                &b,
                er.to_vec(),
            )?;
            out.e_r.values_mut().copy_from_slice(&er_new);
        }
    }
    out.validate()?;
    Ok(out)
}

/// Electron energy at which `T_e = T_r` for fixed `E_e + E_r`.
fn exchange_equilibrium(eos: &EquationOfState, rho: f64, total: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, total);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eos.electron_temperature(rho, mid) > eos.radiation_temperature(total - mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Interaction substep of length `dt`; each cell relaxes at fixed `E_e + E_r`.
pub fn interact(
    state: &TwoTempState,
    dt: f64,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<TwoTempState> {
    state.validate()?;
    let g = state.grid();
    let mut out = state.clone();
    let c = coeffs.c;
    for cell in 0..g.len() {
        let x = g.center(cell);
        let rho = state.rho.values()[cell];
        let total = state.e_e.values()[cell] + state.e_r.values()[cell];
        let rate = |y: f64| -> Result<f64> {
            let er = total - y;
            let sigma = coeffs.opacity_at(cell, &x, y, er)?;
            Ok(-super::rhs::interaction_source(
                sigma,
                eos.a,
                c,
                eos.electron_temperature(rho, y),
                eos.radiation_temperature(er),
            ))
        };
        let mut y = state.e_e.values()[cell];
        let start_sign = rate(y)?.signum();
        if start_sign == 0.0 || dt == 0.0 {
            continue;
        }
        let mut remaining = dt.abs();
        let mut steps = 0;
        let mut settled = false;
        while remaining > 0.0 && !settled {
            steps += 1;
            if steps > MAX_EXCHANGE_SUBSTEPS {
                return Err(Error::SolverDiverged {
                    iterations: steps,
                    residual: remaining,
                });
            }
            let t_e = eos.electron_temperature(rho, y);
            let sigma = coeffs.opacity_at(cell, &x, y, total - y)?;
            let lambda = sigma * c * (4.0 * eos.a * t_e.powi(3) / (rho * eos.c_v) + 1.0);
            let h = if lambda > 0.0 {
                remaining.min(EXCHANGE_SUBSTEP / lambda)
            } else {
                remaining
            };
            let hs = h * dt.signum();
            let next = (|| -> Result<f64> {
                let k1 = rate(y)?;
                let k2 = rate(y + 0.5 * hs * k1)?;
                let k3 = rate(y + 0.5 * hs * k2)?;
                let k4 = rate(y + hs * k3)?;
                Ok(y + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
            })();
            match next {
                Ok(v)
                    if v > 0.0 && v < total && v.is_finite() && rate(v)?.signum() == start_sign =>
                {
                    y = v
                }
                _ if dt > 0.0 => {
                    // the forward relaxation cannot cross T_e = T_r
                    y = exchange_equilibrium(eos, rho, total);
                    settled = true;
                }
                Ok(v) if v > 0.0 && v < total && v.is_finite() => y = v,
                _ => {
                    return Err(Error::NonPositive {
                        quantity: "energy during exchange",
                        cell,
                        value: y,
                    });
                }
            }
            remaining -= h;
        }
        out.e_e.values_mut()[cell] = y;
        out.e_r.values_mut()[cell] = total - y;
    }
    out.validate()?;
    Ok(out)
}

/// One split step of the full two-temperature system.
pub fn step_2t(
    state: &TwoTempState,
    dt: f64,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
    opts: &StepOptions,
) -> Result<TwoTempState> {
    let a = |s: &TwoTempState, h: f64| {
        if opts.advection {
            advect(s, h, eos)
        } else {
            Ok(s.clone())
        }
    };
    let f = |s: &TwoTempState, h: f64| diffuse(s, h, eos, coeffs, opts.diffusion);
    let i = |s: &TwoTempState, h: f64| interact(s, h, eos, coeffs);
    match opts.splitting {
        Splitting::First => i(&f(&a(state, dt)?, dt)?, dt),
        Splitting::Strang => {
            let s = a(state, 0.5 * dt)?;
            let s = f(&s, 0.5 * dt)?;
            let s = i(&s, dt)?;
            let s = f(&s, 0.5 * dt)?;
            a(&s, 0.5 * dt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorField;
    use crate::radhydro::coefficients::{Coefficient, Opacity};
    use std::f64::consts::TAU;

    fn eos() -> EquationOfState {
        EquationOfState::new(5.0 / 3.0, 1.0, 1.0).unwrap()
    }

    fn coeffs(k: f64, d: f64, sigma: f64) -> TransportCoefficients {
        TransportCoefficients::new(
            Coefficient::Constant(k),
            Coefficient::Constant(d),
            Opacity::Constant(sigma),
            1.0,
        )
        .unwrap()
    }

    fn energy(s: &TwoTempState) -> f64 {
        let v: Vec<f64> = (0..s.grid().len())
            .map(|c| s.total_energy_density(c))
            .collect();
        super::super::rhs::integrate(s.grid(), &v)
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let g = UniformGrid::line(16, 0.0, 1.0).unwrap();
        let eos = eos();
        let t = 1.5;
        let s = TwoTempState::new(
            ScalarField::constant(&g, 1.0),
            VectorField::zeros(&g),
            ScalarField::constant(&g, t),
            ScalarField::constant(&g, eos.radiation_energy(t)),
        )
        .unwrap();
        for splitting in [Splitting::First, Splitting::Strang] {
            let opts = StepOptions {
                splitting,
                ..Default::default()
            };
            let next = step_2t(&s, 1e-3, &eos, &coeffs(1.0, 1.0, 1.0), &opts).unwrap();
            assert!(next.e_e.values().iter().all(|v| (v - t).abs() < 1e-14));
            assert!(next.momentum.max_abs() < 1e-15);
        }
    }

    #[test]
    fn relaxation_conserves_energy_and_is_monotone() {
        let g = UniformGrid::line(4, 0.0, 1.0).unwrap();
        let eos = eos();
        let mut s = TwoTempState::new(
            ScalarField::constant(&g, 1.0),
            VectorField::zeros(&g),
            ScalarField::constant(&g, 2.0),
            ScalarField::constant(&g, 1.0),
        )
        .unwrap();
        let total = 3.0;
        let mut gap = f64::INFINITY;
        for _ in 0..150 {
            s = interact(&s, 0.05, &eos, &coeffs(0.0, 0.0, 1.0)).unwrap();
            let te = eos.electron_temperature(1.0, s.e_e.values()[0]);
            let tr = eos.radiation_temperature(s.e_r.values()[0]);
            assert!((s.e_e.values()[0] + s.e_r.values()[0] - total).abs() < 1e-12);
            assert!(te >= tr && te - tr <= gap);
            gap = te - tr;
        }
        assert!(gap < 1e-10, "{gap}");
    }

    #[test]
    fn implicit_diffusion_conserves_energy() {
        let g = UniformGrid::line(32, 0.0, TAU).unwrap();
        let eos = eos();
        let s = TwoTempState::new(
            ScalarField::from_fn(&g, |x| 1.0 + 0.2 * x[0].cos()),
            VectorField::zeros(&g),
            ScalarField::from_fn(&g, |x| 2.0 + x[0].sin()),
            ScalarField::from_fn(&g, |x| 1.0 + 0.5 * x[0].cos()),
        )
        .unwrap();
        let c = coeffs(2.0, 3.0, 0.0);
        let dt = 10.0 * max_diffusion_dt(&s, &eos, &c).unwrap();
        assert!(diffuse(&s, dt, &eos, &c, DiffusionMode::Explicit).is_err());
        let next = diffuse(&s, dt, &eos, &c, DiffusionMode::Implicit).unwrap();
        assert!((next.e_e.integral() - s.e_e.integral()).abs() < 1e-11);
        assert!((next.e_r.integral() - s.e_r.integral()).abs() < 1e-11);
        assert!(next.e_e.values().iter().cloned().fold(0.0, f64::max) < 3.0);
    }

    #[test]
    fn advection_conserves_mass_momentum_energy() {
        let g = UniformGrid::line(64, 0.0, TAU).unwrap();
        let eos = eos();
        let mut s = TwoTempState::new(
            ScalarField::from_fn(&g, |x| 1.0 + 0.2 * x[0].sin()),
            VectorField::from_fn(&g, |x| [0.3 + 0.1 * x[0].cos(), 0.0]),
            ScalarField::from_fn(&g, |x| 2.0 + 0.5 * x[0].cos()),
            ScalarField::constant(&g, 0.7),
        )
        .unwrap();
        let (m0, p0, e0) = (s.rho.integral(), s.momentum.integral()[0], energy(&s));
        let dt = 0.5 * max_advection_dt(&s, &eos).unwrap();
        for _ in 0..20 {
            s = advect(&s, dt, &eos).unwrap();
        }
        assert!((s.rho.integral() - m0).abs() < 1e-12 * m0);
        assert!((s.momentum.integral()[0] - p0).abs() < 1e-12);
        assert!((energy(&s) - e0).abs() < 1e-12 * e0);
        assert!(advect(&s, 2.0 * max_advection_dt(&s, &eos).unwrap(), &eos).is_err());
    }
}
