//! Semi-discrete right-hand sides of the advection, thermal flux and
//! interaction parts of the two-temperature system.
//!
//! Advection uses first-order Rusanov fluxes with wave speed `|u| + c_s`,
//! face-averaged pressure, and the nonconservative work term
//! `-p_nu div u` from face-averaged velocities. Thermal fluxes use the
//! centered three-point stencil with face-averaged coefficients.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Vector, MAX_DIM};
use crate::numerics::pairwise_sum;

use super::coefficients::TransportCoefficients;
use super::eos::{EquationOfState, Species};
use super::{TwoTempRates, TwoTempState};

/// Cells with `rho` below this fraction of the largest density are vacuum.
pub const VACUUM_FLOOR_REL: f64 = 1e-12;

pub(crate) struct CellPrimitives {
    pub u: Vec<Vector>,
    pub p_e: Vec<f64>,
    pub p_r: Vec<f64>,
    pub c_s: Vec<f64>,
}

pub(crate) fn primitives(state: &TwoTempState, eos: &EquationOfState) -> Result<CellPrimitives> {
    state.validate()?;
    let rho = state.rho.values();
    let rho_max = rho.iter().fold(0.0_f64, |a, v| a.max(*v));
    let floor = VACUUM_FLOOR_REL * rho_max;
    let n = rho.len();
    let mut out = CellPrimitives {
        u: vec![[0.0; MAX_DIM]; n],
        p_e: vec![0.0; n],
        p_r: vec![0.0; n],
        c_s: vec![0.0; n],
    };
    for cell in 0..n {
        let r = rho[cell];
        if r < floor {
            return Err(Error::Vacuum {
                cell,
                value: r,
                floor,
            });
        }
        let p = state.momentum.get(cell);
        out.u[cell] = [p[0] / r, p[1] / r];
        let (ee, er) = (state.e_e.values()[cell], state.e_r.values()[cell]);
        out.p_e[cell] = eos.pressure(Species::Electron, r, ee);
        out.p_r[cell] = eos.pressure(Species::Radiation, r, er);
        out.c_s[cell] = eos.sound_speed_squared(r, ee, er).sqrt();
    }
    Ok(out)
}

/// Rates of the ideal part together with the conservative rate of the total
/// energy density `|P|^2 / 2 rho + E_e + E_r`.
pub(crate) fn advection_terms(
    state: &TwoTempState,
    eos: &EquationOfState,
) -> Result<(TwoTempRates, ScalarField)> {
    let prim = primitives(state, eos)?;
    let g = state.grid();
    let n = g.dim();
    let len = g.len();
    let rho = state.rho.values();
    let ee = state.e_e.values();
    let er = state.e_r.values();
    let et: Vec<f64> = (0..len).map(|c| state.total_energy_density(c)).collect();
    let pt: Vec<f64> = (0..len).map(|c| prim.p_e[c] + prim.p_r[c]).collect();

    let mut out = TwoTempRates::zeros(g);
    let mut d_et = vec![0.0; len];
    let mut div_u = vec![0.0; len];
    for d in 0..n {
        let hd = g.spacing(d);
        // per right face: [rho, P_0, P_1, E_e, E_r, E_tot, u_face]
        let mut faces = vec![[0.0; 7]; len];
        for (i, f) in faces.iter_mut().enumerate() {
            let j = g.periodic_neighbor(i, d, 1);
            let (ui, uj) = (prim.u[i], prim.u[j]);
            let alpha = (ui[d].abs() + prim.c_s[i]).max(uj[d].abs() + prim.c_s[j]);
            let (pi, pj) = (state.momentum.get(i), state.momentum.get(j));
            let central = |qi: f64, qj: f64| 0.5 * (qi * ui[d] + qj * uj[d]);
            f[0] = 0.5 * (pi[d] + pj[d]) - 0.5 * alpha * (rho[j] - rho[i]);
            for e in 0..n {
                let pressure = if e == d { 0.5 * (pt[i] + pt[j]) } else { 0.0 };
                f[1 + e] = central(pi[e], pj[e]) + pressure - 0.5 * alpha * (pj[e] - pi[e]);
            }
            f[3] = central(ee[i], ee[j]) - 0.5 * alpha * (ee[j] - ee[i]);
            f[4] = central(er[i], er[j]) - 0.5 * alpha * (er[j] - er[i]);
            f[5] = central(et[i] + pt[i], et[j] + pt[j]) - 0.5 * alpha * (et[j] - et[i]);
            f[6] = 0.5 * (ui[d] + uj[d]);
        }
        for i in 0..len {
            let l = g.periodic_neighbor(i, d, -1);
            let diff = |k: usize| (faces[i][k] - faces[l][k]) / hd;
            out.rho.values_mut()[i] -= diff(0);
            let mut m = out.momentum.get(i);
            for e in 0..n {
                m[e] -= diff(1 + e);
            }
            out.momentum.set(i, m);
            out.e_e.values_mut()[i] -= diff(3);
            out.e_r.values_mut()[i] -= diff(4);
            d_et[i] -= diff(5);
            div_u[i] += diff(6);
        }
    }
    for i in 0..len {
        out.e_e.values_mut()[i] -= prim.p_e[i] * div_u[i];
        out.e_r.values_mut()[i] -= prim.p_r[i] * div_u[i];
    }
    Ok((out, ScalarField::from_values(g, d_et)?))
}

/// Ideal (advective and pressure-work) rates of all four fields.
pub fn advection_rhs(state: &TwoTempState, eos: &EquationOfState) -> Result<TwoTempRates> {
    Ok(advection_terms(state, eos)?.0)
}

/// Inverse of the largest summed directional signal speed `sum_d (|u_d| + c_s) / dx_d`.
pub fn max_advection_dt(state: &TwoTempState, eos: &EquationOfState) -> Result<f64> {
    let prim = primitives(state, eos)?;
    let g = state.grid();
    let rate = (0..g.len())
        .map(|c| {
            (0..g.dim())
                .map(|d| (prim.u[c][d].abs() + prim.c_s[c]) / g.spacing(d))
                .sum::<f64>()
        })
        .fold(0.0_f64, f64::max);
    Ok(if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    })
}

/// Face-averaged conductivity and diffusion coefficient on the right face of
/// every cell along every axis: `faces[d][cell] = (K_f, D_f)`.
pub(crate) fn face_coefficients(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let g = state.grid();
    let rho = state.rho.values();
    let mut k = Vec::with_capacity(g.len());
    let mut dd = Vec::with_capacity(g.len());
    for cell in 0..g.len() {
        let te = eos.electron_temperature(rho[cell], state.e_e.values()[cell]);
        k.push(coeffs.conductivity_at(cell, te)?);
        dd.push(coeffs.diffusion_at(cell, te)?);
    }
    Ok((0..g.dim())
        .map(|d| {
            (0..g.len())
                .map(|i| {
                    let j = g.periodic_neighbor(i, d, 1);
                    (0.5 * (k[i] + k[j]), 0.5 * (dd[i] + dd[j]))
                })
                .collect()
        })
        .collect())
}

/// `sum_d (c_f+ (q_j - q_i) - c_f- (q_i - q_l)) / dx_d^2` with face coefficients `c`.
pub(crate) fn diffusion_operator(
    grid: &crate::grid::UniformGrid,
    faces: &[Vec<(f64, f64)>],
    electron: bool,
    q: &[f64],
) -> Vec<f64> {
    let pick = |f: (f64, f64)| if electron { f.0 } else { f.1 };
    (0..grid.len())
        .map(|i| {
            let mut acc = 0.0;
            for (d, fd) in faces.iter().enumerate() {
                let h2 = grid.spacing(d).powi(2);
                let j = grid.periodic_neighbor(i, d, 1);
                let l = grid.periodic_neighbor(i, d, -1);
                acc += (pick(fd[i]) * (q[j] - q[i]) - pick(fd[l]) * (q[i] - q[l])) / h2;
            }
            acc
        })
        .collect()
}

/// `dE_e/dt = div(K_e grad T_e)`, `dE_r/dt = div(D grad E_r)`.
pub fn flux_rhs(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<TwoTempRates> {
    state.validate()?;
    let g = state.grid();
    let faces = face_coefficients(state, eos, coeffs)?;
    let te: Vec<f64> = (0..g.len())
        .map(|c| eos.electron_temperature(state.rho.values()[c], state.e_e.values()[c]))
        .collect();
    let mut out = TwoTempRates::zeros(g);
    out.e_e = ScalarField::from_values(g, diffusion_operator(g, &faces, true, &te))?;
    out.e_r =
        ScalarField::from_values(g, diffusion_operator(g, &faces, false, state.e_r.values()))?;
    Ok(out)
}

/// Largest explicit diffusion step: the inverse of the largest per-cell sum
/// of face diffusivities over `dx_d^2` for either species.
pub fn max_diffusion_dt(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<f64> {
    let g = state.grid();
    let faces = face_coefficients(state, eos, coeffs)?;
    let mut rate: f64 = 0.0;
    for i in 0..g.len() {
        let (mut re, mut rr) = (0.0, 0.0);
        for (d, fd) in faces.iter().enumerate() {
            let h2 = g.spacing(d).powi(2);
            let l = g.periodic_neighbor(i, d, -1);
            re += (fd[i].0 + fd[l].0) / h2;
            rr += (fd[i].1 + fd[l].1) / h2;
        }
        rate = rate.max(re / (state.rho.values()[i] * eos.c_v)).max(rr);
    }
    Ok(if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    })
}

/// Electron heat flux `F_e = -K_e grad T_e`.
pub fn electron_flux(k_e: f64, grad_t_e: &Vector) -> Vector {
    [-k_e * grad_t_e[0], -k_e * grad_t_e[1]]
}

/// Radiation flux `F_r = -D grad E_r`.
pub fn radiation_flux(d: f64, grad_e_r: &Vector) -> Vector {
    [-d * grad_e_r[0], -d * grad_e_r[1]]
}

/// Radiation flux in temperature form `F_r = -4 a T_r^3 D grad T_r`.
pub fn radiation_flux_from_temperature(a: f64, d: f64, t_r: f64, grad_t_r: &Vector) -> Vector {
    let w = 4.0 * a * t_r.powi(3) * d;
    [-w * grad_t_r[0], -w * grad_t_r[1]]
}

/// Energy exchange rate `G_er = sigma_P a c (T_e^4 - T_r^4)`.
pub fn interaction_source(sigma: f64, a: f64, c: f64, t_e: f64, t_r: f64) -> f64 {
    sigma * a * c * (t_e.powi(4) - t_r.powi(4))
}

/// `dE_e/dt = -G_er`, `dE_r/dt = +G_er`.
pub fn interaction_rhs(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<TwoTempRates> {
    state.validate()?;
    let g = state.grid();
    let mut out = TwoTempRates::zeros(g);
    for cell in 0..g.len() {
        let (r, ee, er) = (
            state.rho.values()[cell],
            state.e_e.values()[cell],
            state.e_r.values()[cell],
        );
        let sigma = coeffs.opacity_at(cell, &g.center(cell), ee, er)?;
        let gr = interaction_source(
            sigma,
            eos.a,
            coeffs.c,
            eos.electron_temperature(r, ee),
            eos.radiation_temperature(er),
        );
        out.e_e.values_mut()[cell] = -gr;
        out.e_r.values_mut()[cell] = gr;
    }
    Ok(out)
}

/// Sum of a per-cell quantity times the cell volume.
pub(crate) fn integrate(grid: &crate::grid::UniformGrid, v: &[f64]) -> f64 {
    pairwise_sum(v) * grid.cell_volume()
}
