//! Conserved totals, entropy and entropy production of the two-temperature model.
//!
//! The flux production is the exact semi-discrete rate of the total entropy
//! under [`flux_rhs`](super::flux_rhs): summation by parts over faces gives
//! `sum_f V K_f (dT_e)^2 / (T_i T_j dx^2)` plus
//! `sum_f V D_f dE_r (1/T_r,i - 1/T_r,j) / dx^2`, both nonnegative termwise.

use serde::Serialize;

use crate::error::Result;
use crate::grid::{norm, Vector};

use super::coefficients::TransportCoefficients;
use super::eos::{EquationOfState, Species};
use super::rhs::{face_coefficients, integrate};
use super::TwoTempState;

/// Summary of one two-temperature state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics2T {
    pub mass: f64,
    pub momentum: Vector,
    pub energy: f64,
    pub entropy: f64,
    pub flux_production: f64,
    pub interaction_production: f64,
    pub max_grad_te: f64,
    pub max_grad_tr: f64,
    pub max_temperature_gap: f64,
}

/// Smooth form of the exchange weight `T_e T_r G_er / (T_e - T_r)`.
pub fn interaction_weight(sigma: f64, a: f64, c: f64, t_e: f64, t_r: f64) -> f64 {
    t_e * t_r * sigma * a * c * (t_e + t_r) * (t_e * t_e + t_r * t_r)
}

/// Onsager matrix on `(rho, E_e, E_r)`: `diag(0, T_e^2 K_e, 4 a T_r^5 D)`.
pub fn onsager_matrix(a: f64, t_e: f64, t_r: f64, k_e: f64, d: f64) -> [[f64; 3]; 3] {
    [
        [0.0, 0.0, 0.0],
        [0.0, t_e * t_e * k_e, 0.0],
        [0.0, 0.0, 4.0 * a * t_r.powi(5) * d],
    ]
}

/// Onsager matrix at every cell.
pub fn onsager_matrices(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<Vec<[[f64; 3]; 3]>> {
    state.validate()?;
    (0..state.grid().len())
        .map(|cell| {
            let t_e = eos.electron_temperature(state.rho.values()[cell], state.e_e.values()[cell]);
            let t_r = eos.radiation_temperature(state.e_r.values()[cell]);
            Ok(onsager_matrix(
                eos.a,
                t_e,
                t_r,
                coeffs.conductivity_at(cell, t_e)?,
                coeffs.diffusion_at(cell, t_e)?,
            ))
        })
        .collect()
}

fn cell_temperatures(state: &TwoTempState, eos: &EquationOfState) -> (Vec<f64>, Vec<f64>) {
    let rho = state.rho.values();
    let te = (0..rho.len())
        .map(|c| eos.electron_temperature(rho[c], state.e_e.values()[c]))
        .collect();
    let tr = state
        .e_r
        .values()
        .iter()
        .map(|e| eos.radiation_temperature(*e))
        .collect();
    (te, tr)
}

/// Entropy production rate of the discrete thermal flux operator.
pub fn flux_entropy_production(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<f64> {
    state.validate()?;
    let g = state.grid();
    let faces = face_coefficients(state, eos, coeffs)?;
    let (te, tr) = cell_temperatures(state, eos);
    let er = state.e_r.values();
    let mut terms = vec![0.0; g.len()];
    for (d, fd) in faces.iter().enumerate() {
        let h2 = g.spacing(d).powi(2);
        for (i, t) in terms.iter_mut().enumerate() {
            let j = g.periodic_neighbor(i, d, 1);
            let (k_f, d_f) = fd[i];
            let dte = te[j] - te[i];
            *t += k_f * dte * dte / (te[i] * te[j] * h2);
            *t += d_f * (er[j] - er[i]) * (1.0 / tr[i] - 1.0 / tr[j]) / h2;
        }
    }
    Ok(integrate(g, &terms))
}

/// Entropy production rate of the exchange term,
/// `int (1/T_e - 1/T_r)^2 T_e T_r G_er / (T_e - T_r)`.
pub fn interaction_entropy_production(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<f64> {
    state.validate()?;
    let g = state.grid();
    let (te, tr) = cell_temperatures(state, eos);
    let mut terms = Vec::with_capacity(g.len());
    for cell in 0..g.len() {
        let sigma = coeffs.opacity_at(
            cell,
            &g.center(cell),
            state.e_e.values()[cell],
            state.e_r.values()[cell],
        )?;
        let force = 1.0 / te[cell] - 1.0 / tr[cell];
        terms.push(force * force * interaction_weight(sigma, eos.a, coeffs.c, te[cell], tr[cell]));
    }
    Ok(integrate(g, &terms))
}

fn max_gradient(grid: &crate::grid::UniformGrid, v: Vec<f64>) -> Result<f64> {
    let f = crate::field::ScalarField::from_values(grid, v)?;
    Ok(f.gradient().values().iter().map(norm).fold(0.0, f64::max))
}

/// Totals, entropy, both production rates and equilibrium indicators.
pub fn diagnostics_2t(
    state: &TwoTempState,
    eos: &EquationOfState,
    coeffs: &TransportCoefficients,
) -> Result<Diagnostics2T> {
    state.validate()?;
    let g = state.grid();
    let rho = state.rho.values();
    let energy: Vec<f64> = (0..g.len())
        .map(|c| state.total_energy_density(c))
        .collect();
    let entropy: Vec<f64> = (0..g.len())
        .map(|c| {
            eos.entropy_density(Species::Electron, rho[c], state.e_e.values()[c])
                + eos.entropy_density(Species::Radiation, rho[c], state.e_r.values()[c])
        })
        .collect();
    let (te, tr) = cell_temperatures(state, eos);
    let gap = te
        .iter()
        .zip(&tr)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Diagnostics2T {
        mass: state.rho.integral(),
        momentum: state.momentum.integral(),
        energy: integrate(g, &energy),
        entropy: integrate(g, &entropy),
        flux_production: flux_entropy_production(state, eos, coeffs)?,
        interaction_production: interaction_entropy_production(state, eos, coeffs)?,
        max_grad_te: max_gradient(g, te)?,
        max_grad_tr: max_gradient(g, tr)?,
        max_temperature_gap: gap,
    })
}
