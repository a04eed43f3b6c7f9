//! Equations of state: a gamma-law electron gas and blackbody radiation.
//!
//! Entropy densities are `Sigma_e = rho c_v ln(E_e rho^-gamma)` and
//! `Sigma_r = (4/3) a^(1/4) E_r^(3/4)`, so `dSigma/dE = 1/T` holds exactly with
//! `T_e = E_e / (rho c_v)` and `E_r = a T_r^4`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;

use super::TwoTempState;

/// Species of the two-temperature model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Electron,
    Radiation,
}

/// Electron gamma-law parameters and the radiation constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationOfState {
    pub gamma: f64,
    pub c_v: f64,
    pub a: f64,
}

impl EquationOfState {
    pub fn new(gamma: f64, c_v: f64, a: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must exceed 1"
            )));
        }
        if !(c_v > 0.0 && c_v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "c_v = {c_v} must be positive"
            )));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a = {a} must be positive")));
        }
        Ok(Self { gamma, c_v, a })
    }

    pub fn electron_temperature(&self, rho: f64, e_e: f64) -> f64 {
        e_e / (rho * self.c_v)
    }

    pub fn radiation_temperature(&self, e_r: f64) -> f64 {
        (e_r / self.a).powf(0.25)
    }

    /// `E_r = a T^4`.
    pub fn radiation_energy(&self, t_r: f64) -> f64 {
        self.a * t_r.powi(4)
    }

    /// Entropy density `Sigma_nu(rho, E_nu)`.
    pub fn entropy_density(&self, species: Species, rho: f64, e: f64) -> f64 {
        match species {
            Species::Electron => rho * self.c_v * (e * rho.powf(-self.gamma)).ln(),
            Species::Radiation => 4.0 / 3.0 * self.a.powf(0.25) * e.powf(0.75),
        }
    }

    /// Partial derivatives `(ds/drho, ds/dE)` of the specific entropy `s = Sigma / rho`.
    pub fn specific_entropy_partials(&self, species: Species, rho: f64, e: f64) -> (f64, f64) {
        match species {
            Species::Electron => (-self.gamma * self.c_v / rho, self.c_v / e),
            Species::Radiation => {
                let s = self.entropy_density(Species::Radiation, rho, e) / rho;
                (-s / rho, self.a.powf(0.25) * e.powf(-0.25) / rho)
            }
        }
    }

    /// Pressure from the first law, `p = -E - rho (ds/drho) / (ds/dE)`.
    pub fn pressure(&self, species: Species, rho: f64, e: f64) -> f64 {
        let (ds_drho, ds_de) = self.specific_entropy_partials(species, rho, e);
        -e - rho * ds_drho / ds_de
    }

    /// Specific internal energy `U_nu(rho, s)` as a function of specific entropy.
    pub fn specific_internal_energy(&self, species: Species, rho: f64, s: f64) -> f64 {
        match species {
            Species::Electron => rho.powf(self.gamma - 1.0) * (s / self.c_v).exp(),
            Species::Radiation => (3.0 * rho * s / (4.0 * self.a.powf(0.25))).powf(4.0 / 3.0) / rho,
        }
    }

    /// Squared adiabatic sound speed `(gamma p_e + (4/3) p_r) / rho`.
    pub fn sound_speed_squared(&self, rho: f64, e_e: f64, e_r: f64) -> f64 {
        (self.gamma * self.pressure(Species::Electron, rho, e_e)
            + 4.0 / 3.0 * self.pressure(Species::Radiation, rho, e_r))
            / rho
    }
}

/// `(T_e, T_r)` at every cell.
pub fn temperatures(
    state: &TwoTempState,
    eos: &EquationOfState,
) -> Result<(ScalarField, ScalarField)> {
    state.validate()?;
    let g = state.grid();
    let rho = state.rho.values();
    let te = state
        .e_e
        .values()
        .iter()
        .zip(rho)
        .map(|(e, r)| eos.electron_temperature(*r, *e))
        .collect();
    let tr = state
        .e_r
        .values()
        .iter()
        .map(|e| eos.radiation_temperature(*e))
        .collect();
    Ok((
        ScalarField::from_values(g, te)?,
        ScalarField::from_values(g, tr)?,
    ))
}

/// `(p_e, p_r)` at every cell.
pub fn pressures(
    state: &TwoTempState,
    eos: &EquationOfState,
) -> Result<(ScalarField, ScalarField)> {
    state.validate()?;
    let g = state.grid();
    let rho = state.rho.values();
    let pe = state
        .e_e
        .values()
        .iter()
        .zip(rho)
        .map(|(e, r)| eos.pressure(Species::Electron, *r, *e))
        .collect();
    let pr = state
        .e_r
        .values()
        .iter()
        .zip(rho)
        .map(|(e, r)| eos.pressure(Species::Radiation, *r, *e))
        .collect();
    Ok((
        ScalarField::from_values(g, pe)?,
        ScalarField::from_values(g, pr)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eos() -> EquationOfState {
        EquationOfState::new(5.0 / 3.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn temperature_examples() {
        let e = eos();
        assert_eq!(e.radiation_temperature(16.0), 2.0);
        assert_eq!(e.electron_temperature(2.0, 4.0), 2.0);
        let mut last = e.radiation_temperature(1.0);
        for k in 1..40 {
            let t = e.radiation_temperature(0.5f64.powi(k));
            assert!(t < last && t > 0.0);
            last = t;
        }
    }

    #[test]
    fn pressure_examples() {
        let e = eos();
        assert!((e.pressure(Species::Electron, 0.7, 3.0) - 2.0).abs() < 1e-14);
        assert!((e.pressure(Species::Radiation, 1.3, 3.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn internal_energy_inverts_entropy() {
        let e = eos();
        for sp in [Species::Electron, Species::Radiation] {
            let (rho, en) = (1.7, 2.3);
            let s = e.entropy_density(sp, rho, en) / rho;
            let u = e.specific_internal_energy(sp, rho, s);
            assert!((u * rho - en).abs() < 1e-12, "{sp:?}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(EquationOfState::new(1.0, 1.0, 1.0).is_err());
        assert!(EquationOfState::new(1.4, 0.0, 1.0).is_err());
        assert!(EquationOfState::new(1.4, 1.0, -1.0).is_err());
    }
}
