//! Two-temperature gray diffusion radiation hydrodynamics.
//!
//! The state is `(rho, P, E_e, E_r)` on a periodic grid. The dynamics split
//! into ideal advection, thermal fluxes (electron conduction and radiation
//! diffusion) and electron-radiation energy exchange, each conserving total
//! energy and, for the last two, producing entropy.

mod coefficients;
mod diagnostics;
mod eos;
mod rhs;
mod step;

pub use coefficients::{Coefficient, Opacity, TransportCoefficients};
pub use diagnostics::{
    diagnostics_2t, flux_entropy_production, interaction_entropy_production, interaction_weight,
    onsager_matrices, onsager_matrix, Diagnostics2T,
};
pub use eos::{pressures, temperatures, EquationOfState, Species};
pub use rhs::{
    advection_rhs, electron_flux, flux_rhs, interaction_rhs, interaction_source, max_advection_dt,
    max_diffusion_dt, radiation_flux, radiation_flux_from_temperature, VACUUM_FLOOR_REL,
};
pub use step::{advect, diffuse, interact, step_2t, DiffusionMode, Splitting, StepOptions};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::UniformGrid;
use crate::numerics::LinearState;

/// Mass density, momentum density and the two internal energy densities.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTempState {
    pub rho: ScalarField,
    pub momentum: VectorField,
    pub e_e: ScalarField,
    pub e_r: ScalarField,
}

impl TwoTempState {
    pub fn new(
        rho: ScalarField,
        momentum: VectorField,
        e_e: ScalarField,
        e_r: ScalarField,
    ) -> Result<Self> {
        let s = Self {
            rho,
            momentum,
            e_e,
            e_r,
        };
        let g = s.rho.grid();
        g.ensure_same(s.momentum.grid(), "momentum")?;
        g.ensure_same(s.e_e.grid(), "electron energy")?;
        g.ensure_same(s.e_r.grid(), "radiation energy")?;
        s.validate()?;
        Ok(s)
    }

    pub fn grid(&self) -> &UniformGrid {
        self.rho.grid()
    }

    /// Checks `rho, E_e, E_r > 0` and finiteness, reporting the first bad cell.
    pub fn validate(&self) -> Result<()> {
        self.momentum.check_finite("momentum")?;
        for (quantity, f) in [
            ("density", &self.rho),
            ("electron energy", &self.e_e),
            ("radiation energy", &self.e_r),
        ] {
            for (cell, v) in f.values().iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { quantity, cell });
                }
                if *v <= 0.0 {
                    return Err(Error::NonPositive {
                        quantity,
                        cell,
                        value: *v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Kinetic plus internal energy density at one cell.
    pub fn total_energy_density(&self, cell: usize) -> f64 {
        let p = self.momentum.get(cell);
        (p[0] * p[0] + p[1] * p[1]) / (2.0 * self.rho.values()[cell])
            + self.e_e.values()[cell]
            + self.e_r.values()[cell]
    }

    pub(crate) fn apply(&mut self, dt: f64, r: &TwoTempRates) {
        self.rho.axpy(dt, &r.rho);
        self.momentum.axpy(dt, &r.momentum);
        self.e_e.axpy(dt, &r.e_e);
        self.e_r.axpy(dt, &r.e_r);
    }
}

/// Time derivatives of the four fields.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTempRates {
    pub rho: ScalarField,
    pub momentum: VectorField,
    pub e_e: ScalarField,
    pub e_r: ScalarField,
}

impl TwoTempRates {
    pub fn zeros(grid: &UniformGrid) -> Self {
        Self {
            rho: ScalarField::zeros(grid),
            momentum: VectorField::zeros(grid),
            e_e: ScalarField::zeros(grid),
            e_r: ScalarField::zeros(grid),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.rho
            .max_abs()
            .max(self.momentum.max_abs())
            .max(self.e_e.max_abs())
            .max(self.e_r.max_abs())
    }
}

impl LinearState for TwoTempRates {
    fn axpy(&mut self, a: f64, other: &Self) {
        self.rho.axpy(a, &other.rho);
        self.momentum.axpy(a, &other.momentum);
        self.e_e.axpy(a, &other.e_e);
        self.e_r.axpy(a, &other.e_r);
    }
    fn scale(&mut self, a: f64) {
        self.rho.scale(a);
        self.momentum.scale(a);
        self.e_e.scale(a);
        self.e_r.scale(a);
    }
}
