//! Transport coefficients of the two-temperature model.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Vector;

/// A coefficient depending on the electron temperature.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// `k0 * T_e^exponent`.
    PowerLaw {
        k0: f64,
        exponent: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn eval(&self, t_e: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::PowerLaw { k0, exponent } => k0 * t_e.powf(*exponent),
            Coefficient::Custom(f) => f(t_e),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Constant(v) if *v == 0.0)
            || matches!(self, Coefficient::PowerLaw { k0, .. } if *k0 == 0.0)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(v) => write!(f, "Constant({v})"),
            Coefficient::PowerLaw { k0, exponent } => write!(f, "PowerLaw({k0} T^{exponent})"),
            Coefficient::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Planck mean opacity `sigma_P(x, E_e, E_r)`.
#[derive(Clone)]
pub enum Opacity {
    Constant(f64),
    Custom(Arc<dyn Fn(&Vector, f64, f64) -> f64 + Send + Sync>),
}

impl Opacity {
    pub fn eval(&self, x: &Vector, e_e: f64, e_r: f64) -> f64 {
        match self {
            Opacity::Constant(v) => *v,
            Opacity::Custom(f) => f(x, e_e, e_r),
        }
    }
}

impl fmt::Debug for Opacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Opacity::Constant(v) => write!(f, "Constant({v})"),
            Opacity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Electron conductivity `K_e(T_e)`, radiation diffusion `D(T_e)`, opacity
/// `sigma_P` and the speed of light `c`. The radiation constant lives on the
/// equation of state.
#[derive(Debug, Clone)]
pub struct TransportCoefficients {
    pub conductivity: Coefficient,
    pub diffusion: Coefficient,
    pub opacity: Opacity,
    pub c: f64,
}

impl TransportCoefficients {
    pub fn new(
        conductivity: Coefficient,
        diffusion: Coefficient,
        opacity: Opacity,
        c: f64,
    ) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
        }
        Ok(Self {
            conductivity,
            diffusion,
            opacity,
            c,
        })
    }

    /// No thermal flux and no interaction.
    pub fn zero(c: f64) -> Result<Self> {
        Self::new(
            Coefficient::Constant(0.0),
            Coefficient::Constant(0.0),
            Opacity::Constant(0.0),
            c,
        )
    }

    pub(crate) fn conductivity_at(&self, cell: usize, t_e: f64) -> Result<f64> {
        checked("conductivity", cell, self.conductivity.eval(t_e))
    }

    pub(crate) fn diffusion_at(&self, cell: usize, t_e: f64) -> Result<f64> {
        checked("radiation diffusion", cell, self.diffusion.eval(t_e))
    }

    pub(crate) fn opacity_at(&self, cell: usize, x: &Vector, e_e: f64, e_r: f64) -> Result<f64> {
        checked("opacity", cell, self.opacity.eval(x, e_e, e_r))
    }
}

fn checked(coefficient: &'static str, cell: usize, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NegativeCoefficient {
            coefficient,
            cell,
            value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_and_negative_rejection() {
        let k = Coefficient::PowerLaw {
            k0: 2.0,
            exponent: 2.5,
        };
        assert!((k.eval(4.0) - 64.0).abs() < 1e-12);
        let c = TransportCoefficients::new(
            Coefficient::Custom(Arc::new(|t| 1.0 - t)),
            Coefficient::Constant(1.0),
            Opacity::Constant(1.0),
            1.0,
        )
        .unwrap();
        assert!(c.conductivity_at(0, 0.5).is_ok());
        assert!(matches!(
            c.conductivity_at(3, 2.0),
            Err(Error::NegativeCoefficient { cell: 3, .. })
        ));
        assert!(TransportCoefficients::zero(0.0).is_err());
    }
}
