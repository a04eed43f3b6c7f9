//! Separable Hamiltonians `H(x, p) = K(p) + U(x)` and their derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{norm, PhaseGrid, Vector, MAX_DIM};

/// 2x2 symmetric matrix, zero padded in one dimension.
pub type Matrix = [[f64; MAX_DIM]; MAX_DIM];

/// Relative distance from the momentum origin below which the radiation
/// kernel is treated as singular.
pub const RADIATION_ORIGIN_TOL: f64 = 1e-12;

/// Scalar potential on configuration space.
#[derive(Clone)]
pub enum Potential {
    Zero,
    /// `V(x) = g . x`.
    Linear {
        gradient: Vector,
    },
    /// `V(x) = k |x - x0|^2`.
    Quadratic {
        coefficient: f64,
        center: Vector,
    },
    /// `V(x) = A cos(k . x)`.
    Cosine {
        amplitude: f64,
        wavevector: Vector,
    },
    /// User supplied `(V, grad V)` evaluator.
    Custom(Arc<dyn Fn(&Vector) -> (f64, Vector) + Send + Sync>),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Linear { gradient } => write!(f, "Linear({gradient:?})"),
            Potential::Quadratic {
                coefficient,
                center,
            } => {
                write!(f, "Quadratic({coefficient}, {center:?})")
            }
            Potential::Cosine {
                amplitude,
                wavevector,
            } => {
                write!(f, "Cosine({amplitude}, {wavevector:?})")
            }
            Potential::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Potential {
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Linear { gradient } => gradient[0] * x[0] + gradient[1] * x[1],
            Potential::Quadratic {
                coefficient,
                center,
            } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                coefficient * (d[0] * d[0] + d[1] * d[1])
            }
            Potential::Cosine {
                amplitude,
                wavevector,
            } => amplitude * (wavevector[0] * x[0] + wavevector[1] * x[1]).cos(),
            Potential::Custom(f) => f(x).0,
        }
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        match self {
            Potential::Zero => [0.0; MAX_DIM],
            Potential::Linear { gradient } => *gradient,
            Potential::Quadratic {
                coefficient,
                center,
            } => [
                2.0 * coefficient * (x[0] - center[0]),
                2.0 * coefficient * (x[1] - center[1]),
            ],
            Potential::Cosine {
                amplitude,
                wavevector,
            } => {
                let s = -amplitude * (wavevector[0] * x[0] + wavevector[1] * x[1]).sin();
                [s * wavevector[0], s * wavevector[1]]
            }
            Potential::Custom(f) => f(x).1,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }
}

/// Evaluators for a user supplied separable Hamiltonian.
pub trait CustomHamiltonian: Send + Sync {
    fn kinetic(&self, p: &Vector) -> f64;
    fn velocity(&self, p: &Vector) -> Vector;
    fn hessian(&self, p: &Vector) -> Matrix;
    fn potential(&self, x: &Vector) -> f64;
    fn potential_gradient(&self, x: &Vector) -> Vector;
}

/// Separable Hamiltonian with the two built-in physical kinds.
#[derive(Clone)]
pub enum SeparableHamiltonian {
    /// `|p|^2 / 2m + V(x)`.
    NonRelativistic {
        mass: f64,
        potential: Potential,
    },
    /// `c |p|`.
    Radiation {
        c: f64,
    },
    Custom(Arc<dyn CustomHamiltonian>),
}

impl fmt::Debug for SeparableHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeparableHamiltonian::NonRelativistic { mass, potential } => {
                write!(f, "NonRelativistic(m = {mass}, V = {potential:?})")
            }
            SeparableHamiltonian::Radiation { c } => write!(f, "Radiation(c = {c})"),
            SeparableHamiltonian::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl SeparableHamiltonian {
    pub fn non_relativistic(mass: f64, potential: Potential) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        Ok(SeparableHamiltonian::NonRelativistic { mass, potential })
    }

    pub fn radiation(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "light speed must be positive, got {c}"
            )));
        }
        Ok(SeparableHamiltonian::Radiation { c })
    }

    pub fn is_radiation(&self) -> bool {
        matches!(self, SeparableHamiltonian::Radiation { .. })
    }

    /// `H(x, p)`.
    pub fn energy(&self, x: &Vector, p: &Vector) -> f64 {
        self.kinetic(p) + self.potential(x)
    }

    pub fn kinetic(&self, p: &Vector) -> f64 {
        match self {
            SeparableHamiltonian::NonRelativistic { mass, .. } => {
                (p[0] * p[0] + p[1] * p[1]) / (2.0 * mass)
            }
            SeparableHamiltonian::Radiation { c } => c * norm(p),
            SeparableHamiltonian::Custom(h) => h.kinetic(p),
        }
    }

    pub fn potential(&self, x: &Vector) -> f64 {
        match self {
            SeparableHamiltonian::NonRelativistic { potential, .. } => potential.value(x),
            SeparableHamiltonian::Radiation { .. } => 0.0,
            SeparableHamiltonian::Custom(h) => h.potential(x),
        }
    }

    /// `grad_x U(x)`.
    pub fn force_gradient(&self, x: &Vector) -> Vector {
        match self {
            SeparableHamiltonian::NonRelativistic { potential, .. } => potential.gradient(x),
            SeparableHamiltonian::Radiation { .. } => [0.0; MAX_DIM],
            SeparableHamiltonian::Custom(h) => h.potential_gradient(x),
        }
    }

    /// Whether `grad_x U` vanishes identically.
    pub fn is_force_free(&self) -> bool {
        match self {
            SeparableHamiltonian::NonRelativistic { potential, .. } => potential.is_zero(),
            SeparableHamiltonian::Radiation { .. } => true,
            SeparableHamiltonian::Custom(_) => false,
        }
    }

    /// Moment kernel `z = grad_p H`. The radiation kernel is undefined at the
    /// origin; this returns the zero vector there and callers must guard.
    pub fn velocity(&self, p: &Vector) -> Vector {
        match self {
            SeparableHamiltonian::NonRelativistic { mass, .. } => [p[0] / mass, p[1] / mass],
            SeparableHamiltonian::Radiation { c } => {
                let r = norm(p);
                if r == 0.0 {
                    [0.0; MAX_DIM]
                } else {
                    [c * p[0] / r, c * p[1] / r]
                }
            }
            SeparableHamiltonian::Custom(h) => h.velocity(p),
        }
    }

    /// `grad_p grad_p H` restricted to the first `dim` components.
    pub fn hessian(&self, p: &Vector, dim: usize) -> Matrix {
        let mut h = match self {
            SeparableHamiltonian::NonRelativistic { mass, .. } => {
                let d = 1.0 / mass;
                [[d, 0.0], [0.0, d]]
            }
            SeparableHamiltonian::Radiation { c } => {
                let r = norm(p);
                if r == 0.0 {
                    [[0.0; MAX_DIM]; MAX_DIM]
                } else {
                    let s = c / r;
                    let o = [p[0] / r, p[1] / r];
                    let mut m = [[0.0; MAX_DIM]; MAX_DIM];
                    for (i, row) in m.iter_mut().enumerate().take(dim) {
                        for (j, e) in row.iter_mut().enumerate().take(dim) {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            *e = s * (delta - o[i] * o[j]);
                        }
                    }
                    m
                }
            }
            SeparableHamiltonian::Custom(h) => h.hessian(p),
        };
        for i in 0..MAX_DIM {
            for j in 0..MAX_DIM {
                if i >= dim || j >= dim {
                    h[i][j] = 0.0;
                }
            }
        }
        h
    }

    /// Whether every third and higher momentum derivative of `H` vanishes
    /// exactly, so delta-derivative expansions of any order are available.
    pub fn has_vanishing_third_derivatives(&self) -> bool {
        matches!(self, SeparableHamiltonian::NonRelativistic { .. })
    }

    /// Rejects radiation grids with a momentum cell center at the origin.
    pub fn check_momentum_grid(&self, grid: &PhaseGrid) -> Result<()> {
        if !self.is_radiation() {
            return Ok(());
        }
        let tol = RADIATION_ORIGIN_TOL * grid.p_extent();
        for (q, p) in grid.momentum().centers().iter().enumerate() {
            let r = norm(p);
            if r < tol {
                return Err(Error::SingularMomentum { cell: q, norm: r });
            }
        }
        Ok(())
    }
}

/// Matrix-vector product.
pub(crate) fn mat_vec(m: &Matrix, v: &Vector) -> Vector {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}
