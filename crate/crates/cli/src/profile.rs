//! Named scalar profiles used for initial conditions.

use std::f64::consts::TAU;

use kinclosure::{UniformGrid, Vector};

/// A scalar function on a box, evaluated at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Uniform {
        value: f64,
    },
    /// `mean + amplitude sin(2 pi sum_d k_d (x_d - lo_d) / L_d + phase)`.
    Sine {
        mean: f64,
        amplitude: f64,
        modes: Vector,
        phase: f64,
    },
    /// `background + amplitude exp(-|x - center|^2 / (2 width^2))`.
    Gaussian {
        background: f64,
        amplitude: f64,
        center: Vector,
        width: f64,
    },
    /// `left` below `position` along `axis`, `right` above.
    Step {
        left: f64,
        right: f64,
        position: f64,
        axis: usize,
    },
}

/// Box on which a profile is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub lo: Vector,
    pub length: Vector,
}

impl Domain {
    pub fn of(grid: &UniformGrid) -> Self {
        let mut lo = [0.0; 2];
        let mut length = [1.0; 2];
        for d in 0..grid.dim() {
            lo[d] = grid.axis(d).lo;
            length[d] = grid.axis(d).length();
        }
        Self {
            dim: grid.dim(),
            lo,
            length,
        }
    }

    /// Maps `x` back into the box along every axis.
    pub fn wrap(&self, x: &Vector) -> Vector {
        let mut out = *x;
        for d in 0..self.dim {
            out[d] = self.lo[d] + (x[d] - self.lo[d]).rem_euclid(self.length[d]);
        }
        out
    }
}

impl Profile {
    pub fn eval(&self, domain: &Domain, x: &Vector) -> f64 {
        match self {
            Profile::Uniform { value } => *value,
            Profile::Sine {
                mean,
                amplitude,
                modes,
                phase,
            } => {
                let arg: f64 = (0..domain.dim)
                    .map(|d| TAU * modes[d] * (x[d] - domain.lo[d]) / domain.length[d])
                    .sum();
                mean + amplitude * (arg + phase).sin()
            }
            Profile::Gaussian {
                background,
                amplitude,
                center,
                width,
            } => {
                let r2: f64 = (0..domain.dim).map(|d| (x[d] - center[d]).powi(2)).sum();
                background + amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Profile::Step {
                left,
                right,
                position,
                axis,
            } => {
                if x[*axis] < *position {
                    *left
                } else {
                    *right
                }
            }
        }
    }

    /// Derivative along `d`, zero across step discontinuities.
    pub fn derivative(&self, domain: &Domain, x: &Vector, d: usize) -> f64 {
        match self {
            Profile::Uniform { .. } | Profile::Step { .. } => 0.0,
            Profile::Sine {
                amplitude,
                modes,
                phase,
                ..
            } => {
                let arg: f64 = (0..domain.dim)
                    .map(|e| TAU * modes[e] * (x[e] - domain.lo[e]) / domain.length[e])
                    .sum();
                amplitude * TAU * modes[d] / domain.length[d] * (arg + phase).cos()
            }
            Profile::Gaussian {
                amplitude,
                center,
                width,
                ..
            } => {
                let r2: f64 = (0..domain.dim).map(|e| (x[e] - center[e]).powi(2)).sum();
                -amplitude * (x[d] - center[d]) / (width * width)
                    * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }

    /// Largest value of `|f'|` along `d`, sampled on a fine lattice.
    pub fn max_slope(&self, domain: &Domain, d: usize) -> f64 {
        const SAMPLES: usize = 4096;
        let mut best: f64 = 0.0;
        for i in 0..SAMPLES {
            let mut x = domain.lo;
            x[d] += domain.length[d] * (i as f64 + 0.5) / SAMPLES as f64;
            best = best.max(self.derivative(domain, &x, d).abs());
        }
        best
    }
}
