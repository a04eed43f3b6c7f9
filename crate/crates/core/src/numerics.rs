//! Deterministic reductions and explicit Runge-Kutta drivers.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Below this length a block is summed left to right.
const PAIRWISE_BLOCK: usize = 32;

/// Sums `values` by recursive halving so the rounding pattern depends only on
/// the length of the slice, never on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n`.
pub fn pairwise_sum_by(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    let values: Vec<f64> = (0..n).map(f).collect();
    pairwise_sum(&values)
}

/// Explicit time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    /// Heun's method, the strong-stability-preserving second order scheme.
    #[default]
    Rk2,
    Rk4,
}

impl Scheme {
    pub fn order(self) -> usize {
        match self {
            Scheme::Euler => 1,
            Scheme::Rk2 => 2,
            Scheme::Rk4 => 4,
        }
    }
}

/// Minimal vector-space interface needed by [`rk_step`].
pub trait LinearState: Clone {
    /// `self += a * other`.
    fn axpy(&mut self, a: f64, other: &Self);
    /// `self *= a`.
    fn scale(&mut self, a: f64);
}

/// One explicit Runge-Kutta step of `du/dt = rhs(u)`.
pub fn rk_step<S, F>(u: &S, dt: f64, scheme: Scheme, mut rhs: F) -> Result<S>
where
    S: LinearState,
    F: FnMut(&S) -> Result<S>,
{
    match scheme {
        Scheme::Euler => {
            let k1 = rhs(u)?;
            let mut out = u.clone();
            out.axpy(dt, &k1);
            Ok(out)
        }
        Scheme::Rk2 => {
            let k1 = rhs(u)?;
            let mut u1 = u.clone();
            u1.axpy(dt, &k1);
            let k2 = rhs(&u1)?;
            // u + dt/2 (k1 + k2), written as the average of u and an Euler step from u1
            let mut out = u1;
            out.axpy(dt, &k2);
            out.axpy(1.0, u);
            out.scale(0.5);
            Ok(out)
        }
        Scheme::Rk4 => {
            let k1 = rhs(u)?;
            let mut tmp = u.clone();
            tmp.axpy(0.5 * dt, &k1);
            let k2 = rhs(&tmp)?;
            let mut tmp = u.clone();
            tmp.axpy(0.5 * dt, &k2);
            let k3 = rhs(&tmp)?;
            let mut tmp = u.clone();
            tmp.axpy(dt, &k3);
            let k4 = rhs(&tmp)?;
            let mut out = u.clone();
            out.axpy(dt / 6.0, &k1);
            out.axpy(dt / 3.0, &k2);
            out.axpy(dt / 3.0, &k3);
            out.axpy(dt / 6.0, &k4);
            Ok(out)
        }
    }
}

/// `alpha`-weighted componentwise update of two equal-length buffers.
pub(crate) fn axpy_slice(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn scale_slice(y: &mut [f64], a: f64) {
    for yi in y.iter_mut() {
        *yi *= a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone)]
    struct Scalar(f64);

    impl LinearState for Scalar {
        fn axpy(&mut self, a: f64, other: &Self) {
            self.0 += a * other.0;
        }
        fn scale(&mut self, a: f64) {
            self.0 *= a;
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn rk_orders_on_exponential_decay() {
        for scheme in [Scheme::Euler, Scheme::Rk2, Scheme::Rk4] {
            let err = |n: usize| {
                let dt = 1.0 / n as f64;
                let mut u = Scalar(1.0);
                for _ in 0..n {
                    u = rk_step(&u, dt, scheme, |s| Ok(Scalar(-s.0))).unwrap();
                }
                (u.0 - (-1.0f64).exp()).abs()
            };
            let order = (err(20) / err(40)).log2();
            assert!(
                (order - scheme.order() as f64).abs() < 0.2,
                "{scheme:?}: {order}"
            );
        }
    }
}
