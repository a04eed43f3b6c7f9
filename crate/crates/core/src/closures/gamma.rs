//! Kinetic moments of distributions in the image of the degree-`m` map
//! `Gamma_m(M^0, P^1, .., P^m, phi) = M^0 delta + sum_j ((-1)^j / j!) P^j : grad_p^j delta`,
//! with every delta centered at `p = -grad phi`.
//!
//! Integrating by parts moves the derivatives onto the kernel, so
//! `M^k = sum_j (1/j!) P^j : grad_p^j (z (x) .. (x) z)` at `p = -grad phi`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{UniformGrid, Vector};
use crate::hamiltonian::{Matrix, SeparableHamiltonian};
use crate::tensor::{n_components, SymTensor, SymTensorField, MAX_DEGREE};

use super::state::{check_floor, grad_with_slope, gradient_floor, neg, ClosureState};

/// Coefficients of a point in the degree-`m` auxiliary moment space.
#[derive(Debug, Clone)]
pub struct GammaImageSpec {
    pub m0: ScalarField,
    /// `coeffs[j - 1]` is the degree-`j` tensor `P^j`.
    pub coeffs: Vec<SymTensorField>,
    pub phi: ScalarField,
    pub phi_slope: Vector,
}

impl GammaImageSpec {
    pub fn new(
        m0: ScalarField,
        coeffs: Vec<SymTensorField>,
        phi: ScalarField,
        phi_slope: Vector,
    ) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE {
            return Err(Error::DegreeTooHigh {
                degree: coeffs.len(),
                max: MAX_DEGREE,
            });
        }
        m0.grid().ensure_same(phi.grid(), "phi")?;
        for (j, c) in coeffs.iter().enumerate() {
            m0.grid().ensure_same(c.grid(), "gamma coefficient")?;
            if c.degree() != j + 1 {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {} has degree {}, expected {}",
                    j + 1,
                    c.degree(),
                    j + 1
                )));
            }
        }
        Ok(Self {
            m0,
            coeffs,
            phi,
            phi_slope,
        })
    }

    /// Degree-`m` coefficients of a closure state (`m = 0` or `1`).
    pub fn from_state(state: &ClosureState) -> Result<Self> {
        let coeffs = match &state.fields.p0 {
            Some(p0) => vec![SymTensorField::from_vector(p0)],
            None => Vec::new(),
        };
        Self::new(
            state.fields.m0.clone(),
            coeffs,
            state.fields.phi.clone(),
            state.phi_slope,
        )
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn grid(&self) -> &UniformGrid {
        self.m0.grid()
    }

    /// True when `self` is `other` with one more coefficient appended.
    fn extends(&self, other: &Self) -> bool {
        self.degree() == other.degree() + 1
            && self.m0 == other.m0
            && self.phi == other.phi
            && self.phi_slope == other.phi_slope
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| a.data() == b.data())
    }
}

/// All index tuples of length `len` over `0..dim`, axis 0 varying slowest.
fn index_tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..dim).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// `d^|l| / dp_l (z_{i_1} .. z_{i_k})` for a kernel whose `z` has vanishing
/// second derivatives, by distributing each derivative over the factors.
fn kernel_derivative(z: &Vector, hess: &Matrix, ind: &[usize], l: &[usize]) -> f64 {
    let k = ind.len();
    let j = l.len();
    if k == 0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let mut total = 0.0;
    let n_assign = k.pow(j as u32);
    for code in 0..n_assign {
        // owner[t] = factor receiving derivative t
        let mut c = code;
        let mut owner = [0usize; MAX_DEGREE];
        for slot in owner.iter_mut().take(j) {
            *slot = c % k;
            c /= k;
        }
        let mut prod = 1.0;
        for (a, &i) in ind.iter().enumerate() {
            let hits: Vec<usize> = (0..j).filter(|&t| owner[t] == a).collect();
            prod *= match hits.len() {
                0 => z[i],
                1 => hess[i][l[hits[0]]],
                _ => 0.0,
            };
        }
        total += prod;
    }
    total
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Degree-`k` kinetic moment of `Gamma_m(spec)`.
pub fn gamma_moment(
    spec: &GammaImageSpec,
    h: &SeparableHamiltonian,
    k: usize,
) -> Result<SymTensorField> {
    if k > MAX_DEGREE {
        return Err(Error::DegreeTooHigh {
            degree: k,
            max: MAX_DEGREE,
        });
    }
    let m = spec.degree();
    if k >= 1 && m >= 2 && !h.has_vanishing_third_derivatives() {
        return Err(Error::MissingDerivatives(format!(
            "degree {m} image needs derivatives of H beyond the Hessian for moment {k}"
        )));
    }
    let g = spec.grid();
    let dim = g.dim();
    let grad = grad_with_slope(&spec.phi, &spec.phi_slope);
    if h.is_radiation() && k >= 1 {
        check_floor(&grad, gradient_floor(g))?;
    }
    let tuples: Vec<Vec<Vec<usize>>> = (0..=m).map(|j| index_tuples(dim, j)).collect();
    let reps: Vec<Vec<usize>> = (0..n_components(dim, k))
        .map(|r| (0..k).map(|a| usize::from(a >= k - r)).collect())
        .collect();
    SymTensorField::from_fn(g, k, |cell| {
        let p = neg(&grad.get(cell));
        let z = h.velocity(&p);
        let hess = h.hessian(&p, dim);
        let m0 = spec.m0.values()[cell];
        let comps = reps
            .iter()
            .map(|ind| {
                let mut total = m0 * kernel_derivative(&z, &hess, ind, &[]);
                for (j, coeff) in spec.coeffs.iter().enumerate() {
                    let order = j + 1;
                    let term: f64 = tuples[order]
                        .iter()
                        .map(|l| coeff.get(cell, l) * kernel_derivative(&z, &hess, ind, l))
                        .sum();
                    total += term / factorial(order);
                }
                total
            })
            .collect();
        SymTensor::from_packed(dim, k, comps).expect("component count")
    })
}

/// Largest per-cell change of the moment generating function
/// `sum_k (1/k!) s^k : M^k`, truncated at `k = 3`, between the images of
/// `spec_p1` and `spec_p`.
pub fn generating_function_gap(
    spec_p: &GammaImageSpec,
    spec_p1: &GammaImageSpec,
    s: &Vector,
    h: &SeparableHamiltonian,
) -> Result<f64> {
    if spec_p1.degree() > MAX_DEGREE {
        return Err(Error::DegreeTooHigh {
            degree: spec_p1.degree(),
            max: MAX_DEGREE,
        });
    }
    if !spec_p1.extends(spec_p) {
        return Err(Error::InvalidParameter(
            "second image spec must extend the first by one degree".into(),
        ));
    }
    let r = crate::grid::norm(s);
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("|s| = {r} outside (0, 1]")));
    }
    let g = spec_p.grid();
    let mut gap = vec![0.0; g.len()];
    for k in 0..=MAX_DEGREE {
        let a = gamma_moment(spec_p1, h, k)?;
        let b = gamma_moment(spec_p, h, k)?;
        let d = a.difference(&b)?;
        for (cell, v) in gap.iter_mut().enumerate() {
            *v += d.tensor_at(cell).contract_power(s) / factorial(k);
        }
    }
    Ok(gap.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
}
