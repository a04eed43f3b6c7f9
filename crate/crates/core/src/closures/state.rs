//! Closure state, potential gradients and pointwise closure formulas.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{norm, UniformGrid, Vector, MAX_DIM};
use crate::hamiltonian::{mat_vec, SeparableHamiltonian};
use crate::numerics::LinearState;
use crate::tensor::{SymTensor, SymTensorField};

/// Gradient floor for the radiation kernel, relative to the domain length.
pub const GRADIENT_FLOOR_REL: f64 = 1e-8;

/// Absolute floor on `|grad phi|` used by radiation closures on `grid`.
pub fn gradient_floor(grid: &UniformGrid) -> f64 {
    GRADIENT_FLOOR_REL * grid.scale()
}

/// Time-dependent fields of a closure state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureFields {
    pub m0: ScalarField,
    pub p0: Option<VectorField>,
    pub phi: ScalarField,
}

impl LinearState for ClosureFields {
    fn axpy(&mut self, a: f64, other: &Self) {
        self.m0.axpy(a, &other.m0);
        if let (Some(p), Some(q)) = (self.p0.as_mut(), other.p0.as_ref()) {
            p.axpy(a, q);
        }
        self.phi.axpy(a, &other.phi);
    }
    fn scale(&mut self, a: f64) {
        self.m0.scale(a);
        if let Some(p) = self.p0.as_mut() {
            p.scale(a);
        }
        self.phi.scale(a);
    }
}

/// `(M^0, P_0, phi)` together with the Hamiltonian that drives it.
#[derive(Debug, Clone)]
pub struct ClosureState {
    pub hamiltonian: SeparableHamiltonian,
    pub fields: ClosureFields,
    /// Constant mean gradient of the potential.
    pub phi_slope: Vector,
}

impl ClosureState {
    /// Degree-one closure (truncation degree 0).
    pub fn degree0(
        h: SeparableHamiltonian,
        m0: ScalarField,
        phi: ScalarField,
        phi_slope: Vector,
    ) -> Result<Self> {
        m0.grid().ensure_same(phi.grid(), "closure fields")?;
        Self::build(h, ClosureFields { m0, p0: None, phi }, phi_slope)
    }

    /// Degree-two closure (truncation degree 1).
    pub fn degree1(
        h: SeparableHamiltonian,
        m0: ScalarField,
        p0: VectorField,
        phi: ScalarField,
        phi_slope: Vector,
    ) -> Result<Self> {
        m0.grid().ensure_same(phi.grid(), "closure fields")?;
        m0.grid().ensure_same(p0.grid(), "closure fields")?;
        Self::build(
            h,
            ClosureFields {
                m0,
                p0: Some(p0),
                phi,
            },
            phi_slope,
        )
    }

    fn build(h: SeparableHamiltonian, fields: ClosureFields, mut slope: Vector) -> Result<Self> {
        fields.m0.check_finite("M0")?;
        fields.phi.check_finite("phi")?;
        if let Some(p) = &fields.p0 {
            p.check_finite("P0")?;
        }
        for s in slope.iter_mut().skip(fields.m0.grid().dim()) {
            *s = 0.0;
        }
        if let Some(cell) = fields.m0.values().iter().position(|v| *v < 0.0) {
            log::warn!(
                "closure state has negative M0 at cell {cell}; the image is not a physical density"
            );
        }
        Ok(Self {
            hamiltonian: h,
            fields,
            phi_slope: slope,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        self.fields.m0.grid()
    }

    /// 0 for `(M^0, phi)`, 1 for `(M^0, P_0, phi)`.
    pub fn degree(&self) -> usize {
        usize::from(self.fields.p0.is_some())
    }

    pub fn with_fields(&self, fields: ClosureFields) -> Self {
        Self {
            hamiltonian: self.hamiltonian.clone(),
            fields,
            phi_slope: self.phi_slope,
        }
    }

    /// Total potential `phi + slope . x` at cell centers.
    pub fn phi_total(&self) -> ScalarField {
        let g = self.grid();
        let mut out = self.fields.phi.clone();
        for (i, v) in out.values_mut().iter_mut().enumerate() {
            let x = g.center(i);
            *v += self.phi_slope[0] * x[0] + self.phi_slope[1] * x[1];
        }
        out
    }

    /// Cell-centered `grad phi` (periodic central differences plus slope).
    pub fn grad_phi(&self) -> VectorField {
        grad_with_slope(&self.fields.phi, &self.phi_slope)
    }

    /// Rejects radiation states with `|grad phi|` below the floor anywhere.
    pub(crate) fn check_gradient(&self, grad: &VectorField) -> Result<()> {
        if !self.hamiltonian.is_radiation() {
            return Ok(());
        }
        check_floor(grad, gradient_floor(self.grid()))
    }
}

pub(crate) fn check_floor(grad: &VectorField, floor: f64) -> Result<()> {
    for (cell, g) in grad.values().iter().enumerate() {
        let r = norm(g);
        if !(r >= floor) {
            return Err(Error::DegenerateGradient {
                cell,
                norm: r,
                floor,
            });
        }
    }
    Ok(())
}

pub(crate) fn grad_with_slope(phi: &ScalarField, slope: &Vector) -> VectorField {
    let mut g = phi.gradient();
    let n = phi.grid().dim();
    for i in 0..phi.grid().len() {
        let mut v = g.get(i);
        for d in 0..n {
            v[d] += slope[d];
        }
        g.set(i, v);
    }
    g
}

pub(crate) fn neg(v: &Vector) -> Vector {
    [-v[0], -v[1]]
}

/// `M^1 = M^0 z + Hess H . P_0` at `p = -grad phi` (with `P_0 = 0` for degree one).
pub fn closure_m1(
    h: &SeparableHamiltonian,
    dim: usize,
    m0: f64,
    p0: &Vector,
    grad_phi: &Vector,
) -> Vector {
    let p = neg(grad_phi);
    let z = h.velocity(&p);
    let hp = mat_vec(&h.hessian(&p, dim), p0);
    let mut out = [0.0; MAX_DIM];
    for d in 0..dim {
        out[d] = m0 * z[d] + hp[d];
    }
    out
}

/// `M^2 = -M^0 z (x) z + M^1 (x) z + z (x) M^1` at `p = -grad phi`.
pub fn closure_m2(
    h: &SeparableHamiltonian,
    dim: usize,
    m0: f64,
    p0: &Vector,
    grad_phi: &Vector,
) -> SymTensor {
    let z = h.velocity(&neg(grad_phi));
    let m1 = closure_m1(h, dim, m0, p0, grad_phi);
    let mut out = SymTensor::vector(dim, &m1).sym_product(&z);
    out.axpy(-m0, &SymTensor::tensor_power(dim, &z, 2));
    out
}

/// Fluid specialization `M^1 = (P_0 - M^0 grad phi) / m`.
pub fn fluid_m1(mass: f64, m0: f64, p0: &Vector, grad_phi: &Vector) -> Vector {
    [
        (p0[0] - m0 * grad_phi[0]) / mass,
        (p0[1] - m0 * grad_phi[1]) / mass,
    ]
}

/// Fluid specialization
/// `M^2 = -(M^1 (x) grad phi + grad phi (x) M^1) / m - M^0 grad phi (x) grad phi / m^2`.
pub fn fluid_m2(dim: usize, mass: f64, m0: f64, p0: &Vector, grad_phi: &Vector) -> SymTensor {
    let m1 = fluid_m1(mass, m0, p0, grad_phi);
    let mut comps = Vec::new();
    let idx: Vec<[usize; 2]> = if dim == 1 {
        vec![[0, 0]]
    } else {
        vec![[0, 0], [0, 1], [1, 1]]
    };
    for [a, b] in idx {
        comps.push(
            -(m1[a] * grad_phi[b] + grad_phi[a] * m1[b]) / mass
                - m0 * grad_phi[a] * grad_phi[b] / (mass * mass),
        );
    }
    SymTensor::from_packed(dim, 2, comps).expect("component count")
}

/// Radiation specialization in terms of `grad phi`:
/// `M^1 = -c (M^0 grad phi/|grad phi| - P_0/|grad phi| + (P_0 . grad phi) grad phi/|grad phi|^3)`.
pub fn radiation_m1(c: f64, m0: f64, p0: &Vector, grad_phi: &Vector) -> Vector {
    let r = norm(grad_phi);
    let pg = p0[0] * grad_phi[0] + p0[1] * grad_phi[1];
    let r3 = r * r * r;
    let f = |d: usize| -c * (m0 * grad_phi[d] / r - p0[d] / r + pg * grad_phi[d] / r3);
    [f(0), f(1)]
}

/// Radiation specialization `M^2 = -c^2 M^0 n (x) n - c M^1 (x) n - c n (x) M^1`
/// with `n = grad phi / |grad phi|`.
pub fn radiation_m2(dim: usize, c: f64, m0: f64, p0: &Vector, grad_phi: &Vector) -> SymTensor {
    let r = norm(grad_phi);
    let n = [grad_phi[0] / r, grad_phi[1] / r];
    let m1 = radiation_m1(c, m0, p0, grad_phi);
    let idx: Vec<[usize; 2]> = if dim == 1 {
        vec![[0, 0]]
    } else {
        vec![[0, 0], [0, 1], [1, 1]]
    };
    let comps = idx
        .into_iter()
        .map(|[a, b]| -c * c * m0 * n[a] * n[b] - c * m1[a] * n[b] - c * n[a] * m1[b])
        .collect();
    SymTensor::from_packed(dim, 2, comps).expect("component count")
}

/// `M^1 = M^0 z(-grad phi)` for a degree-one closure state.
pub fn m1_from_state0(state: &ClosureState) -> Result<VectorField> {
    let grad = state.grad_phi();
    state.check_gradient(&grad)?;
    let dim = state.grid().dim();
    let mut out = VectorField::zeros(state.grid());
    let zero = [0.0; MAX_DIM];
    for i in 0..state.grid().len() {
        let m0 = state.fields.m0.values()[i];
        out.set(
            i,
            closure_m1(&state.hamiltonian, dim, m0, &zero, &grad.get(i)),
        );
    }
    Ok(out)
}

fn require_p0(state: &ClosureState) -> Result<&VectorField> {
    state
        .fields
        .p0
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("closure state has no P0 field".into()))
}

/// `M^1 = M^0 z + Hess H . P_0` for a degree-two closure state.
pub fn m1_from_state1(state: &ClosureState) -> Result<VectorField> {
    let p0 = require_p0(state)?;
    let grad = state.grad_phi();
    state.check_gradient(&grad)?;
    let dim = state.grid().dim();
    let mut out = VectorField::zeros(state.grid());
    for i in 0..state.grid().len() {
        let m0 = state.fields.m0.values()[i];
        out.set(
            i,
            closure_m1(&state.hamiltonian, dim, m0, &p0.get(i), &grad.get(i)),
        );
    }
    Ok(out)
}

/// Degree-two closure tensor `M^2` for a degree-two closure state.
pub fn m2_from_state1(state: &ClosureState) -> Result<SymTensorField> {
    let p0 = require_p0(state)?;
    let grad = state.grad_phi();
    state.check_gradient(&grad)?;
    let dim = state.grid().dim();
    SymTensorField::from_fn(state.grid(), 2, |i| {
        let m0 = state.fields.m0.values()[i];
        closure_m2(&state.hamiltonian, dim, m0, &p0.get(i), &grad.get(i))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Potential;

    #[test]
    fn radiation_degree_one_example() {
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let m1 = closure_m1(&h, 2, 2.0, &[0.0, 0.0], &[3.0, 4.0]);
        assert!((m1[0] + 1.2).abs() < 1e-15 && (m1[1] + 1.6).abs() < 1e-15);
    }

    #[test]
    fn fluid_degree_one_examples() {
        let h = SeparableHamiltonian::non_relativistic(2.0, Potential::Zero).unwrap();
        assert_eq!(
            closure_m1(&h, 2, 4.0, &[0.0, 0.0], &[1.0, 0.0]),
            [-2.0, 0.0]
        );
        assert_eq!(closure_m1(&h, 2, 4.0, &[0.0, 0.0], &[0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn degree_two_examples() {
        let h = SeparableHamiltonian::non_relativistic(1.0, Potential::Zero).unwrap();
        assert_eq!(
            closure_m1(&h, 2, 1.0, &[1.0, 0.0], &[0.0, 1.0]),
            [1.0, -1.0]
        );
        let r = SeparableHamiltonian::radiation(1.0).unwrap();
        let generic = closure_m1(&r, 2, 1.0, &[1.0, 0.0], &[0.0, 2.0]);
        let explicit = radiation_m1(1.0, 1.0, &[1.0, 0.0], &[0.0, 2.0]);
        assert_eq!(generic, [0.5, -1.0]);
        assert!(
            (generic[0] - explicit[0]).abs() < 1e-15 && (generic[1] - explicit[1]).abs() < 1e-15
        );
    }

    #[test]
    fn zero_p0_is_monokinetic() {
        let r = SeparableHamiltonian::radiation(1.0).unwrap();
        let g = [0.3, -0.7];
        let z = r.velocity(&neg(&g));
        let m2 = closure_m2(&r, 2, 1.5, &[0.0, 0.0], &g);
        let mono = SymTensor::tensor_power(2, &z, 2).scaled(1.5);
        for (a, b) in m2.packed().iter().zip(mono.packed()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
