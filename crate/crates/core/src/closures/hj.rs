//! Local Lax-Friedrichs discretization of `d phi/dt = H(x, -grad phi)`.

use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::{Vector, MAX_DIM};
use crate::hamiltonian::SeparableHamiltonian;

use super::state::{check_floor, grad_with_slope, gradient_floor};

/// One-sided differences `(q^-, q^+)` of the total potential at `cell`.
pub(crate) fn one_sided(phi: &ScalarField, slope: &Vector, cell: usize) -> (Vector, Vector) {
    let g = phi.grid();
    let v = phi.values();
    let mut qm = [0.0; MAX_DIM];
    let mut qp = [0.0; MAX_DIM];
    for d in 0..g.dim() {
        let h = g.spacing(d);
        qm[d] = (v[cell] - v[g.periodic_neighbor(cell, d, -1)]) / h + slope[d];
        qp[d] = (v[g.periodic_neighbor(cell, d, 1)] - v[cell]) / h + slope[d];
    }
    (qm, qp)
}

/// Bound on `|dH/dp_d|` over the box spanned by `-q^-` and `-q^+`.
pub(crate) fn dissipation(
    h: &SeparableHamiltonian,
    dim: usize,
    qm: &Vector,
    qp: &Vector,
) -> Vector {
    let mut alpha = [0.0; MAX_DIM];
    match h {
        SeparableHamiltonian::NonRelativistic { mass, .. } => {
            for d in 0..dim {
                alpha[d] = qm[d].abs().max(qp[d].abs()) / mass;
            }
        }
        SeparableHamiltonian::Radiation { c } => {
            for a in alpha.iter_mut().take(dim) {
                *a = *c;
            }
        }
        SeparableHamiltonian::Custom(_) => {
            // sample the kernel at the box corners and its center
            let mut probes = vec![[-(qm[0] + qp[0]) / 2.0, -(qm[1] + qp[1]) / 2.0]];
            for mask in 0..(1usize << dim) {
                let mut p = [0.0; MAX_DIM];
                for d in 0..dim {
                    p[d] = if mask >> d & 1 == 1 { -qp[d] } else { -qm[d] };
                }
                probes.push(p);
            }
            for p in probes {
                let z = h.velocity(&p);
                for d in 0..dim {
                    alpha[d] = alpha[d].max(z[d].abs());
                }
            }
        }
    }
    alpha
}

/// `H(x, -q_bar) + sum_d alpha_d (q^+_d - q^-_d) / 2` with `q_bar` the average
/// of the one-sided gradients of `phi + slope . x`.
///
/// Radiation potentials must keep `|grad phi|` above the gradient floor.
pub fn hj_rhs(phi: &ScalarField, slope: &Vector, h: &SeparableHamiltonian) -> Result<ScalarField> {
    let g = phi.grid();
    let n = g.dim();
    if h.is_radiation() {
        check_floor(&grad_with_slope(phi, slope), gradient_floor(g))?;
    }
    let mut out = ScalarField::zeros(g);
    for (cell, o) in out.values_mut().iter_mut().enumerate() {
        let (qm, qp) = one_sided(phi, slope, cell);
        let mut p = [0.0; MAX_DIM];
        for d in 0..n {
            p[d] = -0.5 * (qm[d] + qp[d]);
        }
        let alpha = dissipation(h, n, &qm, &qp);
        let mut v = h.energy(&g.center(cell), &p);
        for d in 0..n {
            v += 0.5 * alpha[d] * (qp[d] - qm[d]);
        }
        *o = v;
    }
    Ok(out)
}
