//! Right-hand sides and time stepping of the degree-one and degree-two closures.
//!
//! `dM^0/dt = -div M^1` is discretized with upwind fluxes on cell faces, where
//! the face kernel uses the face-normal difference of `phi` and the average
//! of the cell-centered tangential gradients. The `P_0` equation is
//! `dP_0/dt = -(P_0 . grad) z - P_0 div z - (z . grad) P_0`, with the last
//! term upwinded and the first two taken by central differences.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{norm, Vector, MAX_DIM};
use crate::hamiltonian::mat_vec;
use crate::kinetics::CFL_MAX;
use crate::numerics::{pairwise_sum, rk_step, Scheme};

use super::hj::{dissipation, hj_rhs, one_sided};
use super::state::{gradient_floor, neg, ClosureFields, ClosureState};

/// Time derivatives of a closure state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureRates {
    pub dm0: ScalarField,
    pub dp0: Option<VectorField>,
    pub dphi: ScalarField,
}

/// Gradient of the total potential on the face between `cell` and its
/// periodic neighbor along `d`.
fn face_gradient(state: &ClosureState, centered: &VectorField, cell: usize, d: usize) -> Vector {
    let g = state.grid();
    let phi = state.fields.phi.values();
    let right = g.periodic_neighbor(cell, d, 1);
    let mut q = [0.0; MAX_DIM];
    for e in 0..g.dim() {
        q[e] = if e == d {
            (phi[right] - phi[cell]) / g.spacing(d) + state.phi_slope[d]
        } else {
            0.5 * (centered.get(cell)[e] + centered.get(right)[e])
        };
    }
    q
}

fn mass_rate(state: &ClosureState, centered: &VectorField) -> Result<ScalarField> {
    let g = state.grid();
    let n = g.dim();
    let h = &state.hamiltonian;
    let m0 = state.fields.m0.values();
    let floor = gradient_floor(g);
    let mut dm0 = ScalarField::zeros(g);
    for d in 0..n {
        // flux[i] lives on the right face of cell i
        let mut flux = vec![0.0; g.len()];
        for (cell, f) in flux.iter_mut().enumerate() {
            let q = face_gradient(state, centered, cell, d);
            if h.is_radiation() && !(norm(&q) >= floor) {
                return Err(Error::DegenerateGradient {
                    cell,
                    norm: norm(&q),
                    floor,
                });
            }
            let p = neg(&q);
            let z = h.velocity(&p)[d];
            let up = if z >= 0.0 {
                cell
            } else {
                g.periodic_neighbor(cell, d, 1)
            };
            *f = match &state.fields.p0 {
                None => m0[up] * z,
                Some(p0) => m0[up] * z + mat_vec(&h.hessian(&p, n), &p0.get(up))[d],
            };
        }
        let hd = g.spacing(d);
        for (cell, out) in dm0.values_mut().iter_mut().enumerate() {
            let left = g.periodic_neighbor(cell, d, -1);
            *out -= (flux[cell] - flux[left]) / hd;
        }
    }
    Ok(dm0)
}

fn p0_rate(state: &ClosureState, p0: &VectorField, centered: &VectorField) -> Result<VectorField> {
    let g = state.grid();
    let n = g.dim();
    let h = &state.hamiltonian;
    let z: Vec<Vector> = centered
        .values()
        .iter()
        .map(|q| h.velocity(&neg(q)))
        .collect();
    let mut out = VectorField::zeros(g);
    for cell in 0..g.len() {
        // dz[j][i] = d z_i / d x_j
        let mut dz = [[0.0; MAX_DIM]; MAX_DIM];
        for (j, row) in dz.iter_mut().enumerate().take(n) {
            let up = z[g.periodic_neighbor(cell, j, 1)];
            let dn = z[g.periodic_neighbor(cell, j, -1)];
            for i in 0..n {
                row[i] = (up[i] - dn[i]) / (2.0 * g.spacing(j));
            }
        }
        let div_z: f64 = (0..n).map(|i| dz[i][i]).sum();
        let p = p0.get(cell);
        let zc = z[cell];
        let mut rate = [0.0; MAX_DIM];
        for j in 0..n {
            let stretch: f64 = (0..n).map(|i| p[i] * dz[j][i]).sum();
            let mut advect = 0.0;
            for i in 0..n {
                let hi = g.spacing(i);
                let grad = if zc[i] >= 0.0 {
                    (p[j] - p0.get(g.periodic_neighbor(cell, i, -1))[j]) / hi
                } else {
                    (p0.get(g.periodic_neighbor(cell, i, 1))[j] - p[j]) / hi
                };
                advect += zc[i] * grad;
            }
            rate[j] = -stretch - p[j] * div_z - advect;
        }
        out.set(cell, rate);
    }
    Ok(out)
}

fn rates(state: &ClosureState) -> Result<ClosureFields> {
    let centered = state.grad_phi();
    state.check_gradient(&centered)?;
    let dm0 = mass_rate(state, &centered)?;
    let dp0 = match &state.fields.p0 {
        Some(p0) => Some(p0_rate(state, p0, &centered)?),
        None => None,
    };
    let dphi = hj_rhs(&state.fields.phi, &state.phi_slope, &state.hamiltonian)?;
    Ok(ClosureFields {
        m0: dm0,
        p0: dp0,
        phi: dphi,
    })
}

/// `(dM^0/dt, dphi/dt)` of the degree-one closure.
pub fn closure0_rhs(state: &ClosureState) -> Result<(ScalarField, ScalarField)> {
    if state.degree() != 0 {
        return Err(Error::InvalidParameter(
            "closure0_rhs needs a state without P0".into(),
        ));
    }
    let r = rates(state)?;
    Ok((r.m0, r.phi))
}

/// `(dM^0/dt, dP_0/dt, dphi/dt)` of the degree-two closure.
pub fn closure1_rhs(state: &ClosureState) -> Result<(ScalarField, VectorField, ScalarField)> {
    if state.degree() != 1 {
        return Err(Error::InvalidParameter(
            "closure1_rhs needs a state with P0".into(),
        ));
    }
    let r = rates(state)?;
    Ok((r.m0, r.p0.expect("degree one state"), r.phi))
}

impl ClosureState {
    /// Time derivatives for either degree.
    pub fn rates(&self) -> Result<ClosureRates> {
        let r = rates(self)?;
        Ok(ClosureRates {
            dm0: r.m0,
            dp0: r.p0,
            dphi: r.phi,
        })
    }
}

/// Largest stable step: inverse of the summed directional wave speeds.
pub fn max_closure_dt(state: &ClosureState) -> f64 {
    let g = state.grid();
    let n = g.dim();
    let h = &state.hamiltonian;
    let centered = state.grad_phi();
    let mut rate: f64 = 0.0;
    for cell in 0..g.len() {
        let z = h.velocity(&neg(&centered.get(cell)));
        let (qm, qp) = one_sided(&state.fields.phi, &state.phi_slope, cell);
        let alpha = dissipation(h, n, &qm, &qp);
        let r: f64 = (0..n)
            .map(|d| z[d].abs().max(alpha[d]) / g.spacing(d))
            .sum();
        rate = rate.max(r);
    }
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// Advances a closure state by `dt`.
pub fn step_closure(state: &ClosureState, dt: f64, scheme: Scheme) -> Result<ClosureState> {
    let limit = CFL_MAX * max_closure_dt(state);
    if !(dt.abs() <= limit) {
        return Err(Error::CflViolation {
            dt: dt.abs(),
            limit,
        });
    }
    let fields = rk_step(&state.fields, dt, scheme, |f| {
        rates(&state.with_fields(f.clone()))
    })?;
    Ok(state.with_fields(fields))
}

/// Collective Hamiltonian `int (H(x, -grad phi) M^0 + P_0 . z) dx`.
pub fn collective_hamiltonian(state: &ClosureState) -> f64 {
    let g = state.grid();
    let h = &state.hamiltonian;
    let grad = state.grad_phi();
    let terms: Vec<f64> = (0..g.len())
        .map(|cell| {
            let p = neg(&grad.get(cell));
            let mut e = h.energy(&g.center(cell), &p) * state.fields.m0.values()[cell];
            if let Some(p0) = &state.fields.p0 {
                let z = h.velocity(&p);
                let q = p0.get(cell);
                e += q[0] * z[0] + q[1] * z[1];
            }
            e
        })
        .collect();
    pairwise_sum(&terms) * g.cell_volume()
}
