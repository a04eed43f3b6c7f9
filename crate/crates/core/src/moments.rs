//! Hamiltonian-determined kinetic moments `M^k = int z^k g dp` with kernel
//! `z = grad_p H`, weighted moments, and their evolution equations.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{DistributionField, ScalarField, VectorField};
use crate::grid::{PhaseGrid, Vector};
use crate::hamiltonian::{mat_vec, SeparableHamiltonian};
use crate::kinetics::step_transport;
use crate::numerics::{pairwise_sum, Scheme};
use crate::tensor::{n_components, SymTensor, SymTensorField, MAX_DEGREE};

/// Phase-space weight `G(x, p)` for weighted moments.
#[derive(Clone)]
pub enum Weight {
    /// `G = 1`.
    Unit,
    /// `G = H`.
    Energy,
    /// Caller supplied weight; `commutes_with_h` asserts `[G, H] = 0`.
    Custom {
        f: Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>,
        commutes_with_h: bool,
    },
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Unit => write!(f, "Unit"),
            Weight::Energy => write!(f, "Energy"),
            Weight::Custom {
                commutes_with_h, ..
            } => {
                write!(f, "Custom(commutes_with_h = {commutes_with_h})")
            }
        }
    }
}

impl Weight {
    pub fn commutes_with_h(&self) -> bool {
        match self {
            Weight::Unit | Weight::Energy => true,
            Weight::Custom {
                commutes_with_h, ..
            } => *commutes_with_h,
        }
    }

    fn eval(&self, h: &SeparableHamiltonian, x: &Vector, p: &Vector) -> f64 {
        match self {
            Weight::Unit => 1.0,
            Weight::Energy => h.energy(x, p),
            Weight::Custom { f, .. } => f(x, p),
        }
    }
}

/// Truncated moment list `[M^0, ..., M^m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    tensors: Vec<SymTensorField>,
}

impl MomentSet {
    pub fn new(tensors: Vec<SymTensorField>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::InvalidParameter(
                "moment set needs at least M^0".into(),
            ));
        }
        for (k, t) in tensors.iter().enumerate() {
            if t.degree() != k {
                return Err(Error::InvalidParameter(format!(
                    "moment {k} has degree {}",
                    t.degree()
                )));
            }
            tensors[0].grid().ensure_same(t.grid(), "moment set grid")?;
        }
        Ok(Self { tensors })
    }

    /// Moments `0..=m` of `g`.
    pub fn of(g: &DistributionField, h: &SeparableHamiltonian, m: usize) -> Result<Self> {
        Self::new(
            (0..=m)
                .map(|k| kinetic_moment(g, h, k))
                .collect::<Result<_>>()?,
        )
    }

    pub fn degree(&self) -> usize {
        self.tensors.len() - 1
    }

    pub fn get(&self, k: usize) -> &SymTensorField {
        &self.tensors[k]
    }

    pub fn tensors(&self) -> &[SymTensorField] {
        &self.tensors
    }
}

fn fiber_moment(
    g: &DistributionField,
    h: &SeparableHamiltonian,
    k: usize,
    weight: impl Fn(&Vector, &Vector) -> f64,
) -> Result<SymTensorField> {
    if k > MAX_DEGREE {
        return Err(Error::DegreeTooHigh {
            degree: k,
            max: MAX_DEGREE,
        });
    }
    let grid = g.grid();
    if k > 0 {
        h.check_momentum_grid(grid)?;
    }
    let n = grid.dim();
    let ps = grid.momentum().centers();
    let kernels: Vec<SymTensor> = ps
        .iter()
        .map(|p| SymTensor::tensor_power(n, &h.velocity(p), k))
        .collect();
    let dp = grid.momentum().cell_volume();
    let ncomp = n_components(n, k);
    let xs = grid.space().centers();
    let mut terms = vec![0.0; ps.len()];
    SymTensorField::from_fn(grid.space(), k, |s| {
        let fiber = g.fiber(s);
        let comps = (0..ncomp)
            .map(|r| {
                for (q, t) in terms.iter_mut().enumerate() {
                    *t = kernels[q].packed()[r] * (fiber[q] * weight(&xs[s], &ps[q]));
                }
                pairwise_sum(&terms) * dp
            })
            .collect();
        SymTensor::from_packed(n, k, comps).expect("component count")
    })
}

/// `M^k[g](x) = int z^{(x)k} g dp`, by midpoint quadrature on each fiber.
pub fn kinetic_moment(
    g: &DistributionField,
    h: &SeparableHamiltonian,
    k: usize,
) -> Result<SymTensorField> {
    fiber_moment(g, h, k, |_, _| 1.0)
}

/// `G^k[g](x) = int z^{(x)k} g G dp`.
pub fn weighted_moment(
    g: &DistributionField,
    h: &SeparableHamiltonian,
    w: &Weight,
    k: usize,
) -> Result<SymTensorField> {
    fiber_moment(g, h, k, |x, p| w.eval(h, x, p))
}

/// Right-hand side pieces of `d/dt G^k + div G^{k+1} = source`.
///
/// Returns `(div G^{k+1}, source)` with the divergence taken by periodic
/// central differences on the first index and
/// `source = -int g G <z^{(x)(k-1)} (.) (Hess H . grad U)> dp` (zero for `k = 0`).
pub fn moment_evolution_rhs(
    g: &DistributionField,
    h: &SeparableHamiltonian,
    w: &Weight,
    k: usize,
) -> Result<(SymTensorField, SymTensorField)> {
    if !w.commutes_with_h() {
        return Err(Error::NonCommutingWeight);
    }
    let flux = weighted_moment(g, h, w, k + 1)?.divergence()?;
    let grid = g.grid();
    let mut source = SymTensorField::zeros(grid.space(), k)?;
    if k == 0 || h.is_force_free() {
        return Ok((flux, source));
    }
    let n = grid.dim();
    let ps = grid.momentum().centers();
    let xs = grid.space().centers();
    let dp = grid.momentum().cell_volume();
    let ncomp = n_components(n, k);
    let mut terms = vec![0.0; ps.len()];
    for (s, x) in xs.iter().enumerate() {
        let grad_u = h.force_gradient(x);
        let fiber = g.fiber(s);
        let integrands: Vec<SymTensor> = ps
            .iter()
            .map(|p| {
                let drift = mat_vec(&h.hessian(p, n), &grad_u);
                SymTensor::tensor_power(n, &h.velocity(p), k - 1).sym_product(&drift)
            })
            .collect();
        let comps = (0..ncomp)
            .map(|r| {
                for (q, t) in terms.iter_mut().enumerate() {
                    *t = integrands[q].packed()[r] * (fiber[q] * w.eval(h, x, &ps[q]));
                }
                -pairwise_sum(&terms) * dp
            })
            .collect();
        source.set_tensor(s, &SymTensor::from_packed(n, k, comps)?);
    }
    Ok((flux, source))
}

/// L1 norm of the discrete moment-equation residual across one transport step.
///
/// The time derivative `(M^k(t + dt) - M^k(t)) / dt` is compared against the
/// trapezoidal average of `-div M^{k+1} + source` at both ends of the step.
pub fn verify_moment_consistency(
    g: &DistributionField,
    h: &SeparableHamiltonian,
    k: usize,
    dt: f64,
    scheme: Scheme,
) -> Result<f64> {
    let w = Weight::Unit;
    let g1 = step_transport(g, h, dt, scheme)?;
    let m0 = kinetic_moment(g, h, k)?;
    let m1 = kinetic_moment(&g1, h, k)?;
    let (div0, src0) = moment_evolution_rhs(g, h, &w, k)?;
    let (div1, src1) = moment_evolution_rhs(&g1, h, &w, k)?;
    let mut rhs = src0;
    rhs.axpy(1.0, &src1)?;
    rhs.axpy(-1.0, &div0)?;
    rhs.axpy(-1.0, &div1)?;
    let mut r = m1.difference(&m0)?;
    r.scale(1.0 / dt);
    r.axpy(-0.5, &rhs)?;
    Ok(r.l1_norm())
}

/// Momentum cell containing `p`, or `None` outside the truncated grid.
pub fn momentum_cell(grid: &PhaseGrid, p: &Vector) -> Option<usize> {
    let mg = grid.momentum();
    let mut idx = [0; crate::grid::MAX_DIM];
    for (d, a) in mg.axes().iter().enumerate() {
        let t = ((p[d] - a.lo) / a.spacing()).floor();
        if !(t >= 0.0 && t < a.cells as f64) {
            return None;
        }
        idx[d] = t as usize;
    }
    Some(mg.flat_index(idx))
}

/// Monokinetic distribution `g = w(x) delta(p - p0(x))` with the grid delta
/// taken as the indicator of the containing momentum cell divided by its volume.
pub fn grid_delta(
    grid: &PhaseGrid,
    weight: &ScalarField,
    p0: &VectorField,
) -> Result<DistributionField> {
    grid.space()
        .ensure_same(weight.grid(), "delta weight grid")?;
    grid.space().ensure_same(p0.grid(), "delta momentum grid")?;
    let dp = grid.momentum().cell_volume();
    let mut g = DistributionField::zeros(grid);
    for s in 0..grid.space().len() {
        let p = p0.get(s);
        let q = momentum_cell(grid, &p).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "delta momentum {p:?} at cell {s} is outside the grid"
            ))
        })?;
        let i = grid.index(s, q);
        g.values_mut()[i] = weight.values()[s] / dp;
    }
    Ok(g)
}

/// Monokinetic distribution whose grid delta is split multilinearly between
/// the momentum cell centers surrounding `p0`, so that the discrete zeroth
/// and first momentum moments of the delta are exact.
pub fn grid_delta_linear(
    grid: &PhaseGrid,
    weight: &ScalarField,
    p0: &VectorField,
) -> Result<DistributionField> {
    grid.space()
        .ensure_same(weight.grid(), "delta weight grid")?;
    grid.space().ensure_same(p0.grid(), "delta momentum grid")?;
    let mg = grid.momentum();
    let n = mg.dim();
    let dp = mg.cell_volume();
    let mut g = DistributionField::zeros(grid);
    for s in 0..grid.space().len() {
        let p = p0.get(s);
        // lower corner index and fractional offset per axis
        let mut base = [0usize; crate::grid::MAX_DIM];
        let mut frac = [0.0; crate::grid::MAX_DIM];
        for (d, a) in mg.axes().iter().enumerate() {
            let t = (p[d] - a.lo) / a.spacing() - 0.5;
            if !(t >= 0.0 && t <= (a.cells - 1) as f64) {
                return Err(Error::InvalidParameter(format!(
                    "delta momentum {p:?} at cell {s} is outside the span of momentum cell centers"
                )));
            }
            let i = (t.floor() as usize).min(a.cells - 2);
            base[d] = i;
            frac[d] = t - i as f64;
        }
        for corner in 0..(1usize << n) {
            let mut idx = base;
            let mut w = 1.0;
            for d in 0..n {
                if corner >> d & 1 == 1 {
                    idx[d] += 1;
                    w *= frac[d];
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            if w != 0.0 {
                let i = grid.index(s, mg.flat_index(idx));
                g.values_mut()[i] += w * weight.values()[s] / dp;
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, UniformGrid};
    use crate::hamiltonian::Potential;

    fn grid_1d() -> PhaseGrid {
        PhaseGrid::new(
            UniformGrid::line(8, 0.0, 1.0).unwrap(),
            UniformGrid::line(8, -2.0, 2.0).unwrap(),
        )
        .unwrap()
    }

    fn grid_2d() -> PhaseGrid {
        let sq = |n, a, b| {
            UniformGrid::new(vec![
                Axis::new(n, a, b).unwrap(),
                Axis::new(n, a, b).unwrap(),
            ])
            .unwrap()
        };
        PhaseGrid::new(sq(4, 0.0, 1.0), sq(8, -2.0, 2.0)).unwrap()
    }

    #[test]
    fn linear_delta_has_exact_first_moment() {
        let grid = grid_2d();
        let w = ScalarField::from_fn(grid.space(), |x| 1.0 + x[0]);
        let p0 = VectorField::from_fn(grid.space(), |x| [0.3 * x[1] - 0.1, 1.2 * x[0] - 0.7]);
        let h = SeparableHamiltonian::non_relativistic(1.0, Potential::Zero).unwrap();
        let g = grid_delta_linear(&grid, &w, &p0).unwrap();
        let m0 = kinetic_moment(&g, &h, 0).unwrap();
        let m1 = kinetic_moment(&g, &h, 1).unwrap();
        for s in 0..grid.space().len() {
            assert!((m0.packed(s, 0) - w.values()[s]).abs() < 1e-12);
            for d in 0..2 {
                assert!((m1.packed(s, d) - w.values()[s] * p0.get(s)[d]).abs() < 1e-12);
            }
        }
        let outside = VectorField::constant(grid.space(), [1.9, 0.0]);
        assert!(grid_delta_linear(&grid, &w, &outside).is_err());
    }

    #[test]
    fn even_data_has_zero_first_moment() {
        let grid = grid_1d();
        let g = DistributionField::from_fn(&grid, |x, p| (1.0 + x[0]) * (-p[0] * p[0]).exp());
        for h in [
            SeparableHamiltonian::radiation(1.0).unwrap(),
            SeparableHamiltonian::non_relativistic(2.0, Potential::Zero).unwrap(),
        ] {
            let m1 = kinetic_moment(&g, &h, 1).unwrap();
            assert!(m1.max_abs() < 1e-14);
        }
    }

    #[test]
    fn delta_sifts_the_kernel() {
        let grid = grid_2d();
        let w = ScalarField::constant(grid.space(), 3.0);
        let p0 = VectorField::constant(grid.space(), [0.75, -1.25]);
        let g = grid_delta(&grid, &w, &p0).unwrap();
        let nr = SeparableHamiltonian::non_relativistic(1.0, Potential::Zero).unwrap();
        let m1 = kinetic_moment(&g, &nr, 1).unwrap();
        assert!((m1.get(0, &[0]) - 2.25).abs() < 1e-14 && (m1.get(2, &[1]) + 3.75).abs() < 1e-14);
        let r = SeparableHamiltonian::radiation(1.0).unwrap();
        let m2 = kinetic_moment(&g, &r, 2).unwrap();
        let norm = 0.75f64.hypot(1.25);
        let o = [0.75 / norm, -1.25 / norm];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m2.get(1, &[i, j]) - 3.0 * o[i] * o[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unit_weight_is_bitwise_kinetic_moment() {
        let grid = grid_2d();
        let g = DistributionField::from_fn(&grid, |x, p| (x[0] + p[1]).sin().abs() + p[0] * p[0]);
        let h = SeparableHamiltonian::radiation(1.5).unwrap();
        for k in 0..=3 {
            assert_eq!(
                kinetic_moment(&g, &h, k).unwrap(),
                weighted_moment(&g, &h, &Weight::Unit, k).unwrap()
            );
        }
    }

    #[test]
    fn energy_weight_on_delta_gives_energy_flux() {
        let grid = grid_1d();
        let w = ScalarField::constant(grid.space(), 2.0);
        let p0 = VectorField::constant(grid.space(), [1.25, 0.0]);
        let g = grid_delta(&grid, &w, &p0).unwrap();
        let m = 2.0;
        let h = SeparableHamiltonian::non_relativistic(m, Potential::Zero).unwrap();
        let ge = weighted_moment(&g, &h, &Weight::Energy, 1).unwrap();
        let expect = (1.25 / m) * (1.25 * 1.25 / (2.0 * m)) * 2.0;
        assert!((ge.get(5, &[0]) - expect).abs() < 1e-14);
    }

    #[test]
    fn radiation_energy_density_integrates_to_total_energy() {
        let grid = grid_2d();
        let g = DistributionField::from_fn(&grid, |x, p| {
            1.0 + (x[0] * 3.0).cos() * (-p[0] * p[0] - p[1] * p[1]).exp()
        });
        let h = SeparableHamiltonian::radiation(2.0).unwrap();
        let e = weighted_moment(&g, &h, &Weight::Energy, 0)
            .unwrap()
            .to_scalar()
            .unwrap();
        let total = crate::kinetics::total_energy(&g, &h);
        assert!((e.integral() - total).abs() < 1e-13 * total.abs());
    }

    #[test]
    fn sources_follow_the_hamiltonian() {
        let grid = grid_1d();
        let g = DistributionField::from_fn(&grid, |x, p| {
            (2.0 + (6.0 * x[0]).sin()) * (-p[0] * p[0]).exp()
        });
        let r = SeparableHamiltonian::radiation(1.0).unwrap();
        for k in 0..=2 {
            let (_, s) = moment_evolution_rhs(&g, &r, &Weight::Unit, k).unwrap();
            assert_eq!(s.max_abs(), 0.0);
        }
        let flat = SeparableHamiltonian::non_relativistic(1.0, Potential::Zero).unwrap();
        for k in 0..=2 {
            let (_, s) = moment_evolution_rhs(&g, &flat, &Weight::Unit, k).unwrap();
            assert_eq!(s.max_abs(), 0.0);
        }
        let pot = Potential::Quadratic {
            coefficient: 1.0,
            center: [0.0, 0.0],
        };
        let m = 2.0;
        let h = SeparableHamiltonian::non_relativistic(m, pot.clone()).unwrap();
        let (_, s) = moment_evolution_rhs(&g, &h, &Weight::Unit, 1).unwrap();
        let m0 = kinetic_moment(&g, &h, 0).unwrap();
        for (c, x) in grid.space().centers().iter().enumerate() {
            let expect = -m0.get(c, &[]) * pot.gradient(x)[0] / m;
            assert!((s.get(c, &[0]) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn noncommuting_weight_is_rejected() {
        let grid = grid_1d();
        let g = DistributionField::zeros(&grid);
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let w = Weight::Custom {
            f: Arc::new(|x, _| x[0]),
            commutes_with_h: false,
        };
        assert!(matches!(
            moment_evolution_rhs(&g, &h, &w, 0),
            Err(Error::NonCommutingWeight)
        ));
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let grid = grid_1d();
        let g = DistributionField::zeros(&grid);
        let h = SeparableHamiltonian::non_relativistic(1.0, Potential::Zero).unwrap();
        assert_eq!(
            verify_moment_consistency(&g, &h, 1, 1e-3, Scheme::Rk2).unwrap(),
            0.0
        );
    }
}
