//! Elastic scattering and absorption for the radiation density `Psi`.
//!
//! Scattering only couples momentum cells on a common shell `|p'| = |p|`.
//! Within a shell the operator in intensity form is
//! `dI/dt = sum_{p'} alpha(p', p) I(p') w - a(p) I(p)` with
//! `a(p) = sum_{p'} alpha(p', p) w`. Because `H_r = c|p|` is common to the
//! whole shell, the same expression holds for `Psi = I / (c H_r)`.

use crate::error::{Error, Result};
use crate::field::{DistributionField, ScalarField};
use crate::grid::{norm, PhaseGrid};
use crate::hamiltonian::SeparableHamiltonian;
use crate::kinetics::step_transport;
use crate::numerics::{pairwise_sum, rk_step, Scheme};

/// Relative tolerance, in units of the momentum extent, for shell membership.
pub const SHELL_TOL: f64 = 1e-9;

/// Momentum cells sharing one norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub members: Vec<usize>,
    pub radius: f64,
}

/// Groups momentum cells into shells of equal `|p|`.
pub fn momentum_shells(grid: &PhaseGrid) -> Vec<Shell> {
    let tol = SHELL_TOL * grid.p_extent();
    let mut by_norm: Vec<(f64, usize)> = grid
        .momentum()
        .centers()
        .iter()
        .enumerate()
        .map(|(q, p)| (norm(p), q))
        .collect();
    by_norm.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut shells: Vec<Shell> = Vec::new();
    for (r, q) in by_norm {
        match shells.last_mut() {
            Some(last) if (r - last.radius).abs() <= tol => last.members.push(q),
            _ => shells.push(Shell {
                members: vec![q],
                radius: r,
            }),
        }
    }
    for s in &mut shells {
        s.members.sort_unstable();
    }
    shells
}

/// Symmetric nonnegative scattering coefficients per spatial cell and shell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringKernel {
    grid: PhaseGrid,
    shells: Vec<Shell>,
    /// Quadrature weight of every shell member.
    weight: f64,
    /// Row-major `m x m` blocks, indexed by `s * shells.len() + shell`.
    blocks: Vec<Vec<f64>>,
}

impl ScatteringKernel {
    /// Builds a kernel from `alpha(s, shell, i, j)` over shell member positions.
    pub fn from_fn(
        grid: &PhaseGrid,
        weight: f64,
        alpha: impl Fn(usize, &Shell, usize, usize) -> f64,
    ) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shell weight must be positive, got {weight}"
            )));
        }
        let shells = momentum_shells(grid);
        let degenerate = shells.iter().filter(|s| s.members.len() == 1).count();
        if degenerate > 0 {
            log::warn!(
                "{degenerate} momentum shells have a single member; scattering is inert there"
            );
        }
        let mut blocks = Vec::with_capacity(grid.space().len() * shells.len());
        for s in 0..grid.space().len() {
            for shell in &shells {
                let m = shell.members.len();
                let mut b = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..m {
                        b[i * m + j] = alpha(s, shell, i, j);
                    }
                }
                for i in 0..m {
                    for j in 0..m {
                        let v = b[i * m + j];
                        if !(v >= 0.0 && v.is_finite()) {
                            return Err(Error::NegativeCoefficient {
                                coefficient: "scattering",
                                cell: s,
                                value: v,
                            });
                        }
                        if v != b[j * m + i] {
                            return Err(Error::InvalidParameter(format!(
                                "scattering block at cell {s} is not symmetric"
                            )));
                        }
                    }
                }
                blocks.push(b);
            }
        }
        Ok(Self {
            grid: grid.clone(),
            shells,
            weight,
            blocks,
        })
    }

    /// `alpha = sigma(x) / |shell|` with unit weights, so that `a = sigma`.
    pub fn isotropic(grid: &PhaseGrid, sigma: &ScalarField) -> Result<Self> {
        grid.space().ensure_same(sigma.grid(), "opacity grid")?;
        Self::from_fn(grid, 1.0, |s, shell, _, _| {
            sigma.values()[s] / shell.members.len() as f64
        })
    }

    /// The same explicit block for every spatial cell, one per shell in
    /// increasing radius order.
    pub fn explicit(grid: &PhaseGrid, blocks: &[Vec<Vec<f64>>]) -> Result<Self> {
        let shells = momentum_shells(grid);
        if blocks.len() != shells.len() {
            return Err(Error::InvalidParameter(format!(
                "grid has {} shells but {} blocks were given",
                shells.len(),
                blocks.len()
            )));
        }
        for (k, (b, sh)) in blocks.iter().zip(&shells).enumerate() {
            if b.len() != sh.members.len() || b.iter().any(|row| row.len() != sh.members.len()) {
                return Err(Error::InvalidParameter(format!(
                    "block {k} must be {0}x{0}",
                    sh.members.len()
                )));
            }
        }
        let index: Vec<f64> = shells.iter().map(|s| s.radius).collect();
        Self::from_fn(grid, 1.0, |_, shell, i, j| {
            let k = index
                .iter()
                .position(|r| *r == shell.radius)
                .expect("shell");
            blocks[k][i][j]
        })
    }

    pub fn zero(grid: &PhaseGrid) -> Result<Self> {
        Self::from_fn(grid, 1.0, |_, _, _, _| 0.0)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Shells with a single member (no scattering partner).
    pub fn degenerate_shells(&self) -> usize {
        self.shells.iter().filter(|s| s.members.len() == 1).count()
    }

    pub fn block(&self, s: usize, shell: usize) -> &[f64] {
        &self.blocks[s * self.shells.len() + shell]
    }

    fn check_grid(&self, psi: &DistributionField) -> Result<()> {
        if psi.grid() == &self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "scattering kernel and density on different grids".into(),
            ))
        }
    }
}

/// `a(x, p) = sum_{p' in shell(p)} alpha(x, p', p) w(p')` per phase cell.
pub fn absorption_from_scattering(alpha: &ScatteringKernel) -> DistributionField {
    let grid = &alpha.grid;
    let mut a = DistributionField::zeros(grid);
    for s in 0..grid.space().len() {
        for (k, shell) in alpha.shells.iter().enumerate() {
            let b = alpha.block(s, k);
            let m = shell.members.len();
            for (i, &qi) in shell.members.iter().enumerate() {
                let mut acc = 0.0;
                for j in 0..m {
                    acc += b[j * m + i] * alpha.weight;
                }
                a.values_mut()[grid.index(s, qi)] = acc;
            }
        }
    }
    a
}

/// Collisional `dPsi/dt`: in-scattering gain minus absorption loss on each shell.
///
/// With a symmetric kernel the loss `a_i Psi_i` equals `sum_j alpha_ij w Psi_i`,
/// so the update is accumulated as `sum_j alpha_ij w (Psi_j - Psi_i)`, which
/// vanishes bitwise on shell-constant data.
pub fn collision_rhs(
    psi: &DistributionField,
    alpha: &ScatteringKernel,
    h: &SeparableHamiltonian,
) -> Result<DistributionField> {
    if !h.is_radiation() {
        return Err(Error::WrongHamiltonian(
            "collisions act on the radiation density".into(),
        ));
    }
    alpha.check_grid(psi)?;
    let grid = psi.grid();
    let mut out = DistributionField::zeros(grid);
    for s in 0..grid.space().len() {
        for (k, shell) in alpha.shells.iter().enumerate() {
            let b = alpha.block(s, k);
            let m = shell.members.len();
            for (i, &qi) in shell.members.iter().enumerate() {
                let here = psi.get(s, qi);
                let mut acc = 0.0;
                for (j, &qj) in shell.members.iter().enumerate() {
                    acc += b[i * m + j] * alpha.weight * (psi.get(s, qj) - here);
                }
                out.values_mut()[grid.index(s, qi)] = acc;
            }
        }
    }
    Ok(out)
}

/// `(int H_r dPsi/dt, int (1/Psi) dPsi/dt)` for the collision operator alone.
pub fn collision_diagnostics(
    psi: &DistributionField,
    alpha: &ScatteringKernel,
    h: &SeparableHamiltonian,
) -> Result<(f64, f64)> {
    if let Some(cell) = psi.values().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonPositive {
            quantity: "wave density",
            cell,
            value: psi.values()[cell],
        });
    }
    let d = collision_rhs(psi, alpha, h)?;
    let grid = psi.grid();
    let xs = grid.space().centers();
    let ps = grid.momentum().centers();
    let np = ps.len();
    let energy: Vec<f64> = d
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| h.energy(&xs[i / np], &ps[i % np]) * v)
        .collect();
    let entropy: Vec<f64> = d
        .values()
        .iter()
        .zip(psi.values())
        .map(|(v, p)| v / p)
        .collect();
    let vol = grid.cell_volume();
    Ok((pairwise_sum(&energy) * vol, pairwise_sum(&entropy) * vol))
}

/// Integrates the collision operator alone over `dt` with RK4 substeps.
pub fn collide(
    psi: &DistributionField,
    alpha: &ScatteringKernel,
    h: &SeparableHamiltonian,
    dt: f64,
) -> Result<DistributionField> {
    let a_max = absorption_from_scattering(alpha)
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max(*v));
    // eigenvalues of each shell block lie in [-2 a_max, 0]
    let substeps = ((dt.abs() * a_max / 0.5).ceil() as usize).max(1);
    let h_sub = dt / substeps as f64;
    let mut u = psi.clone();
    for _ in 0..substeps {
        u = rk_step(&u, h_sub, Scheme::Rk4, |v| collision_rhs(v, alpha, h))?;
    }
    Ok(u)
}

/// Strang-split step: collide `dt/2`, stream `dt`, collide `dt/2`.
pub fn step_transport_collisions(
    psi: &DistributionField,
    alpha: &ScatteringKernel,
    h: &SeparableHamiltonian,
    dt: f64,
    scheme: Scheme,
) -> Result<DistributionField> {
    let half = collide(psi, alpha, h, 0.5 * dt)?;
    let streamed = step_transport(&half, h, dt, scheme)?;
    collide(&streamed, alpha, h, 0.5 * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, UniformGrid};

    fn grid_1d(np: usize) -> PhaseGrid {
        PhaseGrid::new(
            UniformGrid::line(4, 0.0, 1.0).unwrap(),
            UniformGrid::line(np, -1.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn radiation() -> SeparableHamiltonian {
        SeparableHamiltonian::radiation(1.0).unwrap()
    }

    #[test]
    fn shells_pair_opposite_momenta_in_1d() {
        let shells = momentum_shells(&grid_1d(8));
        assert_eq!(shells.len(), 4);
        for s in &shells {
            assert_eq!(s.members.len(), 2);
        }
        assert_eq!(shells[0].members, vec![3, 4]);
    }

    #[test]
    fn shells_are_symmetry_orbits_in_2d() {
        let sq = |n, a, b| {
            UniformGrid::new(vec![
                Axis::new(n, a, b).unwrap(),
                Axis::new(n, a, b).unwrap(),
            ])
            .unwrap()
        };
        let grid = PhaseGrid::new(sq(4, 0.0, 1.0), sq(4, -1.0, 1.0)).unwrap();
        let sizes: Vec<usize> = momentum_shells(&grid)
            .iter()
            .map(|s| s.members.len())
            .collect();
        assert_eq!(sizes, vec![4, 8, 4]);
    }

    #[test]
    fn absorption_examples() {
        let grid = grid_1d(8);
        let zero = ScatteringKernel::zero(&grid).unwrap();
        assert!(absorption_from_scattering(&zero)
            .values()
            .iter()
            .all(|v| *v == 0.0));
        let s = 0.7;
        let k = ScatteringKernel::from_fn(&grid, 1.0, |_, _, _, _| s).unwrap();
        assert!(absorption_from_scattering(&k)
            .values()
            .iter()
            .all(|v| *v == 2.0 * s));
        let sigma = ScalarField::constant(grid.space(), 3.0);
        let iso = ScatteringKernel::isotropic(&grid, &sigma).unwrap();
        assert!(absorption_from_scattering(&iso)
            .values()
            .iter()
            .all(|v| (*v - 3.0).abs() < 1e-15));
    }

    #[test]
    fn two_point_shell_exchange() {
        // two momentum cells, one shell {-p0, +p0}
        let grid = PhaseGrid::new(
            UniformGrid::line(4, 0.0, 1.0).unwrap(),
            UniformGrid::line(4, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let s = 0.5;
        let k = ScatteringKernel::from_fn(&grid, 1.0, |_, _, _, _| s).unwrap();
        let h = radiation();
        // I = (2, 0) on the inner shell means Psi = I / (c |p|) = (2 / 0.25, 0)
        let psi = DistributionField::from_fn(&grid, |_, p| {
            if (p[0] + 0.25).abs() < 1e-12 {
                8.0
            } else {
                0.0
            }
        });
        let d = collision_rhs(&psi, &k, &h).unwrap();
        let to_i = 0.25;
        assert!((d.get(0, 1) * to_i + 2.0 * s).abs() < 1e-14);
        assert!((d.get(0, 2) * to_i - 2.0 * s).abs() < 1e-14);
        let doubled = collision_rhs(&psi.map(|_, _, v| 2.0 * v), &k, &h).unwrap();
        for (a, b) in doubled.values().iter().zip(d.values()) {
            assert_eq!(*a, 2.0 * b);
        }
    }

    #[test]
    fn shell_constant_density_is_an_exact_equilibrium() {
        let grid = grid_1d(8);
        let k =
            ScatteringKernel::from_fn(&grid, 1.0, |s, _, i, j| 0.1 + (s + i + j) as f64).unwrap();
        let psi = DistributionField::from_fn(&grid, |x, p| 1.0 + x[0] + p[0].abs());
        let d = collision_rhs(&psi, &k, &radiation()).unwrap();
        assert!(d.values().iter().all(|v| *v == 0.0));
        let (e, s) = collision_diagnostics(&psi, &k, &radiation()).unwrap();
        assert_eq!((e, s), (0.0, 0.0));
    }

    #[test]
    fn asymmetric_or_negative_kernels_are_rejected() {
        let grid = grid_1d(8);
        assert!(ScatteringKernel::from_fn(&grid, 1.0, |_, _, i, j| (i + 2 * j) as f64).is_err());
        assert!(ScatteringKernel::from_fn(&grid, 1.0, |_, _, _, _| -1.0).is_err());
    }

    #[test]
    fn singleton_shells_are_inert() {
        // asymmetric momentum grid: no cell has a partner of equal norm
        let grid = PhaseGrid::new(
            UniformGrid::line(4, 0.0, 1.0).unwrap(),
            UniformGrid::line(4, 0.1, 1.0).unwrap(),
        )
        .unwrap();
        let k = ScatteringKernel::from_fn(&grid, 1.0, |_, _, _, _| 2.0).unwrap();
        assert_eq!(k.degenerate_shells(), 4);
        let psi = DistributionField::from_fn(&grid, |x, p| 1.0 + x[0] * p[0]);
        assert!(collision_rhs(&psi, &k, &radiation())
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn collide_conserves_energy_and_relaxes_to_shell_average() {
        let grid = grid_1d(8);
        let k = ScatteringKernel::from_fn(&grid, 1.0, |_, _, _, _| 1.0).unwrap();
        let h = radiation();
        let psi = DistributionField::from_fn(&grid, |x, p| 1.0 + 0.5 * (p[0] + x[0]).sin());
        let e0 = crate::kinetics::total_energy(&psi, &h);
        let out = collide(&psi, &k, &h, 20.0).unwrap();
        let e1 = crate::kinetics::total_energy(&out, &h);
        assert!((e1 - e0).abs() < 1e-13 * e0);
        for s in 0..4 {
            for q in 0..4 {
                assert!((out.get(s, q) - out.get(s, 7 - q)).abs() < 1e-10);
            }
        }
    }
}
