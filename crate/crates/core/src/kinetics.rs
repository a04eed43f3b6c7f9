//! Phase-space transport `dg/dt = -div_x(g z) + div_p(g grad_x U)`, the
//! canonical Poisson bracket, and global functionals of a distribution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::DistributionField;
use crate::grid::{PhaseGrid, Vector, MAX_DIM};
use crate::hamiltonian::SeparableHamiltonian;
use crate::numerics::{pairwise_sum, rk_step, Scheme};

/// Largest admissible Courant number for explicit transport steps.
pub const CFL_MAX: f64 = 0.9;

/// Central-difference derivative along configuration axis `d` (periodic).
fn dx_central(f: &DistributionField, s: usize, q: usize, d: usize) -> f64 {
    let grid = f.grid();
    let sp = grid.space();
    let up = f.get(sp.periodic_neighbor(s, d, 1), q);
    let dn = f.get(sp.periodic_neighbor(s, d, -1), q);
    (up - dn) / (2.0 * sp.spacing(d))
}

/// Derivative along momentum axis `d`: central inside, one-sided at the
/// truncated boundary.
fn dp_central(f: &DistributionField, s: usize, q: usize, d: usize) -> f64 {
    let mg = f.grid().momentum();
    let h = mg.spacing(d);
    match (mg.bounded_neighbor(q, d, -1), mg.bounded_neighbor(q, d, 1)) {
        (Some(dn), Some(up)) => (f.get(s, up) - f.get(s, dn)) / (2.0 * h),
        (None, Some(up)) => (f.get(s, up) - f.get(s, q)) / h,
        (Some(dn), None) => (f.get(s, q) - f.get(s, dn)) / h,
        (None, None) => 0.0,
    }
}

/// Discrete canonical bracket `[F, G] = grad_x F . grad_p G - grad_x G . grad_p F`.
///
/// Both products are accumulated separately before the final subtraction, so
/// swapping the arguments flips the sign of every cell exactly.
pub fn poisson_bracket(f: &DistributionField, g: &DistributionField) -> Result<DistributionField> {
    f.ensure_same_grid(g)?;
    let grid = f.grid();
    let n = grid.dim();
    let np = grid.momentum().len();
    let mut out = DistributionField::zeros(grid);
    out.values_mut()
        .par_chunks_mut(np)
        .enumerate()
        .for_each(|(s, fiber)| {
            for (q, v) in fiber.iter_mut().enumerate() {
                let mut a = 0.0;
                let mut b = 0.0;
                for d in 0..n {
                    a += dx_central(f, s, q, d) * dp_central(g, s, q, d);
                    b += dx_central(g, s, q, d) * dp_central(f, s, q, d);
                }
                *v = a - b;
            }
        });
    Ok(out)
}

/// Kinetic velocities `z(p_q)` for every momentum cell.
fn velocities(grid: &PhaseGrid, h: &SeparableHamiltonian) -> Vec<Vector> {
    grid.momentum()
        .centers()
        .iter()
        .map(|p| h.velocity(p))
        .collect()
}

/// Momentum-space drift `-grad_x U(x_s)` for every spatial cell.
fn forces(grid: &PhaseGrid, h: &SeparableHamiltonian) -> Vec<Vector> {
    grid.space()
        .centers()
        .iter()
        .map(|x| {
            let g = h.force_gradient(x);
            [-g[0], -g[1]]
        })
        .collect()
}

fn upwind(v: f64, left: f64, right: f64) -> f64 {
    if v >= 0.0 {
        v * left
    } else {
        v * right
    }
}

/// First-order upwind finite-volume evaluation of the transport right-hand side.
///
/// Configuration space is periodic; momentum space has zero-inflow faces, and
/// outflow through them leaves the domain.
pub fn transport_rhs(g: &DistributionField, h: &SeparableHamiltonian) -> Result<DistributionField> {
    let grid = g.grid();
    h.check_momentum_grid(grid)?;
    let n = grid.dim();
    let sp = grid.space();
    let mg = grid.momentum();
    let np = mg.len();
    let z = velocities(grid, h);
    let force = forces(grid, h);
    let force_free = h.is_force_free();
    let mut out = DistributionField::zeros(grid);
    out.values_mut()
        .par_chunks_mut(np)
        .enumerate()
        .for_each(|(s, fiber)| {
            let here = g.fiber(s);
            for d in 0..n {
                let hx = sp.spacing(d);
                let up = g.fiber(sp.periodic_neighbor(s, d, 1));
                let dn = g.fiber(sp.periodic_neighbor(s, d, -1));
                for q in 0..np {
                    let v = z[q][d];
                    let f_right = upwind(v, here[q], up[q]);
                    let f_left = upwind(v, dn[q], here[q]);
                    fiber[q] -= (f_right - f_left) / hx;
                }
            }
            if force_free {
                return;
            }
            let a = force[s];
            for d in 0..n {
                let hp = mg.spacing(d);
                let v = a[d];
                for q in 0..np {
                    let f_right = match mg.bounded_neighbor(q, d, 1) {
                        Some(r) => upwind(v, here[q], here[r]),
                        None => v.max(0.0) * here[q],
                    };
                    let f_left = match mg.bounded_neighbor(q, d, -1) {
                        Some(l) => upwind(v, here[l], here[q]),
                        None => v.min(0.0) * here[q],
                    };
                    fiber[q] -= (f_right - f_left) / hp;
                }
            }
        });
    Ok(out)
}

/// Largest `dt` for which the sum of directional Courant numbers is one.
///
/// The explicit upwind update is monotone when `dt` times this sum stays
/// below one, which is what guarantees positivity in phase space.
pub fn max_stable_dt(grid: &PhaseGrid, h: &SeparableHamiltonian) -> f64 {
    let n = grid.dim();
    let rate_x = velocities(grid, h)
        .iter()
        .map(|z| {
            (0..n)
                .map(|d| z[d].abs() / grid.space().spacing(d))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let rate_p = forces(grid, h)
        .iter()
        .map(|a| {
            (0..n)
                .map(|d| a[d].abs() / grid.momentum().spacing(d))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let rate = rate_x + rate_p;
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// Advances `g` by `dt` (negative `dt` runs the semi-discrete flow backward).
pub fn step_transport(
    g: &DistributionField,
    h: &SeparableHamiltonian,
    dt: f64,
    scheme: Scheme,
) -> Result<DistributionField> {
    let limit = CFL_MAX * max_stable_dt(g.grid(), h);
    if !(dt.abs() <= limit) {
        return Err(Error::CflViolation {
            dt: dt.abs(),
            limit,
        });
    }
    rk_step(g, dt, scheme, |u| transport_rhs(u, h))
}

fn weighted_total(g: &DistributionField, w: impl Fn(&Vector, &Vector) -> f64) -> f64 {
    let grid = g.grid();
    let xs = grid.space().centers();
    let ps = grid.momentum().centers();
    let np = ps.len();
    let terms: Vec<f64> = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| w(&xs[i / np], &ps[i % np]) * v)
        .collect();
    pairwise_sum(&terms) * grid.cell_volume()
}

/// Total mass `int g dp dx`.
pub fn total_mass(g: &DistributionField) -> f64 {
    g.mass()
}

/// Hamiltonian functional `int H g dp dx` (midpoint rule).
pub fn total_energy(g: &DistributionField, h: &SeparableHamiltonian) -> f64 {
    weighted_total(g, |x, p| h.energy(x, p))
}

/// Momentum functional `int p g dp dx`.
pub fn total_momentum(g: &DistributionField) -> Vector {
    let mut out = [0.0; MAX_DIM];
    for (d, o) in out.iter_mut().enumerate().take(g.grid().dim()) {
        *o = weighted_total(g, |_, p| p[d]);
    }
    out
}

/// Wave entropy `int log Psi dp dx`; fails on any nonpositive cell.
pub fn wave_entropy(psi: &DistributionField) -> Result<f64> {
    if let Some(cell) = psi.values().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonPositive {
            quantity: "wave density",
            cell,
            value: psi.values()[cell],
        });
    }
    let logs: Vec<f64> = psi.values().iter().map(|v| v.ln()).collect();
    Ok(pairwise_sum(&logs) * psi.grid().cell_volume())
}

/// Boltzmann entropy `int f log f dp dx` with `0 log 0 = 0`.
pub fn boltzmann_entropy(f: &DistributionField) -> Result<f64> {
    if let Some(cell) = f.values().iter().position(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::NonPositive {
            quantity: "particle density",
            cell,
            value: f.values()[cell],
        });
    }
    let terms: Vec<f64> = f
        .values()
        .iter()
        .map(|&v| if v == 0.0 { 0.0 } else { v * v.ln() })
        .collect();
    Ok(pairwise_sum(&terms) * f.grid().cell_volume())
}

/// Specific intensity `I = c H_r Psi`.
pub fn intensity_from_density(
    psi: &DistributionField,
    h: &SeparableHamiltonian,
) -> Result<DistributionField> {
    let SeparableHamiltonian::Radiation { c } = h else {
        return Err(Error::WrongHamiltonian(
            "intensity needs the radiation Hamiltonian".into(),
        ));
    };
    Ok(psi.map(|x, p, v| c * h.energy(x, p) * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use crate::hamiltonian::Potential;
    use crate::numerics::Scheme;

    fn grid_1d(nx: usize, np: usize, p: (f64, f64)) -> PhaseGrid {
        PhaseGrid::new(
            UniformGrid::line(nx, 0.0, 1.0).unwrap(),
            UniformGrid::line(np, p.0, p.1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bracket_of_canonical_pair_is_one() {
        let grid = grid_1d(16, 16, (-1.0, 1.0));
        let f = DistributionField::from_fn(&grid, |x, _| x[0]);
        let g = DistributionField::from_fn(&grid, |_, p| p[0]);
        let b = poisson_bracket(&f, &g).unwrap();
        // x is not periodic, so only cells away from the x wrap are checked
        for s in 1..15 {
            for q in 0..16 {
                assert!((b.get(s, q) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bracket_of_quadratics_converges() {
        let err = |n: usize| {
            let grid = PhaseGrid::new(
                UniformGrid::line(n, -1.0, 1.0).unwrap(),
                UniformGrid::line(n, -1.0, 1.0).unwrap(),
            )
            .unwrap();
            let f = DistributionField::from_fn(&grid, |x, _| x[0] * x[0]);
            let g = DistributionField::from_fn(&grid, |_, p| p[0] * p[0]);
            let b = poisson_bracket(&f, &g).unwrap();
            let xs = grid.space().centers();
            let ps = grid.momentum().centers();
            let mut e: f64 = 0.0;
            for s in 1..n - 1 {
                for q in 1..n - 1 {
                    e = e.max((b.get(s, q) - 4.0 * xs[s][0] * ps[q][0]).abs());
                }
            }
            e
        };
        // central differences are exact on quadratics away from the boundary
        assert!(err(16) < 1e-12 && err(32) < 1e-12);
    }

    #[test]
    fn bracket_is_exactly_antisymmetric() {
        let grid = PhaseGrid::new(
            UniformGrid::new(vec![
                crate::grid::Axis::new(6, 0.0, 1.0).unwrap(),
                crate::grid::Axis::new(5, 0.0, 2.0).unwrap(),
            ])
            .unwrap(),
            UniformGrid::new(vec![
                crate::grid::Axis::new(4, -1.0, 1.0).unwrap(),
                crate::grid::Axis::new(5, -1.0, 1.0).unwrap(),
            ])
            .unwrap(),
        )
        .unwrap();
        let f = DistributionField::from_fn(&grid, |x, p| (3.0 * x[0] + p[1]).sin() * p[0]);
        let g = DistributionField::from_fn(&grid, |x, p| (x[1] - p[0] * p[1]).cos() + x[0]);
        let a = poisson_bracket(&f, &g).unwrap();
        let b = poisson_bracket(&g, &f).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert_eq!(*u, -*v);
        }
        let z = poisson_bracket(&f, &f).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn transport_of_x_independent_data_vanishes() {
        let grid = grid_1d(8, 8, (-1.0, 1.0));
        let g = DistributionField::from_fn(&grid, |_, p| (-p[0] * p[0]).exp());
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        assert!(transport_rhs(&g, &h)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn radiation_rhs_is_minus_derivative_for_positive_momenta() {
        let tau = std::f64::consts::TAU;
        let n = 256;
        let grid = PhaseGrid::new(
            UniformGrid::line(n, 0.0, tau).unwrap(),
            UniformGrid::line(8, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let g = DistributionField::from_fn(&grid, |x, p| if p[0] > 0.0 { x[0].sin() } else { 0.0 });
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let r = transport_rhs(&g, &h).unwrap();
        let xs = grid.space().centers();
        let ps = grid.momentum().centers();
        for s in 0..n {
            for q in 0..8 {
                let exact = if ps[q][0] > 0.0 { -xs[s][0].cos() } else { 0.0 };
                assert!((r.get(s, q) - exact).abs() < 2.0 * tau / n as f64);
            }
        }
    }

    #[test]
    fn constant_density_in_linear_potential_is_stationary_inside() {
        let grid = grid_1d(8, 8, (-1.0, 1.0));
        let g = DistributionField::constant(&grid, 1.0);
        let h = SeparableHamiltonian::non_relativistic(
            1.0,
            Potential::Linear {
                gradient: [1.0, 0.0],
            },
        )
        .unwrap();
        let r = transport_rhs(&g, &h).unwrap();
        for s in 0..8 {
            for q in 1..7 {
                assert_eq!(r.get(s, q), 0.0);
            }
        }
    }

    #[test]
    fn radiation_grid_with_center_at_origin_is_rejected() {
        let grid = grid_1d(8, 5, (-1.0, 1.0));
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let g = DistributionField::zeros(&grid);
        assert!(matches!(
            transport_rhs(&g, &h),
            Err(Error::SingularMomentum { .. })
        ));
    }

    #[test]
    fn oversized_step_is_reported() {
        let grid = grid_1d(16, 8, (-1.0, 1.0));
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let g = DistributionField::zeros(&grid);
        let dt = max_stable_dt(&grid, &h);
        assert!(matches!(
            step_transport(&g, &h, dt, Scheme::Rk2),
            Err(Error::CflViolation { .. })
        ));
        let z = step_transport(&g, &h, 0.5 * dt, Scheme::Rk2).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn functional_examples() {
        let grid = grid_1d(16, 16, (-1.0, 1.0));
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let one = DistributionField::constant(&grid, 1.0);
        assert!((total_energy(&one, &h) - 1.0).abs() < 1e-12);
        assert!(total_momentum(&one)[0].abs() < 1e-15);
        assert_eq!(wave_entropy(&one).unwrap(), 0.0);
        assert_eq!(boltzmann_entropy(&one).unwrap(), 0.0);
        let e = DistributionField::constant(&grid, std::f64::consts::E);
        // domain volume is 1 x 2
        assert!((wave_entropy(&e).unwrap() - 2.0).abs() < 1e-12);
        let zero = DistributionField::zeros(&grid);
        assert_eq!(boltzmann_entropy(&zero).unwrap(), 0.0);
        assert!(wave_entropy(&zero).is_err());
        assert_eq!(total_energy(&zero, &h), 0.0);
    }

    #[test]
    fn intensity_example() {
        let axes = |a: (f64, f64), b: (f64, f64)| {
            UniformGrid::new(vec![
                crate::grid::Axis::new(4, a.0, a.1).unwrap(),
                crate::grid::Axis::new(4, b.0, b.1).unwrap(),
            ])
            .unwrap()
        };
        // momentum centers are the integers 1..4 and 3..6, so p = (3, 4) is a center
        let grid =
            PhaseGrid::new(axes((0.0, 1.0), (0.0, 1.0)), axes((0.5, 4.5), (2.5, 6.5))).unwrap();
        let psi = DistributionField::constant(&grid, 1.0);
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let i = intensity_from_density(&psi, &h).unwrap();
        let q = grid.momentum().flat_index([2, 1]);
        assert_eq!(grid.momentum().center(q), [3.0, 4.0]);
        assert_eq!(i.get(0, q), 5.0);
        let doubled = intensity_from_density(&psi.map(|_, _, v| 2.0 * v), &h).unwrap();
        assert_eq!(doubled.get(3, q), 10.0);
        let nr = SeparableHamiltonian::non_relativistic(1.0, Potential::Zero).unwrap();
        assert!(intensity_from_density(&psi, &nr).is_err());
    }
}
