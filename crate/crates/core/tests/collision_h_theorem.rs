//! Random-state checks of energy conservation and entropy production of the
//! scattering operator against the symmetrized pair form.

use kinclosure::collisions::{
    collision_diagnostics, collision_rhs, momentum_shells, ScatteringKernel,
};
use kinclosure::{DistributionField, PhaseGrid, SeparableHamiltonian, UniformGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn phase_grid(np: usize, two_d: bool) -> PhaseGrid {
    let dim = if two_d { 2 } else { 1 };
    let space = UniformGrid::new(vec![kinclosure::Axis::new(4, 0.0, 1.0).unwrap(); dim]).unwrap();
    let momentum = if two_d {
        UniformGrid::new(vec![
            kinclosure::Axis::new(np, -1.0, 1.0).unwrap(),
            kinclosure::Axis::new(np, -1.0, 1.0).unwrap(),
        ])
        .unwrap()
    } else {
        UniformGrid::line(np, -1.0, 1.0).unwrap()
    };
    PhaseGrid::new(space, momentum).unwrap()
}

/// Random symmetric nonnegative blocks, one per (cell, shell).
fn random_kernel(
    grid: &PhaseGrid,
    rng: &mut ChaCha8Rng,
    weight: f64,
) -> (ScatteringKernel, Vec<Vec<f64>>) {
    let shells = momentum_shells(grid);
    let mut blocks = Vec::new();
    for _ in 0..grid.space().len() {
        for sh in &shells {
            let m = sh.members.len();
            let mut b = vec![0.0; m * m];
            for i in 0..m {
                for j in i..m {
                    let v = rng.gen_range(0.0..3.0);
                    b[i * m + j] = v;
                    b[j * m + i] = v;
                }
            }
            blocks.push(b);
        }
    }
    let nsh = shells.len();
    let lookup = blocks.clone();
    let radii: Vec<f64> = shells.iter().map(|s| s.radius).collect();
    let k = ScatteringKernel::from_fn(grid, weight, |s, shell, i, j| {
        let idx = radii.iter().position(|r| *r == shell.radius).unwrap();
        let m = shell.members.len();
        lookup[s * nsh + idx][i * m + j]
    })
    .unwrap();
    (k, blocks)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn energy_conserved_and_entropy_produced(seed in any::<u64>(), np_half in 2usize..5, two_d in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = phase_grid(2 * np_half, two_d);
        let weight = rng.gen_range(0.2..2.0);
        let (kernel, blocks) = random_kernel(&grid, &mut rng, weight);
        let psi = DistributionField::from_values(
            &grid,
            (0..grid.len()).map(|_| rng.gen_range(0.05..5.0)).collect(),
        ).unwrap();
        let c = rng.gen_range(0.5..2.0);
        let h = SeparableHamiltonian::radiation(c).unwrap();
        let (energy_rate, entropy_rate) = collision_diagnostics(&psi, &kernel, &h).unwrap();

        // symmetrized oracle: 1/2 sum alpha w (Psi_j - Psi_i)(1/Psi_i - 1/Psi_j)
        let shells = momentum_shells(&grid);
        let ps = grid.momentum().centers();
        let mut oracle = 0.0;
        let mut scale = 0.0;
        for s in 0..grid.space().len() {
            for (k, sh) in shells.iter().enumerate() {
                let b = &blocks[s * shells.len() + k];
                let m = sh.members.len();
                for (i, &qi) in sh.members.iter().enumerate() {
                    for (j, &qj) in sh.members.iter().enumerate() {
                        let (pi, pj) = (psi.get(s, qi), psi.get(s, qj));
                        let a = b[i * m + j] * weight;
                        oracle += 0.5 * a * (pj - pi) * (1.0 / pi - 1.0 / pj);
                        let e = c * (ps[qi][0].hypot(ps[qi][1]));
                        scale += a * e * (pi + pj) + a * (pj / pi + 1.0);
                    }
                }
            }
        }
        oracle *= grid.cell_volume();
        scale *= grid.cell_volume();
        prop_assert!(energy_rate.abs() <= 1e-12 * scale, "energy rate {energy_rate:e} scale {scale:e}");
        prop_assert!(entropy_rate >= -1e-12 * scale);
        prop_assert!((entropy_rate - oracle).abs() <= 1e-12 * scale);
    }

    #[test]
    fn shell_constant_data_is_an_exact_equilibrium(seed in any::<u64>(), np_half in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = phase_grid(2 * np_half, true);
        let (kernel, _) = random_kernel(&grid, &mut rng, 1.0);
        let shells = momentum_shells(&grid);
        let mut values = vec![0.0; grid.len()];
        for s in 0..grid.space().len() {
            for sh in &shells {
                let v = rng.gen_range(0.1..4.0);
                for &q in &sh.members {
                    values[grid.index(s, q)] = v;
                }
            }
        }
        let psi = DistributionField::from_values(&grid, values).unwrap();
        let h = SeparableHamiltonian::radiation(1.0).unwrap();
        let d = collision_rhs(&psi, &kernel, &h).unwrap();
        prop_assert!(d.values().iter().all(|v| *v == 0.0));
    }
}
