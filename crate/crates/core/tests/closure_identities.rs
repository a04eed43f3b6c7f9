//! Random per-cell checks of the closure formulas against each other and
//! against the Gamma-image moments.

use kinclosure::closures::{
    closure_m1, closure_m2, fluid_m1, fluid_m2, gamma_moment, m1_from_state0, m1_from_state1,
    m2_from_state1, radiation_m1, radiation_m2, ClosureState, GammaImageSpec,
};
use kinclosure::{
    Axis, Potential, ScalarField, SeparableHamiltonian, UniformGrid, Vector, VectorField,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vector {
    let mut v = [0.0; 2];
    for c in v.iter_mut().take(dim) {
        *c = rng.gen_range(lo..hi);
    }
    v
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= TOL * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pointwise_closure_identities(seed in any::<u64>(), two_d in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = if two_d { 2 } else { 1 };
        let m0 = rng.gen_range(0.1..5.0);
        let p0 = random_vector(&mut rng, dim, -2.0, 2.0);
        let mut grad = random_vector(&mut rng, dim, -3.0, 3.0);
        if grad[0].hypot(grad[1]) < 0.1 {
            grad[0] += 0.5;
        }
        let mass = rng.gen_range(0.3..3.0);
        let c = rng.gen_range(0.3..3.0);

        for h in [
            SeparableHamiltonian::non_relativistic(mass, Potential::Zero).unwrap(),
            SeparableHamiltonian::radiation(c).unwrap(),
        ] {
            let p = [-grad[0], -grad[1]];
            let z = h.velocity(&p);
            let m1 = closure_m1(&h, dim, m0, &p0, &grad);
            let m2 = closure_m2(&h, dim, m0, &p0, &grad);
            let scale = m2.max_abs() + m0 * (z[0].abs() + z[1].abs()).powi(2);
            for a in 0..dim {
                for b in 0..dim {
                    let r = m2.get(&[a, b]) + m0 * z[a] * z[b] - m1[a] * z[b] - z[a] * m1[b];
                    prop_assert!(close(r, 0.0, scale), "M2 relation residual {r:e}");
                }
            }
            let (m1x, m2x) = if h.is_radiation() {
                (radiation_m1(c, m0, &p0, &grad), radiation_m2(dim, c, m0, &p0, &grad))
            } else {
                (fluid_m1(mass, m0, &p0, &grad), fluid_m2(dim, mass, m0, &p0, &grad))
            };
            for a in 0..dim {
                prop_assert!(close(m1[a], m1x[a], m1x[a].abs()), "M1 {a}: {} vs {}", m1[a], m1x[a]);
                for b in 0..dim {
                    let (u, v) = (m2.get(&[a, b]), m2x.get(&[a, b]));
                    prop_assert!(close(u, v, v.abs()), "M2 {a}{b}: {u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn gamma_moments_reproduce_closures(seed in any::<u64>(), two_d in any::<bool>(), radiation in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axes = if two_d {
            vec![Axis::new(4, 0.0, 1.0).unwrap(), Axis::new(4, 0.0, 1.0).unwrap()]
        } else {
            vec![Axis::new(4, 0.0, 1.0).unwrap()]
        };
        let grid = UniformGrid::new(axes).unwrap();
        let dim = grid.dim();
        let h = if radiation {
            SeparableHamiltonian::radiation(rng.gen_range(0.3..3.0)).unwrap()
        } else {
            SeparableHamiltonian::non_relativistic(rng.gen_range(0.3..3.0), Potential::Zero).unwrap()
        };
        let n = grid.len();
        let m0 = ScalarField::from_values(&grid, (0..n).map(|_| rng.gen_range(0.1..5.0)).collect()).unwrap();
        let phi = ScalarField::from_values(&grid, (0..n).map(|_| rng.gen_range(-0.05..0.05)).collect()).unwrap();
        let mut p0 = VectorField::zeros(&grid);
        for cell in 0..n {
            p0.set(cell, random_vector(&mut rng, dim, -2.0, 2.0));
        }
        let slope = [1.0 + rng.gen_range(0.0..1.0), if two_d { rng.gen_range(-1.0..1.0) } else { 0.0 }];

        let s0 = ClosureState::degree0(h.clone(), m0.clone(), phi.clone(), slope).unwrap();
        let g0 = gamma_moment(&GammaImageSpec::from_state(&s0).unwrap(), &h, 1).unwrap().to_vector().unwrap();
        let want0 = m1_from_state0(&s0).unwrap();
        for cell in 0..n {
            for d in 0..dim {
                prop_assert!(close(g0.get(cell)[d], want0.get(cell)[d], want0.get(cell)[d].abs()));
            }
        }

        let s1 = ClosureState::degree1(h.clone(), m0, p0, phi, slope).unwrap();
        let spec = GammaImageSpec::from_state(&s1).unwrap();
        let g1 = gamma_moment(&spec, &h, 1).unwrap().to_vector().unwrap();
        prop_assert_eq!(g1, m1_from_state1(&s1).unwrap());
        let g2 = gamma_moment(&spec, &h, 2).unwrap();
        let want2 = m2_from_state1(&s1).unwrap();
        for cell in 0..n {
            let (a, b) = (g2.tensor_at(cell), want2.tensor_at(cell));
            for (x, y) in a.packed().iter().zip(b.packed()) {
                prop_assert!(close(*x, *y, y.abs()), "{x} vs {y}");
            }
        }
    }
}
