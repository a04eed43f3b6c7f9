//! Kinetic evolution of a cold beam against the degree-one fluid closure.

use kinclosure::closures::{init_phi_from_momentum, m1_from_state0, step_closure, ClosureState};
use kinclosure::kinetics::{max_stable_dt, step_transport};
use kinclosure::moments::{grid_delta_linear, kinetic_moment};
use kinclosure::{
    PhaseGrid, Potential, ScalarField, Scheme, SeparableHamiltonian, UniformGrid, VectorField,
};
use std::f64::consts::TAU;

const U_AMP: f64 = 0.5;

/// `(relative L1 gap of M0, relative L1 gap of M1)` at `t_end`.
fn gaps(nx: usize, np: usize, t_end: f64) -> (f64, f64) {
    let space = UniformGrid::line(nx, 0.0, TAU).unwrap();
    let grid = PhaseGrid::new(space.clone(), UniformGrid::line(np, -1.0, 1.0).unwrap()).unwrap();
    let h = SeparableHamiltonian::non_relativistic(1.0, Potential::Zero).unwrap();
    let m0 = ScalarField::from_fn(&space, |x| 1.0 + 0.3 * x[0].cos());
    let u0 = VectorField::from_fn(&space, |x| [U_AMP * x[0].sin(), 0.0]);
    let phi = init_phi_from_momentum(&u0).unwrap();
    let mut closure = ClosureState::degree0(h.clone(), m0.clone(), phi, [0.0, 0.0]).unwrap();
    // beam momentum p = -grad phi
    let mut p_beam = closure.grad_phi();
    for c in 0..nx {
        let q = p_beam.get(c);
        p_beam.set(c, [-q[0], 0.0]);
    }
    let mut g = grid_delta_linear(&grid, &m0, &p_beam).unwrap();

    let dt = 0.5 * max_stable_dt(&grid, &h).min(kinclosure::closures::max_closure_dt(&closure));
    let steps = (t_end / dt).ceil() as usize;
    let dt = t_end / steps as f64;
    for _ in 0..steps {
        g = step_transport(&g, &h, dt, Scheme::Rk2).unwrap();
        closure = step_closure(&closure, dt, Scheme::Rk2).unwrap();
    }
    let k0 = kinetic_moment(&g, &h, 0).unwrap().to_scalar().unwrap();
    let k1 = kinetic_moment(&g, &h, 1).unwrap().to_vector().unwrap();
    let c1 = m1_from_state0(&closure).unwrap();
    let cm0 = &closure.fields.m0;
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    let g0 = l1(k0.values(), cm0.values()) / l1(cm0.values(), &vec![0.0; nx]);
    let k1x = k1.component(0);
    let c1x = c1.component(0);
    let g1 = l1(k1x.values(), c1x.values()) / l1(c1x.values(), &vec![0.0; nx]);
    (g0, g1)
}

#[test]
fn cold_beam_gap_shrinks_under_refinement() {
    let horizon = 1.0 / U_AMP;
    let t = 0.25 * horizon;
    let mut last = (f64::INFINITY, f64::INFINITY);
    for (nx, np) in [(128, 16), (256, 32), (512, 64)] {
        let (g0, g1) = gaps(nx, np, t);
        eprintln!("{nx}x{np}: gap M0 {g0:.3e}, gap M1 {g1:.3e}");
        assert!(g0 < last.0 && g1 < last.1);
        last = (g0, g1);
    }
}
