//! Variable moment closures.
//!
//! A closure state `(M^0, P_0, phi)` stands for the distribution
//! `M^0 delta(p + grad phi) - P_0 . grad_p delta(p + grad phi)`; its kinetic
//! moments are obtained by moving the delta derivatives onto the kernel
//! `z = grad_p H`. The potential `phi` is stored as a periodic part plus a
//! constant mean gradient, `phi_total(x) = phi(x) + slope . x`, so that beams
//! with a net momentum fit on a periodic grid.

mod dynamics;
mod gamma;
mod hj;
mod init;
mod state;

pub use dynamics::{
    closure0_rhs, closure1_rhs, collective_hamiltonian, max_closure_dt, step_closure, ClosureRates,
};
pub use gamma::{gamma_moment, generating_function_gap, GammaImageSpec};
pub use hj::hj_rhs;
pub use init::{init_phi_from_momentum, init_phi_from_momentum_with_tol, CURL_TOL};
pub use state::{
    closure_m1, closure_m2, fluid_m1, fluid_m2, gradient_floor, m1_from_state0, m1_from_state1,
    m2_from_state1, radiation_m1, radiation_m2, ClosureFields, ClosureState, GRADIENT_FLOOR_REL,
};
