//! Structure-preserving kinetic transport and moment closures.
//!
//! The crate works on uniform grids over configuration space `Q` (periodic,
//! one or two dimensions) and phase space `T*Q`. It provides:
//!
//! * [`kinetics`]: the canonical bracket, upwind phase-space transport for any
//!   separable Hamiltonian, and global functionals;
//! * [`moments`]: Hamiltonian-determined kinetic moments and their evolution;
//! * [`collisions`]: the scattering/absorption operator for radiation;
//! * [`closures`]: variable moment closures driven by a Hamilton-Jacobi potential;
//! * [`radhydro`]: two-temperature gray diffusion radiation hydrodynamics.

pub mod closures;
pub mod collisions;
pub mod error;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod kinetics;
pub mod moments;
pub mod numerics;
pub mod radhydro;
pub mod tensor;

pub use error::{Error, Result};
pub use field::{DistributionField, ScalarField, VectorField};
pub use grid::{Axis, PhaseGrid, UniformGrid, Vector, MAX_DIM};
pub use hamiltonian::{CustomHamiltonian, Matrix, Potential, SeparableHamiltonian};
pub use numerics::{pairwise_sum, Scheme};
pub use tensor::{sym_tensor_product, SymTensor, SymTensorField};
