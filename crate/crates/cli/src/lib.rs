//! Scenario-driven runner for the kinetic, closure and radiation hydrodynamics solvers.

pub mod output;
pub mod profile;
pub mod report;
pub mod runner;
pub mod scenario;
