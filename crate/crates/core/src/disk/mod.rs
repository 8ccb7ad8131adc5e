//! The Laplacian on the unit disk with one high-order normal-derivative
//! boundary condition: fields, solver, Fredholm data and probes.

pub mod cheb;
mod field;
mod probes;
mod solver;

pub use field::{mode_rng, radial_grid, ComplexValue, DiskField, DiskFieldRepr, ModeRepr};
pub use probes::*;
pub use solver::*;
