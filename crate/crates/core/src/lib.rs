//! Hörmander spaces with RO-varying weights and a Fredholm analyzer for the
//! boundary problem `Δu = f` in the unit disk, `∂^m u/∂ν^m = g` on its
//! boundary circle.

pub mod error;
pub mod quadrature;
pub mod ro;
pub mod spectra;
pub mod interpolation;
pub mod disk;
pub mod green;

pub use error::{Error, Result};
pub use num_complex::Complex64;
