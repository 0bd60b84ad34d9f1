//! Numerical toolkit for the dilute Bose gas in a box with Neumann boundary
//! conditions: scattering lengths, image-charge Green functions, the two-body
//! box problem, correlation kernels, energy formulas and the cell bound.

pub mod bessel;
pub mod dct;
pub mod dump;
pub mod eigen;
pub mod energy;
pub mod error;
pub mod fock;
pub mod green;
pub mod kernels;
pub mod par;
pub mod potential;
pub mod quad;
pub mod runs;
pub mod scattering;
pub mod thermo;
pub mod twobody;

pub use error::{Error, Result};
pub use potential::Potential;
