//! Analysis on the Sierpinski gasket and its finite products: addressing,
//! harmonic extension, Kusuoka and energy measures, cell-averaged gradients,
//! Sobolev and Poincare estimates, and exact matrix-word spectra over `Q(sqrt 3)`.

pub mod addressing;
pub mod cli;
pub mod error;
pub mod extremal;
pub mod harmonic;
pub mod mat;
pub mod measure;
pub mod scalar;
pub mod sobolev;

pub use error::{Error, Result};
