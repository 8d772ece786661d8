//! Cell-averaged gradients, Sobolev seminorms and norms, oscillation,
//! Poincare constants, derived exponents and the inequality harness.

mod exponents;
mod gradient;
mod harness;
mod norms;
mod poincare;
mod reports;

pub use exponents::*;
pub use gradient::*;
pub use harness::*;
pub use norms::*;
pub use poincare::*;
pub use reports::*;
