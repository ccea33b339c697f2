//! Moments of the Hurwitz zeta function at rational shifts.
//!
//! The crate evaluates `zeta(s, a/q)` and Dirichlet L-functions on the critical
//! line, integrates their moments over `[T, 2T]`, computes the Euler-product
//! constants predicted for those moments, and runs the random-matrix model
//! for the hybrid Euler-Hadamard product.

pub mod arith;
pub mod characters;
pub mod cli;
pub mod constants;
pub mod error;
pub mod hybrid;
pub mod lfun;
pub mod moments;
pub mod quadrature;
pub mod rmt;
pub mod verify;

pub use error::{Error, Result};
