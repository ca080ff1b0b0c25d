//! Lie point symmetry tooling for variable-coefficient K(m,n) equations
//! `u_t + eps*(u^m)_x + f(t)*(u^n)_xxx = 0`.

pub mod classification;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod prolongation;
pub mod reduction;
pub mod symkernel;

pub use error::{Error, Result};
