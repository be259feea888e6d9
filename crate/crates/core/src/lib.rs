//! Numerical checks for the coupled two-component eigenfunction system
//!
//! ```text
//! φ₁″ = ( y − ε·2^{−1/3}) φ₁ + 2^{2/3} φ₂
//! φ₂″ = (−y − ε·2^{−1/3}) φ₂ + 2^{2/3} φ₁
//! ```
//!
//! The crate integrates the system from the published initial data, measures
//! how far the solutions are from having definite parity, checks the complex
//! two-component form it is derived from, and looks for bounded eigenstates
//! with two independent methods (two-sided shooting and a finite-difference
//! spectrum on truncated domains).

pub mod basis;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod odecore;
pub mod parity;
pub mod repro;
pub mod spectrum;

pub use error::{Error, Result};
pub use odecore::{
    bilinear_form, integrate, rhs, sample, EigenParams, PhiState, Termination, ToleranceSpec,
    Trajectory,
};
