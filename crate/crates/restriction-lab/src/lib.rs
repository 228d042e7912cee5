//! Numerical laboratory for the adjoint Fourier restriction functional on S².
//!
//! The crate measures the L⁴-extension functional Λ(f) = ‖f̂σ‖₄⁴/‖f‖₂⁴ through
//! its convolution form, iterates the associated Euler–Lagrange map toward
//! critical points, and fits modulation characters c·e^{ix·ξ} to complex
//! fields. Everything is built on fixed product quadratures with deterministic
//! compensated summation, so runs with the same configuration and seed
//! reproduce bit-identically at any thread count.

pub mod acceptance;
pub mod cli;
pub mod convolution;
pub mod error;
pub mod functional;
pub mod par;
pub mod harmonics;
pub mod phase;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
