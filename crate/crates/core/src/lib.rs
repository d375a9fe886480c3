//! Legendre spectral representation of fractional Brownian motion.
//!
//! The kernel `k_H(t, τ)` of the Volterra representation
//! `B_H(t) = ∫ k_H(t, τ) dW(τ)` is expanded in orthonormal shifted Legendre
//! polynomials on `[0, T]`. The resulting matrix `K` yields exact
//! mean-square truncation errors and polynomial sample paths with Gaussian
//! coefficients.

pub mod analysis;
pub mod coeffs;
pub mod error;
pub mod kernel;
pub mod legendre;
pub mod matrix;
pub mod numeric;
pub mod operators;
pub mod oracle;
pub mod persist;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};

/// Book chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/precision.md")]
    mod precision {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/errors.md")]
    mod errors {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/file-format.md")]
    mod file_format {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
