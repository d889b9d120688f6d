//! Spectral toolkit for symmetrizable matrices.
//!
//! A real square matrix `A` is symmetrizable when a positive diagonal `D`
//! exists with `D·A` symmetric. Such matrices are diagonally similar to a
//! symmetric matrix, so their spectra are real and interlace with the spectra
//! of their principal submatrices. This crate detects symmetrizability,
//! builds the symmetrizer, computes spectra, and emits checkable certificates
//! for the determinant identities behind the interlacing property.
//!
//! Two scalar regimes are supported: exact rationals ([`Rational`]) for
//! algebraic identities and `f64` for eigenvalue work. Every index accepted
//! or reported by the public API is 1-based.

pub mod cli;
pub mod determinants;
pub mod error;
pub mod generators;
pub mod io;
pub mod matrix;
pub mod poly;
pub mod scalar;
pub mod spectra;
pub mod symmetrizability;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, IndexSelection, Matrix};
pub use scalar::{Rational, Regime, Scalar};
