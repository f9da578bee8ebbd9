//! Exact coefficient engine for unitarily invariant kernels on the unit ball.
//!
//! A kernel `k(z, w) = Σ a_n ⟨z, w⟩^n` is stored as the exact rational series
//! `(a_n)` truncated at a degree `N`. From it the crate derives the complete
//! Nevanlinna-Pick data `1 - 1/k = Σ b_n t^n`, the monomial coefficients
//! `a_α`, `b_α`, and the action of linear functionals (given by their values
//! on monomials) on kernel functions, inverse kernel functions and powers.
//! The [`verify`] module checks the kernel-function criteria for
//! multiplicativity against a brute-force oracle and against the exact
//! coefficient identities obtained by comparing power series in `w̄`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod functional;
pub mod kernel;
pub mod poly;
pub mod samples;
pub mod scalar;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use functional::{Functional, TensorFunctional};
pub use kernel::{CnpData, Kernel, TensorKernel};
pub use scalar::{Exact, Mode, Scalar};
pub use series::{Composition, MultiIndex, Rational, RationalSeries};
