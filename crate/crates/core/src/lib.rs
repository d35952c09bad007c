//! Low-rank approximations and exact rank decompositions of complex tensors
//! computed from generating polynomials.
//!
//! The pipeline for both symmetric and nonsymmetric tensors is the same:
//! fit a generating matrix by linear least squares, read the decomposition
//! points off a Schur decomposition of a generic combination of the induced
//! multiplication matrices, fit the remaining coefficients by linear least
//! squares and, optionally, polish the result with a damped Gauss-Newton
//! (Levenberg-Marquardt) solve.
//!
//! The crate is `no_std` with `alloc`; disable the default `std` feature to
//! build it for targets without an operating system.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod extract;
pub mod linalg;
pub mod monomial;
pub mod nonsym;
pub mod rank;
pub mod refine;
pub mod sym;
pub mod tensor;

mod options;
mod random;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, PseudoInverse, SchurPair, Svd};
pub use monomial::PowerVector;
pub use nonsym::{approx_nonsym, NsApproxResult};
pub use options::{ApproxOptions, CoordinateChange};
pub use rank::{estimate_rank, SpectrumReport};
pub use refine::{RefineOptions, RefineStatus, SymWeighting};
pub use sym::{approx_sym, SymApproxResult};
pub use tensor::{DenseTensor, MultiLinearMonomial, SymTensor};

/// Double-precision complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
