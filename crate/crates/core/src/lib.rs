//! # cqexp-core
//!
//! Auxiliary function `E₀(s, P)`, random-coding and sphere-packing exponents
//! for classical and classical-quantum channels, together with seeded
//! numerical suites for the operator inequalities behind the concavity of
//! `E₀` in `s`.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`matops`] | Hermitian matrices, Jacobi eigensolver, matrix functions, Löwner order, Ky Fan norms, random generators |
//! | [`geomean`] | Weighted geometric mean `A #_s B` and its ε-regularized extension |
//! | [`majorization`] | Weak majorization and weak log-majorization verdicts |
//! | [`channel`] | Channel models, `E₀`, `f(t)`, derivatives, input optimization, exponents |
//! | [`verifier`] | Randomized inequality suites producing [`verifier::InequalityReport`]s |
//!
//! All logarithms reported to callers are base 2 (bits).

#![forbid(unsafe_code)]

pub mod channel;
pub mod error;
pub mod geomean;
pub mod majorization;
pub mod matops;
pub mod verifier;

pub use error::{Error, Result};
pub use matops::Tolerances;
