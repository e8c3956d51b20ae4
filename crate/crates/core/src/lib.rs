//! Exact random assignment.
//!
//! Computes assignment matrices with probabilistic serial and random priority,
//! decomposes bistochastic matrices into lotteries over deterministic
//! assignments (including decompositions that keep pairwise envy at most 1/2),
//! and decides stochastic-dominance envy-freeness, decomposition
//! envy-freeness, EF-decomposability and related efficiency notions with an
//! exact rational simplex solver.
//!
//! All numerics are exact. Algorithms are generic over [`Scalar`]; the
//! aliases below fix the default arbitrary-precision rational.

pub mod decompose;
pub mod error;
pub mod exactlp;
pub mod instance;
pub mod io;
pub mod lottery;
pub mod matching;
pub mod matrix;
pub mod oracles;
pub mod properties;
pub mod rules;
pub mod scalar;
pub mod search;

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::BigRational;
/// Fixed-width rational for callers that can bound denominators.
pub type Rational64 = num_rational::Ratio<i64>;

pub type Matrix = matrix::AssignmentMatrix<Rational>;
pub type RationalLottery = lottery::Lottery<Rational>;
pub type LinearProgram = exactlp::LinearProgram<Rational>;

pub use error::{Error, Precondition, Result};
pub use instance::{DeterministicAssignment, Instance};
pub use lottery::{envies, envy_matrix, is_dec_ef, matrix_of, EnvyMatrix, Lottery};
pub use matrix::{validate_matrix, AssignmentMatrix, MatrixDefect};
pub use scalar::Scalar;
