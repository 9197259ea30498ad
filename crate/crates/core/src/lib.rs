//! Free noncommutative function theory over operator balls: matrix free
//! polynomials and rational expressions, monic linear pencils, Higman-style
//! linearization, state-space realizations, and norm-bound ledgers with
//! stability and cyclicity harnesses.

pub mod error;
pub mod freepoly;
pub mod gallery;
pub mod linalg;
pub mod linearize;
pub mod ncball;
pub mod ngn;
pub mod pencil;
pub mod ratexpr;
pub mod realization;

pub use error::{Error, Result};
pub use freepoly::{MatPoly, MatrixTuple, Word};
pub use linalg::CMatrix;
