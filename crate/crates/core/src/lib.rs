//! Birkhoff-style analysis of linear difference and q-difference systems.

pub mod cli;
pub mod difference;
pub mod elliptic;
pub mod error;
pub mod gauge;
pub mod matrix;
pub mod poly;
pub mod qdiff;
pub mod roots;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::{Mat, PolyMat, RationalMat};
pub use poly::LaurentPoly;
pub use scalar::{BigComplex, ExactComplex, Scalar};
