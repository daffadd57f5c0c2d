//! Exact computations in Chow rings of G-Zip stacks.
//!
//! The arithmetic layer is generic over [`scalar::Field`]; the main
//! computations run over [`ScalarP`], rational functions in `p` with rational
//! coefficients.

pub mod azip;
pub mod chevalley;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod poly;
pub mod ratfunc;
pub mod ring;
pub mod scalar;
pub mod strata;
pub mod weyl;

pub use error::{Error, Result};

pub type Rational = num_rational::BigRational;
/// Rational functions in the indeterminate `p`.
pub type ScalarP = ratfunc::RatFunc<Rational>;
pub type PolyP = poly::Poly<Rational>;
