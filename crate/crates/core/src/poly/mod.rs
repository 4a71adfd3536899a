//! Exact coefficient fields and sparse multivariate polynomials.

mod coefficient;
pub mod float;
mod gcd;
mod monomial;
mod parse;
mod polynomial;
mod sample;

pub use coefficient::{
    exact_isqrt, is_square_free, parse_rational, rational_to_string, Coefficient, Field,
};
pub use float::FloatPoly;
pub use monomial::Monomial;
pub use parse::{parse, ParseError};
pub use polynomial::{GradedDecomposition, Polynomial};
pub use sample::{sample_points, sign_change_witness, SamplerConfig, SignChange};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("variable index {index} out of range for n = {n}")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("radicand {0} is not a square-free integer > 1")]
    InvalidRadicand(u64),
    #[error("surd coefficient in the rational field")]
    SurdInRationalField,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("gcd of two zero polynomials is undefined")]
    GcdOfZeros,
    #[error("gcd is only available over the rationals")]
    GcdNeedsRationalField,
    #[error("the ambient dimension must be at least 1")]
    ZeroDimension,
}
