//! Exact polynomial toolkit for the minimal surface equation.
//!
//! The crate is organised bottom-up:
//!
//! * [`poly`]: coefficient fields, sparse multivariate polynomials, calculus,
//!   grading, GCD and the text grammar.
//! * [`ops`]: the operator `L`, the MSE residual, its graded system, the
//!   linearisation `DL`, eigen-relations and level-set mean curvature.
//! * [`structure`]: checks on leading terms presented as `p^k * Q`.
//! * [`bounds`]: exact surd arithmetic for degree windows and decay exponents.
//! * [`isoparametric`]: Cartan–Münzner identities, the isoparametric catalog
//!   and the Diophantine exclusion cases.
//! * [`blowdown`]: translated blow-downs and numerical level-set geometry.
//! * [`search`]: least-squares coefficient search over polynomial ansätze.

pub mod blowdown;
pub mod bounds;
pub mod fixtures;
pub mod isoparametric;
pub mod ops;
pub mod poly;
pub mod report;
pub mod search;
pub mod structure;

pub use poly::{Coefficient, Field, Monomial, ParseError, PolyError, Polynomial};
