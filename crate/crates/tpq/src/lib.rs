//! Exact symbolic verification of twisted Poisson geometry on coordinate
//! charts: brackets and differentials of multivector calculus, twisted
//! Poisson and prequantization conditions, the finite-dimensional Lie-algebra
//! model of the prequantization equation, and polarized quantization checks.
//!
//! Everything is computed over the Gaussian rationals with opaque smooth
//! functions as free differential indeterminates; no floating point enters
//! any identity check.

pub mod chart;
pub mod cli;
pub mod corpus;
pub mod expr;
pub mod gauss;
pub mod geom;
pub mod liealg;
pub mod linalg;
pub mod prequant;
pub mod quant;
pub mod report;
pub mod structure;

pub use chart::{ChartError, ChartSignature};
pub use expr::{parse_expr, Expr, ExprError, ParseError};
pub use gauss::GaussRat;
