//! Hahn difference operator `D_{q,c} g(z) = (g(qz + c) - g(z)) / ((q - 1) z + c)`
//! and the Nevanlinna functionals built on top of it, evaluated on rational
//! functions and truncated power series where every quantity is computable.
//!
//! Module map:
//! - [`qcore`]: q-integers, q-Pochhammer symbols, Gaussian binomials, the
//!   affine orbit `σ(z) = qz + c`.
//! - [`cpoly`]: dense complex polynomials and root finding with multiplicity.
//! - [`ratfun`]: normalized rational functions.
//! - [`hahn`]: the operator, its iterates and the reciprocal identity.
//! - [`heq`]: power series at the fixed point and linear Hahn equations.
//! - [`nevan`]: proximity, counting and characteristic functions.
//! - [`verify`]: checks of the value-distribution inequalities.
//! - [`parse`]: text grammar for rational functions.
//! - [`suite`]: the fixed regression suite and seeded random generators.

pub mod cpoly;
pub mod error;
pub mod hahn;
pub mod heq;
pub mod nevan;
pub mod parse;
pub mod qcore;
pub mod ratfun;
pub mod suite;
pub mod verify;

pub use num_complex::Complex64;

pub use cpoly::{Poly, PointMult, DEFAULT_CLUSTER_TOL};
pub use error::{Error, Result};
pub use hahn::{hahn_diff, hahn_expand, hahn_iter, hahn_reciprocal};
pub use heq::{heq_residual, heq_solve, series_hahn, Candidate, PowerSeries};
pub use nevan::{Grid, NevOptions, NevRow, NevTable};
pub use parse::{format_expr, parse_complex, parse_expr, parse_target, ParseError};
pub use qcore::HahnParams;
pub use ratfun::{RatFun, Target, Value};
pub use verify::{CheckReport, CheckRow, Verdict};
