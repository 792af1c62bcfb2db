//! Positive solutions of `phi(u')' + lambda f(u) = 0`, `u(-1) = u(1) = 0`,
//! with `phi(t) = t |t|^(p-2)`: time-map curves, a shooting cross-check,
//! hypothesis checks and non-singularity diagnostics.

// `!(a > b)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod nonlinearity;
pub mod plaplacian;
pub mod poly;
pub mod quadrature;
pub mod report;
mod rk;
pub mod shooting;
pub mod timemap;

pub use error::{Error, InadmissibleReason, Result};
pub use nonlinearity::{HypothesisReport, PolyNonlinearity};
pub use plaplacian::Exponent;
pub use timemap::{Curve, CurvePoint, Profile, TimeMap};
