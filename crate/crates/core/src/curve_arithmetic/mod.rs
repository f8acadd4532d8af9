//! Elliptic curves over Q, their Hecke coefficients, quadratic characters,
//! fundamental discriminants and the arithmetic factor of the moment
//! conjecture.

mod coefficients;
mod curves;
mod discriminants;
mod euler;
mod kronecker;
mod point_count;

pub use coefficients::{an_table, ap_table, CoefficientTable};
pub use curves::{builtin_curves, CurveEntry, CurveRegistry, EllipticCurveData};
pub use discriminants::{
    fundamental_discriminants, is_fundamental_discriminant, DiscriminantFilter, Parity, SignFilter,
};
pub use euler::{arithmetic_factor_ak, local_factor, ArithmeticFactor};
pub use kronecker::kronecker;
pub use point_count::{ap_bsgs, ap_naive, ap_point_count};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("curve {label}: singular Weierstrass model")]
    Singular { label: String },
    #[error("curve {label}: root number must be +1 or -1, got {value}")]
    InvalidRootNumber { label: String, value: i64 },
    #[error("curve {label}: conductor must be positive")]
    InvalidConductor { label: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("curve {label} has bad reduction at {p}")]
    BadReduction { label: String, p: u64 },
    #[error("unknown curve label {0}")]
    UnknownCurve(String),
    #[error("registry: {0}")]
    Registry(String),
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, CurveError>;
