//! Central values `L_E(1/2, χ_d)` of quadratic twists and their
//! discretization `L = κ c² / √|d|`.

mod calibration;
mod import;
mod scan;
mod series;
mod theta;

pub use calibration::{
    calibrate_kappa, discretize, tau, ClassKey, CurveCalibration, Discretized, DISCRETIZATION_TOLERANCE,
};
pub use import::{parse_coefficient_file, CoefficientFile};
pub use scan::{scan, scan_discriminants, series_table_length, Engine, ScanOptions, ScanOutput, TwistRecord};
pub use series::{terms_needed, twist_sign, SeriesEngine, DEFAULT_EPSILON, FE_DELTA};
pub use theta::{theta_coefficients_batch, TernaryForm, ThetaTable, ThetaWiring, DEFAULT_MEMORY_BUDGET};

use thiserror::Error;

use crate::curve_arithmetic::CurveError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LvalueError {
    #[error("d = {d} shares a factor with the conductor {conductor}")]
    NotCoprime { d: i64, conductor: u64 },
    #[error("{d} is not a fundamental discriminant")]
    NotFundamental { d: i64 },
    #[error("twist by d = {d} has odd sign; its central value vanishes identically")]
    OddSign { d: i64 },
    #[error("|d| = {abs} exceeds the engine range {max}")]
    OutOfRange { abs: u64, max: u64 },
    #[error("series tail bound cannot reach {epsilon:e} within {max_terms} terms")]
    TailBound { epsilon: f64, max_terms: usize },
    #[error("theta table for T = {t} needs {needed} bytes, budget is {budget}")]
    MemoryBudget { t: u64, needed: u64, budget: u64 },
    #[error("no κ discretizes the references of class {class}")]
    CalibrationFailure { class: String },
    #[error("no calibration class covers d = {d}")]
    Uncalibrated { d: i64 },
    #[error("d = {d}: L√|d|/κ = {u} lies within tolerance of the rounding boundary {boundary}")]
    Ambiguous { d: i64, u: f64, boundary: f64 },
    #[error("engine {engine} cannot evaluate d = {d}: {reason}")]
    Unsupported { engine: &'static str, d: i64, reason: String },
    #[error("coefficient file line {line}: {reason}")]
    Import { line: usize, reason: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

pub type Result<T> = std::result::Result<T, LvalueError>;
