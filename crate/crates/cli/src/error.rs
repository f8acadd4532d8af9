use std::fmt;

use rmtwist::curve_arithmetic::CurveError;
use rmtwist::lvalue_engine::LvalueError;
use rmtwist::rmt_moments::MomentError;
use rmtwist::rmt_sampler::SamplerError;
use rmtwist::statistics_reports::ReportError;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Insufficient(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Insufficient(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Insufficient(m) => write!(f, "insufficient data: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::UnknownCurve(_)
            | CurveError::Registry(_)
            | CurveError::BadReduction { .. }
            | CurveError::NotPrime(_)
            | CurveError::Singular { .. }
            | CurveError::InvalidRootNumber { .. }
            | CurveError::InvalidConductor { .. }
            | CurveError::Domain(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<LvalueError> for CliError {
    fn from(e: LvalueError) -> Self {
        match e {
            LvalueError::Curve(c) => c.into(),
            LvalueError::NotCoprime { .. }
            | LvalueError::NotFundamental { .. }
            | LvalueError::OddSign { .. }
            | LvalueError::OutOfRange { .. }
            | LvalueError::Unsupported { .. }
            | LvalueError::Import { .. } => CliError::Usage(e.to_string()),
            LvalueError::TailBound { .. }
            | LvalueError::MemoryBudget { .. }
            | LvalueError::CalibrationFailure { .. }
            | LvalueError::Uncalibrated { .. }
            | LvalueError::Ambiguous { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::InvalidDimension | MomentError::Pole { .. } | MomentError::Domain(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::InvalidCutoff(_) | ReportError::Domain(_) => CliError::Usage(e.to_string()),
            ReportError::EmptyFamily(_) => CliError::Insufficient(e.to_string()),
            ReportError::Curve(c) => c.into(),
            ReportError::Lvalue(l) => l.into(),
            ReportError::Moments(m) => m.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
