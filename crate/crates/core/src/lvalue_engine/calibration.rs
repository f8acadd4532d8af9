use std::fmt;

use super::{LvalueError, Result};
use crate::sieve::divisor_count;

/// Allowed distance of `√(L√|d|/κ)` from an integer, and of `L√|d|/κ` from a
/// rounding boundary.
pub const DISCRETIZATION_TOLERANCE: f64 = 1e-3;

/// Largest `c` tried for the smallest reference.
const MAX_HYPOTHESIS: u32 = 64;

/// Discriminants sharing one `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassKey {
    All,
    Residue { residue: u8, negative: bool },
}

impl ClassKey {
    pub fn residue_class(d: i64) -> Self {
        ClassKey::Residue { residue: d.rem_euclid(8) as u8, negative: d < 0 }
    }
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKey::All => write!(f, "all"),
            ClassKey::Residue { residue, negative } => {
                write!(f, "d≡{residue} mod 8, {}", if *negative { "d<0" } else { "d>0" })
            }
        }
    }
}

/// Per-class `κ` of `L = κ c² / √|d|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveCalibration {
    pub classes: Vec<(ClassKey, f64)>,
}

impl CurveCalibration {
    pub fn single(kappa: f64) -> Self {
        Self { classes: vec![(ClassKey::All, kappa)] }
    }

    pub fn kappa_for(&self, d: i64) -> Option<f64> {
        let key = ClassKey::residue_class(d);
        self.classes.iter().find(|(k, _)| *k == ClassKey::All || *k == key).map(|&(_, kappa)| kappa)
    }

    pub fn is_single(&self) -> bool {
        matches!(self.classes.as_slice(), [(ClassKey::All, _)])
    }
}

/// `√(q/κ)` within tolerance of an integer for every `q`; returns the integers.
fn snaps(qs: &[f64], kappa: f64) -> Option<Vec<f64>> {
    qs.iter()
        .map(|&q| {
            let s = (q / kappa).sqrt();
            let c = s.round();
            (c >= 1.0 && (s - c).abs() <= DISCRETIZATION_TOLERANCE).then_some(c)
        })
        .collect()
}

fn fit(qs: &[f64]) -> Option<f64> {
    let q_min = qs.iter().copied().fold(f64::INFINITY, f64::min);
    if !(q_min > 0.0 && q_min.is_finite()) {
        return None;
    }
    for m in 1..=MAX_HYPOTHESIS {
        let trial = q_min / f64::from(m * m);
        if let Some(cs) = snaps(qs, trial) {
            // least squares for q = κ c²
            let num: f64 = qs.iter().zip(&cs).map(|(q, c)| q * c * c).sum();
            let den: f64 = cs.iter().map(|c| c.powi(4)).sum();
            let kappa = num / den;
            if snaps(qs, kappa).is_some() {
                return Some(kappa);
            }
        }
    }
    None
}

/// Fits the largest `κ` making every `√(L√|d|/κ)` an integer to within
/// [`DISCRETIZATION_TOLERANCE`]. One `κ` for all references is tried first;
/// on failure the references are split by `d mod 8` and the sign of `d`.
/// References are `(d, L)` pairs with `L > 0`.
pub fn calibrate_kappa(references: &[(i64, f64)]) -> Result<CurveCalibration> {
    let q = |&(d, l): &(i64, f64)| l * (d.unsigned_abs() as f64).sqrt();
    let all: Vec<f64> = references.iter().map(q).collect();
    if all.is_empty() {
        return Err(LvalueError::CalibrationFailure { class: ClassKey::All.to_string() });
    }
    if let Some(kappa) = fit(&all) {
        return Ok(CurveCalibration::single(kappa));
    }
    let mut keys: Vec<ClassKey> = references.iter().map(|&(d, _)| ClassKey::residue_class(d)).collect();
    keys.sort();
    keys.dedup();
    let mut classes = Vec::new();
    for key in keys {
        let qs: Vec<f64> = references.iter().filter(|&&(d, _)| ClassKey::residue_class(d) == key).map(q).collect();
        let kappa = fit(&qs).ok_or(LvalueError::CalibrationFailure { class: key.to_string() })?;
        classes.push((key, kappa));
    }
    Ok(CurveCalibration { classes })
}

/// Number of divisors of `|d|`.
pub fn tau(d: i64) -> u64 {
    divisor_count(d.unsigned_abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretized {
    pub c: u64,
    pub is_zero: bool,
    /// `L√|d|/κ`.
    pub u: f64,
}

/// Snaps a central value to `c = round(√(L√|d|/κ))`.
///
/// The value is declared zero when `c = 0`, or `c < τ(d)` with
/// `tau_refined`. Values within tolerance of a rounding boundary `(m + 1/2)²`
/// are rejected.
pub fn discretize(calibration: &CurveCalibration, d: i64, lvalue: f64, tau_refined: bool) -> Result<Discretized> {
    let kappa = calibration.kappa_for(d).ok_or(LvalueError::Uncalibrated { d })?;
    let u = lvalue.max(0.0) * (d.unsigned_abs() as f64).sqrt() / kappa;
    let nearest = u.sqrt().round();
    for m in [nearest - 1.0, nearest] {
        let boundary = (m + 0.5) * (m + 0.5);
        if m >= 0.0 && (u - boundary).abs() <= DISCRETIZATION_TOLERANCE {
            return Err(LvalueError::Ambiguous { d, u, boundary });
        }
    }
    let c = nearest as u64;
    let threshold = if tau_refined { tau(d) } else { 1 };
    Ok(Discretized { c, is_zero: c < threshold, u })
}
