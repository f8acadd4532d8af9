use std::sync::Arc;

use rayon::prelude::*;

use super::calibration::{tau, ClassKey};
use super::{
    calibrate_kappa, discretize, theta_coefficients_batch, twist_sign, CoefficientFile, CurveCalibration, LvalueError,
    Result, SeriesEngine, ThetaWiring, DEFAULT_EPSILON, DEFAULT_MEMORY_BUDGET, DISCRETIZATION_TOLERANCE,
};
use crate::curve_arithmetic::{fundamental_discriminants, CoefficientTable, DiscriminantFilter, EllipticCurveData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Series,
    Theta,
    Import,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Series => "series",
            Engine::Theta => "theta",
            Engine::Import => "import",
        }
    }
}

/// One twist of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistRecord {
    pub d: i64,
    pub sign: i8,
    pub lvalue: f64,
    pub c: u64,
    pub is_zero: bool,
}

impl TwistRecord {
    pub const CSV_HEADER: &'static str = "d,sign,lvalue,c,is_zero";

    pub fn to_csv_row(&self) -> String {
        format!("{},{},{:e},{},{}", self.d, self.sign, self.lvalue, self.c, self.is_zero)
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub dmin: u64,
    pub dmax: u64,
    /// Sign, parity, primality and character constraints. Discriminants
    /// sharing a factor with the conductor are always skipped.
    pub filter: DiscriminantFilter,
    pub even_sign_only: bool,
    pub engine: Engine,
    pub epsilon: f64,
    /// Zero when `c < τ(d)`. Meaningful only when `c` is in the
    /// normalization of the half-integral weight form: the theta and import
    /// engines, or the series engine with an explicit `kappa`.
    pub tau_refined: bool,
    /// Reference twists for κ have `|d| ≤ calibration_dmax`.
    pub calibration_dmax: u64,
    /// Skips calibration and uses this κ for every class.
    pub kappa: Option<f64>,
    pub theta_wiring: ThetaWiring,
    pub memory_budget: u64,
    pub import: Option<CoefficientFile>,
    /// Precomputed `a_n`; used by the series engine when long enough.
    pub coefficients: Option<Arc<CoefficientTable>>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            dmin: 1,
            dmax: 1000,
            filter: DiscriminantFilter::default(),
            even_sign_only: true,
            engine: Engine::Series,
            epsilon: DEFAULT_EPSILON,
            tau_refined: false,
            calibration_dmax: 1500,
            kappa: None,
            theta_wiring: ThetaWiring::default(),
            memory_budget: DEFAULT_MEMORY_BUDGET,
            import: None,
            coefficients: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub records: Vec<TwistRecord>,
    pub calibration: CurveCalibration,
}

/// Central values below this are not used as calibration references.
const REFERENCE_FLOOR: f64 = 1e-6;

fn is_congruent_number_curve(curve: &EllipticCurveData) -> bool {
    curve.ainvs == [0, 0, 0, -1, 0] && curve.conductor == 32
}

/// Discriminants of the scan in output order.
pub fn scan_discriminants(curve: &EllipticCurveData, options: &ScanOptions) -> Vec<i64> {
    let mut filter = options.filter.clone();
    filter.coprime_to = curve.conductor;
    if options.even_sign_only {
        filter.even_sign_for = Some(curve.clone());
    }
    fundamental_discriminants(options.dmin, options.dmax, &filter)
}

/// Even-sign reference values `(d, L)` with the scan's sign and parity filters.
fn reference_values(
    curve: &EllipticCurveData,
    options: &ScanOptions,
    engine: &SeriesEngine,
) -> Result<Vec<(i64, f64)>> {
    let filter = DiscriminantFilter {
        sign: options.filter.sign,
        parity: options.filter.parity,
        coprime_to: curve.conductor,
        even_sign_for: Some(curve.clone()),
        ..Default::default()
    };
    let ds = fundamental_discriminants(1, options.calibration_dmax, &filter);
    let values: Vec<f64> = ds.par_iter().map(|&d| engine.central_value(d)).collect::<Result<_>>()?;
    Ok(ds.into_iter().zip(values).filter(|&(_, l)| l > REFERENCE_FLOOR).collect())
}

/// `κ` for externally supplied integers `c`: least squares of `L√|d| = κ c²`
/// over references with `c ≠ 0`, rejected unless every reference snaps.
fn fit_known_coefficients(pairs: &[(i64, f64, i64)], class: &str) -> Result<f64> {
    let used: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(_, _, c)| *c != 0)
        .map(|&(d, l, c)| (l * (d.unsigned_abs() as f64).sqrt(), (c * c) as f64))
        .collect();
    let num: f64 = used.iter().map(|(q, c2)| q * c2).sum();
    let den: f64 = used.iter().map(|(_, c2)| c2 * c2).sum();
    let kappa = num / den;
    let consistent = kappa > 0.0
        && pairs.iter().all(|&(d, l, c)| {
            let s = (l.max(0.0) * (d.unsigned_abs() as f64).sqrt() / kappa).sqrt();
            (s - c.unsigned_abs() as f64).abs() <= DISCRETIZATION_TOLERANCE
        });
    if consistent {
        Ok(kappa)
    } else {
        Err(LvalueError::CalibrationFailure { class: class.into() })
    }
}

fn odd_sign_record(d: i64, sign: i32) -> TwistRecord {
    TwistRecord { d, sign: sign as i8, lvalue: 0.0, c: 0, is_zero: true }
}

/// Largest `|d|` the series engine must cover, if it is needed at all.
fn series_range(options: &ScanOptions) -> Option<u64> {
    match options.engine {
        Engine::Series => Some(options.dmax.max(if options.kappa.is_none() { options.calibration_dmax } else { 1 })),
        _ if options.kappa.is_none() => Some(options.calibration_dmax),
        _ => None,
    }
}

/// Number of `a_n` a scan's series engine needs; 0 when it needs none.
pub fn series_table_length(curve: &EllipticCurveData, options: &ScanOptions) -> usize {
    series_range(options).map_or(0, |dmax| SeriesEngine::table_length(curve, dmax, options.epsilon))
}

/// Evaluates every discriminant of the scan with the chosen engine.
pub fn scan(curve: &EllipticCurveData, options: &ScanOptions) -> Result<ScanOutput> {
    let ds = scan_discriminants(curve, options);
    let series = match series_range(options) {
        Some(dmax) => Some(match &options.coefficients {
            Some(table) if table.curve == *curve && table.limit() >= series_table_length(curve, options) => {
                SeriesEngine::from_table(table, dmax, options.epsilon)?
            }
            _ => SeriesEngine::new(curve, dmax, options.epsilon)?,
        }),
        None => None,
    };

    match options.engine {
        Engine::Series => {
            let engine = series.as_ref().expect("series engine");
            let calibration = match options.kappa {
                Some(k) => CurveCalibration::single(k),
                None => calibrate_kappa(&reference_values(curve, options, engine)?)?,
            };
            let records = ds
                .par_iter()
                .map(|&d| {
                    let sign = twist_sign(curve, d)?;
                    if sign != 1 {
                        return Ok(odd_sign_record(d, sign));
                    }
                    let l = engine.central_value(d)?;
                    let snapped = discretize(&calibration, d, l, options.tau_refined)?;
                    Ok(TwistRecord { d, sign: 1, lvalue: l, c: snapped.c, is_zero: snapped.is_zero })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScanOutput { records, calibration })
        }
        Engine::Theta | Engine::Import => {
            let lookup: Box<dyn Fn(i64) -> Result<i64> + Sync> = if options.engine == Engine::Theta {
                if !is_congruent_number_curve(curve) {
                    return Err(LvalueError::Unsupported {
                        engine: "theta",
                        d: 0,
                        reason: format!("no ternary-form wiring for curve {}", curve.label),
                    });
                }
                let t = options.dmax.max(options.calibration_dmax);
                let table = theta_coefficients_batch(&options.theta_wiring, t, options.memory_budget)?;
                Box::new(move |d: i64| {
                    table.get(d.unsigned_abs()).ok_or_else(|| LvalueError::Unsupported {
                        engine: "theta",
                        d,
                        reason: "only odd discriminants are wired".into(),
                    })
                })
            } else {
                let file = options.import.clone().ok_or_else(|| LvalueError::Unsupported {
                    engine: "import",
                    d: 0,
                    reason: "no coefficient file given".into(),
                })?;
                Box::new(move |d: i64| {
                    file.get(d.unsigned_abs()).ok_or_else(|| LvalueError::Unsupported {
                        engine: "import",
                        d,
                        reason: "missing from coefficient file".into(),
                    })
                })
            };
            let kappa = match options.kappa {
                Some(k) => k,
                None => {
                    let engine = series.as_ref().expect("series engine");
                    let refs = reference_values(curve, options, engine)?;
                    let pairs = refs
                        .iter()
                        .filter(|&&(d, _)| lookup(d).is_ok())
                        .map(|&(d, l)| Ok((d, l, lookup(d)?)))
                        .collect::<Result<Vec<_>>>()?;
                    fit_known_coefficients(&pairs, &ClassKey::All.to_string())?
                }
            };
            let records = ds
                .par_iter()
                .map(|&d| {
                    let sign = twist_sign(curve, d)?;
                    if sign != 1 {
                        return Ok(odd_sign_record(d, sign));
                    }
                    let c = lookup(d)?.unsigned_abs();
                    let l = kappa * (c * c) as f64 / (d.unsigned_abs() as f64).sqrt();
                    let threshold = if options.tau_refined { tau(d) } else { 1 };
                    Ok(TwistRecord { d, sign: 1, lvalue: l, c, is_zero: c < threshold })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScanOutput { records, calibration: CurveCalibration::single(kappa) })
        }
    }
}
