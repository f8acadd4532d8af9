//! Observables of a twist family: counts of vanishing central values and
//! their predicted growth, the `R_p` and `Q_p` ratios, family moments, and
//! value histograms against the orthogonal density.
//!
//! Everything here consumes the records of a finished scan and is
//! single-threaded, so identical records always give identical reports.

use std::fmt::Write as _;

use thiserror::Error;

use crate::curve_arithmetic::{ap_point_count, arithmetic_factor_ak, kronecker, CurveError, EllipticCurveData};
use crate::lvalue_engine::{scan, LvalueError, ScanOptions, ScanOutput, TwistRecord};
use crate::rmt_moments::{g_k_barnes, h_small_x, moment_so_even_real, DensityOptions, MomentError, ValueDensity};
use crate::sieve::is_prime;

/// Reports with fewer vanishing twists than this carry [`Flag::InsufficientData`].
pub const MIN_VANISHING: usize = 10;

/// Bins with fewer expected counts are left out of histogram comparisons.
pub const BULK_MIN_EXPECTED: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("T must be at least 3, got {0}")]
    InvalidCutoff(u64),
    #[error("no twists in the family up to T = {0}")]
    EmptyFamily(u64),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Lvalue(#[from] LvalueError),
    #[error(transparent)]
    Moments(#[from] MomentError),
}

pub type Result<T> = std::result::Result<T, ReportError>;

/// Conditions attached to a report instead of failing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flag {
    /// Fewer than [`MIN_VANISHING`] vanishing twists.
    InsufficientData,
    /// The ratio's denominator class is empty.
    ZeroDenominator,
    /// Every even-sign twist has `χ_d(p) = −1`, so the numerator is empty by
    /// construction.
    FamilyForcesCharacter,
}

impl Flag {
    pub fn name(&self) -> &'static str {
        match self {
            Flag::InsufficientData => "insufficient-data",
            Flag::ZeroDenominator => "zero-denominator",
            Flag::FamilyForcesCharacter => "family-forces-character",
        }
    }
}

/// A curve, a discriminant cutoff `T = options.dmax` and the scan settings.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub curve: EllipticCurveData,
    pub options: ScanOptions,
}

impl ScanConfig {
    pub fn t(&self) -> u64 {
        self.options.dmax
    }

    pub fn validate(&self) -> Result<()> {
        if self.t() < 3 {
            return Err(ReportError::InvalidCutoff(self.t()));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<ScanOutput> {
        self.validate()?;
        Ok(scan(&self.curve, &self.options)?)
    }
}

/// `N = round(ln T)`.
pub fn n_from_t(t: u64) -> Result<u32> {
    if t < 3 {
        return Err(ReportError::InvalidCutoff(t));
    }
    Ok((t as f64).ln().round() as u32)
}

fn in_family(r: &TwistRecord, t: u64) -> bool {
    r.sign == 1 && r.d.unsigned_abs() <= t
}

/// Even-sign twists with `|d| ≤ t` whose central value is zero.
pub fn vanishing_count(records: &[TwistRecord], t: u64) -> usize {
    records.iter().filter(|r| in_family(r, t) && r.is_zero).count()
}

/// Scans and counts in one step.
pub fn vanishing_count_scan(config: &ScanConfig) -> Result<usize> {
    Ok(vanishing_count(&config.run()?.records, config.t()))
}

/// One grid point of a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub t: u64,
    pub value: f64,
    pub predicted: f64,
}

impl ReportRow {
    pub fn ratio(&self) -> f64 {
        if self.predicted == 0.0 {
            0.0
        } else {
            self.value / self.predicted
        }
    }
}

/// A named observable over an ascending grid of cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRecord {
    pub observable: String,
    pub rows: Vec<ReportRow>,
    pub fitted: Vec<(String, f64)>,
    pub flags: Vec<Flag>,
}

impl ReportRecord {
    pub const CSV_HEADER: &'static str = "T,value,predicted,ratio";

    fn new(observable: &str) -> Self {
        Self { observable: observable.into(), rows: Vec::new(), fitted: Vec::new(), flags: Vec::new() }
    }

    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn fitted(&self, name: &str) -> Option<f64> {
        self.fitted.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(ReportRow::ratio).collect()
    }

    /// Rows as CSV, preceded by `#` lines for fitted constants and flags.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# observable {}", self.observable).unwrap();
        for (name, value) in &self.fitted {
            writeln!(out, "# fitted {name} {value:e}").unwrap();
        }
        for flag in &self.flags {
            writeln!(out, "# flag {}", flag.name()).unwrap();
        }
        writeln!(out, "{}", Self::CSV_HEADER).unwrap();
        for row in &self.rows {
            writeln!(out, "{},{:e},{:e},{:e}", row.t, row.value, row.predicted, row.ratio()).unwrap();
        }
        out
    }
}

fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ReportError::Domain("T-grid must be non-empty and strictly ascending".into()));
    }
    if grid[0] < 3 {
        return Err(ReportError::InvalidCutoff(grid[0]));
    }
    Ok(())
}

/// `t_max · i / points` for `i = 1..=points`, dropping values below 3.
pub fn linear_grid(t_max: u64, points: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (1..=points).map(|i| t_max * i / points).filter(|&t| t >= 3).collect();
    grid.dedup();
    grid
}

/// `t_max, t_max/2, t_max/4, …` down to `t_min`, ascending.
pub fn doubling_grid(t_min: u64, t_max: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut t = t_max;
    while t >= t_min.max(3) {
        grid.push(t);
        t /= 2;
    }
    grid.reverse();
    grid
}

/// Vanishing counts at every grid point in one pass over the records.
fn cumulative_counts(records: &[TwistRecord], grid: &[u64], keep: impl Fn(&TwistRecord) -> bool) -> Vec<usize> {
    let mut abs: Vec<u64> =
        records.iter().filter(|r| r.sign == 1 && r.is_zero && keep(r)).map(|r| r.d.unsigned_abs()).collect();
    abs.sort_unstable();
    grid.iter().map(|&t| abs.partition_point(|&a| a <= t)).collect()
}

/// Mean ratio over grid points with `T ≥ T_max / 10`.
fn top_decade_mean(rows: &[ReportRow]) -> f64 {
    let t_max = rows.last().map_or(0, |r| r.t);
    let top: Vec<f64> = rows.iter().filter(|r| r.t * 10 >= t_max).map(ReportRow::ratio).collect();
    top.iter().sum::<f64>() / top.len() as f64
}

/// Vanishing count over `T^{3/4} (ln T)^{−5/8}` on the grid, with `c_E` fitted
/// as the mean ratio over the top decade of `T`.
pub fn conjecture1_ratio(records: &[TwistRecord], grid: &[u64], prime_only: bool) -> Result<ReportRecord> {
    check_grid(grid)?;
    let counts = cumulative_counts(records, grid, |r| !prime_only || is_prime(r.d.unsigned_abs()));
    let mut report = ReportRecord::new("conj1");
    for (&t, &count) in grid.iter().zip(&counts) {
        let tf = t as f64;
        report.rows.push(ReportRow { t, value: count as f64, predicted: tf.powf(0.75) * tf.ln().powf(-0.625) });
    }
    report.fitted.push(("c_E".into(), top_decade_mean(&report.rows)));
    if counts.last().copied().unwrap_or(0) < MIN_VANISHING {
        report.flags.push(Flag::InsufficientData);
    }
    Ok(report)
}

/// Constants entering the unrefined vanishing-count prediction
/// `(8/3) √κ a_{−1/2} T* T^{−1/4} h(N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq23Constants {
    pub kappa: f64,
    pub a_minus_half: f64,
}

/// All-`d` vanishing counts against their predicted order of growth.
///
/// With `tau_refined` the prediction is `T^{3/4} (ln T)^{11/8}`. Otherwise it
/// is `(8/3) √κ a_{−1/2} T* T^{−1/4} h(N)` with `T*` the family size up to
/// `T` and `N = n_from_t(T)`. Only the flatness of the ratio is meaningful;
/// the absolute constant is not asserted anywhere.
pub fn eq23_scaling(
    records: &[TwistRecord],
    grid: &[u64],
    tau_refined: bool,
    constants: Eq23Constants,
) -> Result<ReportRecord> {
    check_grid(grid)?;
    let counts = cumulative_counts(records, grid, |_| true);
    let mut family: Vec<u64> = records.iter().filter(|r| r.sign == 1).map(|r| r.d.unsigned_abs()).collect();
    family.sort_unstable();
    let mut report = ReportRecord::new(if tau_refined { "eq23-tau" } else { "eq23" });
    for (&t, &count) in grid.iter().zip(&counts) {
        let tf = t as f64;
        let predicted = if tau_refined {
            tf.powf(0.75) * tf.ln().powf(11.0 / 8.0)
        } else {
            let t_star = family.partition_point(|&a| a <= t) as f64;
            let h = h_small_x(n_from_t(t)?)?;
            8.0 / 3.0 * constants.kappa.sqrt() * constants.a_minus_half * t_star * tf.powf(-0.25) * h
        };
        report.rows.push(ReportRow { t, value: count as f64, predicted });
    }
    report.fitted.push(("b_E".into(), top_decade_mean(&report.rows)));
    if counts.last().copied().unwrap_or(0) < MIN_VANISHING {
        report.flags.push(Flag::InsufficientData);
    }
    Ok(report)
}

/// A ratio of two class statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRatio {
    /// `None` when the denominator is zero.
    pub value: Option<f64>,
    pub numerator: f64,
    pub denominator: f64,
    pub numerator_size: usize,
    pub denominator_size: usize,
    pub flags: Vec<Flag>,
}

impl ClassRatio {
    fn new(numerator: f64, denominator: f64, sizes: (usize, usize)) -> Self {
        let mut flags = Vec::new();
        if denominator == 0.0 {
            flags.push(Flag::ZeroDenominator);
        }
        if sizes.0 == 0 && sizes.1 > 0 {
            flags.push(Flag::FamilyForcesCharacter);
        }
        Self {
            value: (denominator != 0.0).then(|| numerator / denominator),
            numerator,
            denominator,
            numerator_size: sizes.0,
            denominator_size: sizes.1,
            flags,
        }
    }
}

fn class_of(r: &TwistRecord, p: u64) -> i32 {
    kronecker(r.d, p as i64)
}

/// Vanishing even-sign twists with `χ_d(p) = +1` over those with `χ_d(p) = −1`.
pub fn rp_ratio(records: &[TwistRecord], p: u64, t: u64) -> ClassRatio {
    let (mut num, mut den, mut sizes) = (0usize, 0usize, (0usize, 0usize));
    for r in records.iter().filter(|r| in_family(r, t)) {
        match class_of(r, p) {
            1 => {
                sizes.0 += 1;
                num += usize::from(r.is_zero);
            }
            -1 => {
                sizes.1 += 1;
                den += usize::from(r.is_zero);
            }
            _ => {}
        }
    }
    ClassRatio::new(num as f64, den as f64, sizes)
}

fn good_ap(curve: &EllipticCurveData, p: u64) -> Result<f64> {
    if !curve.has_good_reduction(p) {
        return Err(CurveError::BadReduction { label: curve.label.clone(), p }.into());
    }
    Ok(ap_point_count(curve, p)? as f64)
}

/// `√((p + 1 − a_p) / (p + 1 + a_p))`.
pub fn rp_conjectured(curve: &EllipticCurveData, p: u64) -> Result<f64> {
    qp_conjectured(curve, p, -0.5)
}

/// `Σ L^k` over even-sign twists with `χ_d(p) = +1`, over the same with
/// `χ_d(p) = −1`. Zero values are left out for `k < 0`; for `k = 0` the sums
/// are class sizes.
pub fn qp_ratio(records: &[TwistRecord], p: u64, k: f64, t: u64) -> ClassRatio {
    let (mut num, mut den, mut sizes) = (0.0, 0.0, (0usize, 0usize));
    for r in records.iter().filter(|r| in_family(r, t)) {
        let term = if k == 0.0 {
            1.0
        } else if r.is_zero {
            if k < 0.0 {
                continue;
            }
            0.0
        } else {
            r.lvalue.max(0.0).powf(k)
        };
        match class_of(r, p) {
            1 => {
                sizes.0 += 1;
                num += term;
            }
            -1 => {
                sizes.1 += 1;
                den += term;
            }
            _ => {}
        }
    }
    ClassRatio::new(num, den, sizes)
}

/// `((p + 1 + a_p) / (p + 1 − a_p))^k`.
pub fn qp_conjectured(curve: &EllipticCurveData, p: u64, k: f64) -> Result<f64> {
    let a = good_ap(curve, p)?;
    let q = p as f64 + 1.0;
    Ok(((q - a) / (q + a)).powf(-k))
}

/// Mean of `L^k` over the family against `g_k a_k(E) (ln T)^{k(k−1)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyMoment {
    pub t: u64,
    pub k: f64,
    pub family_size: usize,
    pub value: f64,
    pub predicted: f64,
    pub g_k: f64,
    pub a_k: f64,
}

impl FamilyMoment {
    pub fn ratio(&self) -> f64 {
        self.value / self.predicted
    }
}

/// Primes up to this enter `a_k(E)` in [`family_moment`].
pub const DEFAULT_AK_CUTOFF: u64 = 100_000;

/// Family average of `L^k`; zero values are left out for `k < 0`.
pub fn family_moment(
    curve: &EllipticCurveData,
    records: &[TwistRecord],
    k: f64,
    t: u64,
    ak_cutoff: u64,
) -> Result<FamilyMoment> {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| in_family(r, t) && !(k < 0.0 && r.is_zero))
        .map(|r| if k == 0.0 { 1.0 } else { r.lvalue.max(0.0).powf(k) })
        .collect();
    if values.is_empty() {
        return Err(ReportError::EmptyFamily(t));
    }
    if t < 3 {
        return Err(ReportError::InvalidCutoff(t));
    }
    let value = values.iter().sum::<f64>() / values.len() as f64;
    let g_k = g_k_barnes(k)?;
    let a_k = arithmetic_factor_ak(curve, k, ak_cutoff)?.value;
    let predicted = g_k * a_k * (t as f64).ln().powf(k * (k - 1.0) / 2.0);
    Ok(FamilyMoment { t, k, family_size: values.len(), value, predicted, g_k, a_k })
}

/// Family values rescaled to the mean of `P(N, ·)` and binned next to the
/// model probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueHistogram {
    pub n: u32,
    /// Factor applied to every central value.
    pub scale: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Model probability of each bin.
    pub model: Vec<f64>,
}

impl ValueHistogram {
    pub const CSV_HEADER: &'static str = "x_lo,x_hi,count,empirical_density,model_density,expected";

    pub fn empirical_densities(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| c as f64 / (self.total as f64 * (w[1] - w[0])))
            .collect()
    }

    pub fn model_densities(&self) -> Vec<f64> {
        self.model.iter().zip(self.edges.windows(2)).map(|(&p, w)| p / (w[1] - w[0])).collect()
    }

    /// Indices of bins expecting at least `min_expected` values.
    pub fn bulk_bins(&self, min_expected: f64) -> Vec<usize> {
        (0..self.counts.len()).filter(|&i| self.model[i] * self.total as f64 >= min_expected).collect()
    }

    /// Largest bulk-bin deviation in multinomial standard deviations.
    pub fn max_bulk_sigma(&self, min_expected: f64) -> f64 {
        let n = self.total as f64;
        self.bulk_bins(min_expected)
            .into_iter()
            .map(|i| {
                let p = self.model[i];
                (self.counts[i] as f64 - n * p).abs() / (n * p * (1.0 - p)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# N {} scale {:e}", self.n, self.scale).unwrap();
        writeln!(out, "{}", Self::CSV_HEADER).unwrap();
        let (emp, model) = (self.empirical_densities(), self.model_densities());
        for i in 0..self.counts.len() {
            writeln!(
                out,
                "{:e},{:e},{},{:e},{:e},{:e}",
                self.edges[i],
                self.edges[i + 1],
                self.counts[i],
                emp[i],
                model[i],
                self.model[i] * self.total as f64
            )
            .unwrap();
        }
        out
    }
}

/// Histogram of the family's central values with `|d| ≤ t`, rescaled so their
/// mean equals `M(N, 1)`, on `bins` equal bins of `[0, x_max]`.
/// `N` is `n_override` or `n_from_t(t)`.
pub fn value_histogram(
    records: &[TwistRecord],
    t: u64,
    bins: usize,
    x_max: f64,
    n_override: Option<u32>,
) -> Result<ValueHistogram> {
    if bins == 0 || !(x_max > 0.0) {
        return Err(ReportError::Domain("need at least one bin and x_max > 0".into()));
    }
    let values: Vec<f64> = records.iter().filter(|r| in_family(r, t)).map(|r| r.lvalue.max(0.0)).collect();
    if values.is_empty() {
        return Err(ReportError::EmptyFamily(t));
    }
    let n = match n_override {
        Some(n) => n,
        None => n_from_t(t)?,
    };
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !(mean > 0.0) {
        return Err(ReportError::Domain("all central values vanish".into()));
    }
    let scale = moment_so_even_real(n, 1.0)? / mean;
    let edges: Vec<f64> = (0..=bins).map(|i| x_max * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for v in &values {
        let x = v * scale;
        let idx = (x / x_max * bins as f64).floor();
        if idx >= 0.0 && (idx as usize) < bins {
            counts[idx as usize] += 1;
        }
    }
    let model = ValueDensity::new(n, DensityOptions::default())?.bin_masses(&edges)?;
    Ok(ValueHistogram { n, scale, edges, counts, total: values.len() as u64, model })
}
