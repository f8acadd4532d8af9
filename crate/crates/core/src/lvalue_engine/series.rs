use std::f64::consts::PI;

use super::{LvalueError, Result};
use crate::curve_arithmetic::{an_table, is_fundamental_discriminant, kronecker, CoefficientTable, EllipticCurveData};
use crate::sieve::SmallestPrimeFactor;

pub const DEFAULT_EPSILON: f64 = 1e-8;

/// The functional-equation oracle evaluates the smoothed sum at `δ` and `1/δ`.
pub const FE_DELTA: f64 = 1.1;

const RESYNC: usize = 256;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `w_E χ_d(−N)`.
pub fn twist_sign(curve: &EllipticCurveData, d: i64) -> Result<i32> {
    if gcd(d.unsigned_abs(), curve.conductor) != 1 {
        return Err(LvalueError::NotCoprime { d, conductor: curve.conductor });
    }
    Ok(i32::from(curve.root_number) * kronecker(d, -(curve.conductor as i64)))
}

/// Smallest `M` with `4 e^{−r(M+1)} / (1 − e^{−r}) ≤ ε`, the tail of
/// `2 Σ_{n>M} |a_n/n| e^{−rn}` under `|a_n| ≤ d(n)√n ≤ 2n`.
pub fn terms_needed(rate: f64, epsilon: f64) -> usize {
    let m = (4.0 / (epsilon * -(-rate).exp_m1())).ln() / rate - 1.0;
    m.ceil().max(1.0) as usize
}

/// `L_E(1/2, χ_d) = 2 Σ (a_n/n) χ_d(n) exp(−2πn / (|d|√N))` for `|d| ≤ dmax`.
#[derive(Debug, Clone)]
pub struct SeriesEngine {
    curve: EllipticCurveData,
    epsilon: f64,
    dmax: u64,
    coeffs: Vec<f64>,
    spf: SmallestPrimeFactor,
}

impl SeriesEngine {
    /// Builds a coefficient table long enough for every `|d| ≤ dmax`, including
    /// the functional-equation oracle.
    pub fn new(curve: &EllipticCurveData, dmax: u64, epsilon: f64) -> Result<Self> {
        let limit = Self::table_length(curve, dmax, epsilon);
        let table = an_table(curve, limit)?;
        Self::from_table(&table, dmax, epsilon)
    }

    /// Number of coefficients [`Self::new`] needs.
    pub fn table_length(curve: &EllipticCurveData, dmax: u64, epsilon: f64) -> usize {
        terms_needed(Self::rate_for(curve, dmax.max(1)) / FE_DELTA, epsilon)
    }

    pub fn from_table(table: &CoefficientTable, dmax: u64, epsilon: f64) -> Result<Self> {
        let needed = Self::table_length(&table.curve, dmax, epsilon);
        if table.limit() < needed {
            return Err(LvalueError::TailBound { epsilon, max_terms: table.limit() });
        }
        Ok(Self {
            curve: table.curve.clone(),
            epsilon,
            dmax: dmax.max(1),
            coeffs: table.normalized(),
            spf: SmallestPrimeFactor::new(dmax.max(2) as usize),
        })
    }

    pub fn curve(&self) -> &EllipticCurveData {
        &self.curve
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dmax(&self) -> u64 {
        self.dmax
    }

    fn rate_for(curve: &EllipticCurveData, abs_d: u64) -> f64 {
        2.0 * PI / (abs_d as f64 * (curve.conductor as f64).sqrt())
    }

    fn check(&self, d: i64) -> Result<()> {
        if d != 1 && !is_fundamental_discriminant(d) {
            return Err(LvalueError::NotFundamental { d });
        }
        if d.unsigned_abs() > self.dmax {
            return Err(LvalueError::OutOfRange { abs: d.unsigned_abs(), max: self.dmax });
        }
        Ok(())
    }

    /// `χ_d(n)` for `0 ≤ n < |d|`, built multiplicatively.
    pub fn character_table(&self, d: i64) -> Vec<i8> {
        let m = d.unsigned_abs() as usize;
        if m == 1 {
            return vec![1];
        }
        let mut chi = vec![0i8; m];
        chi[1] = 1;
        for n in 2..m {
            let p = self.spf.get(n) as usize;
            chi[n] = if p == n { kronecker(d, p as i64) as i8 } else { chi[p] * chi[n / p] };
        }
        chi
    }

    /// `Σ_{n ≤ terms} (a_n/n) χ(n) e^{−rate·n}` in ascending `n`.
    fn smoothed_sum(&self, chi: &[i8], rate: f64, terms: usize) -> f64 {
        let q = (-rate).exp();
        let modulus = chi.len();
        let mut w = 1.0;
        let mut idx = 0;
        let mut sum = 0.0;
        for (n, &a) in self.coeffs.iter().enumerate().take(terms + 1).skip(1) {
            idx += 1;
            if idx == modulus {
                idx = 0;
            }
            w = if n % RESYNC == 0 { (-rate * n as f64).exp() } else { w * q };
            sum += a * f64::from(chi[idx]) * w;
        }
        sum
    }

    /// Number of terms used for `d` at the engine's tolerance.
    pub fn truncation(&self, d: i64) -> usize {
        terms_needed(Self::rate_for(&self.curve, d.unsigned_abs()), self.epsilon)
    }

    /// Central value at the engine's tolerance; errors for odd-sign twists.
    pub fn central_value(&self, d: i64) -> Result<f64> {
        self.check(d)?;
        if twist_sign(&self.curve, d)? != 1 {
            return Err(LvalueError::OddSign { d });
        }
        self.central_value_with_terms(d, self.truncation(d))
    }

    /// The series truncated after `terms` terms (no sign check).
    pub fn central_value_with_terms(&self, d: i64, terms: usize) -> Result<f64> {
        self.check(d)?;
        if terms >= self.coeffs.len() {
            return Err(LvalueError::TailBound { epsilon: self.epsilon, max_terms: self.coeffs.len() - 1 });
        }
        let chi = self.character_table(d);
        Ok(2.0 * self.smoothed_sum(&chi, Self::rate_for(&self.curve, d.unsigned_abs()), terms))
    }

    /// `V(A) = Σ (a_n/n) χ_d(n) e^{−2πnA/(|d|√N)}` at the engine's tolerance.
    pub fn smoothed_value(&self, d: i64, scale: f64) -> Result<f64> {
        self.check(d)?;
        let rate = Self::rate_for(&self.curve, d.unsigned_abs()) * scale;
        let terms = terms_needed(rate, self.epsilon);
        if terms >= self.coeffs.len() {
            return Err(LvalueError::TailBound { epsilon: self.epsilon, max_terms: self.coeffs.len() - 1 });
        }
        Ok(self.smoothed_sum(&self.character_table(d), rate, terms))
    }

    /// `V(δ) + w V(1/δ) − (1 + w) V(1)`, which vanishes when `w` is the sign
    /// of the twist's functional equation.
    pub fn functional_equation_residual(&self, d: i64, w: i32, delta: f64) -> Result<f64> {
        let wf = f64::from(w);
        Ok(self.smoothed_value(d, delta)? + wf * self.smoothed_value(d, 1.0 / delta)?
            - (1.0 + wf) * self.smoothed_value(d, 1.0)?)
    }

    /// The sign whose functional-equation residual is smaller, with both residuals.
    pub fn infer_sign(&self, d: i64) -> Result<(i32, f64, f64)> {
        let plus = self.functional_equation_residual(d, 1, FE_DELTA)?.abs();
        let minus = self.functional_equation_residual(d, -1, FE_DELTA)?.abs();
        Ok((if plus <= minus { 1 } else { -1 }, plus, minus))
    }
}
