use rayon::prelude::*;

use super::{ap_point_count, EllipticCurveData, Result};
use crate::sieve::{primes_up_to, SmallestPrimeFactor};

/// `(p, a_p)` for every prime `p ≤ limit`, ascending.
pub fn ap_table(curve: &EllipticCurveData, limit: u64) -> Result<Vec<(u64, i64)>> {
    primes_up_to(limit).into_par_iter().map(|p| ap_point_count(curve, p).map(|a| (p, a))).collect()
}

/// Integer coefficients `a_n`, `1 ≤ n ≤ limit`, of the curve's L-series.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub curve: EllipticCurveData,
    /// `an[0]` is unused and set to 0.
    pub an: Vec<i64>,
}

impl CoefficientTable {
    /// Extends prime values to all `n ≤ limit` by multiplicativity, the
    /// recursion `a_{p^{r+1}} = a_p a_{p^r} − p a_{p^{r−1}}` at good primes and
    /// `a_{p^r} = a_p^r` at bad ones.
    pub fn from_primes(curve: &EllipticCurveData, limit: usize, ap: &[(u64, i64)]) -> Self {
        let mut an = vec![0i64; limit + 1];
        if limit >= 1 {
            an[1] = 1;
        }
        for &(p, a) in ap {
            if (p as usize) <= limit {
                an[p as usize] = a;
            }
        }
        let spf = SmallestPrimeFactor::new(limit);
        for n in 2..=limit {
            let p = spf.get(n) as usize;
            if p == n {
                continue;
            }
            let mut q = p;
            let mut rest = n / p;
            while rest % p == 0 {
                rest /= p;
                q *= p;
            }
            an[n] = if rest > 1 {
                an[q] * an[rest]
            } else if curve.has_good_reduction(p as u64) {
                an[p] * an[n / p] - p as i64 * an[n / p / p]
            } else {
                an[p] * an[n / p]
            };
        }
        Self { curve: curve.clone(), an }
    }

    pub fn limit(&self) -> usize {
        self.an.len() - 1
    }

    pub fn get(&self, n: usize) -> i64 {
        self.an[n]
    }

    /// `a_n / n` as floats, index 0 unused.
    pub fn normalized(&self) -> Vec<f64> {
        self.an.iter().enumerate().map(|(n, &a)| if n == 0 { 0.0 } else { a as f64 / n as f64 }).collect()
    }
}

/// Coefficient table up to `limit` from point counts.
pub fn an_table(curve: &EllipticCurveData, limit: usize) -> Result<CoefficientTable> {
    let ap = ap_table(curve, limit as u64)?;
    Ok(CoefficientTable::from_primes(curve, limit, &ap))
}
