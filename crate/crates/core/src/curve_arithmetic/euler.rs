use super::{ap_table, EllipticCurveData, Result};

/// Truncated Euler product with a tail-stability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArithmeticFactor {
    pub value: f64,
    /// `|a_k(P) − a_k(P/2)|`.
    pub tail_estimate: f64,
}

/// Local factor at `p` of the arithmetic factor `a_k(E)`:
/// `(1 − 1/p)^{k(k−1)/2} (((1 − a_p/p + 1/p)^{−k} + (1 + a_p/p + 1/p)^{−k})/2 · p/(p+1) + 1/(p+1))`.
/// At bad primes the `1/p` inside the Euler values is dropped.
pub fn local_factor(p: u64, ap: i64, good: bool, k: f64) -> f64 {
    let pf = p as f64;
    let x = ap as f64 / pf;
    let u = if good { 1.0 / pf } else { 0.0 };
    let mean = 0.5 * ((1.0 - x + u).powf(-k) + (1.0 + x + u).powf(-k));
    (1.0 - 1.0 / pf).powf(0.5 * k * (k - 1.0)) * (mean * pf / (pf + 1.0) + 1.0 / (pf + 1.0))
}

/// `a_k(E)` over primes `p ≤ prime_cutoff`, summed in log space.
pub fn arithmetic_factor_ak(curve: &EllipticCurveData, k: f64, prime_cutoff: u64) -> Result<ArithmeticFactor> {
    if prime_cutoff < 2 {
        return Err(super::CurveError::Domain("prime cutoff must be at least 2".into()));
    }
    let ap = ap_table(curve, prime_cutoff)?;
    let half = prime_cutoff / 2;
    let (mut log_half, mut log_full) = (0.0, 0.0);
    for &(p, a) in &ap {
        let term = local_factor(p, a, curve.has_good_reduction(p), k).ln();
        log_full += term;
        if p <= half {
            log_half += term;
        }
    }
    let value = log_full.exp();
    Ok(ArithmeticFactor { value, tail_estimate: (value - log_half.exp()).abs() })
}
