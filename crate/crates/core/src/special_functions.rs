//! Log-gamma (real and complex) and the Barnes G-function.
//!
//! Everything is evaluated on the log scale: the moment products built on top
//! of these functions overflow `f64` long before their logarithms do.
//!
//! Both log-gamma variants use the argument-shift recurrence
//! `ln Γ(z) = ln Γ(z + n) − Σ ln(z + k)` to move the argument into the region
//! `Re z ≥ 10` where the Stirling series is accurate to well below `1e-16`.
//! The Barnes function uses the same idea with `G(z + 1) = Γ(z) G(z)` and its
//! own asymptotic expansion.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use thiserror::Error;

/// ln √(2π)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// ζ′(−1), the constant term in the asymptotic expansion of ln G.
const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;

/// Arguments are shifted until their real part reaches this value.
const STIRLING_SHIFT: f64 = 10.0;

/// Barnes-G arguments are shifted until `z` (in `G(1 + z)`) reaches this value.
const BARNES_SHIFT: f64 = 14.0;

/// `B_{2k} / (2k (2k − 1))` for k = 1..=10.
const STIRLING_COEFFS: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// `B_{2k+2} / (4k (k + 1))` for k = 1..=8.
const BARNES_COEFFS: [f64; 8] = [
    -1.0 / 240.0,
    1.0 / 1008.0,
    -1.0 / 1440.0,
    1.0 / 1056.0,
    -691.0 / 327_600.0,
    1.0 / 144.0,
    -3617.0 / 114_240.0,
    43867.0 / 229_824.0,
];

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SpecialFnError {
    #[error("argument {x} outside the domain x > 0")]
    Domain { x: f64 },
    #[error("pole of the gamma function at {re}{im:+}i")]
    Pole { re: f64, im: f64 },
}

pub type Result<T> = std::result::Result<T, SpecialFnError>;

fn stirling_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for &c in STIRLING_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series * inv
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for &c in STIRLING_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv
}

/// ln Γ(x) for real `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain { x });
    }
    if x >= STIRLING_SHIFT {
        return Ok(stirling_real(x));
    }
    // x (x + 1) ... (x + n − 1) stays far from overflow for n ≤ 10.
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < STIRLING_SHIFT {
        product *= shifted;
        shifted += 1.0;
    }
    Ok(stirling_real(shifted) - product.ln())
}

/// Γ(x) for real `x > 0`; overflows to infinity for `x ≳ 171`.
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor()
}

/// ln Γ(z) for complex `z`.
///
/// For `Re z ≥ 0` this is the principal branch, analytic off the negative real
/// axis. For `Re z < 0` the reflection formula is used; off the real axis the
/// result is still the analytic continuation, on the negative real axis the
/// imaginary part is `0` or `π` according to the sign of Γ.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecialFnError::Domain { x: z.re });
    }
    if is_nonpositive_integer(z) {
        return Err(SpecialFnError::Pole { re: z.re, im: z.im });
    }
    if z.re < 0.0 {
        return Ok(reflected(z));
    }
    if z.re >= STIRLING_SHIFT || z.im.abs() >= 2.0 * STIRLING_SHIFT {
        return Ok(stirling_complex(z));
    }
    let mut shifted = z;
    let mut correction = Complex64::new(0.0, 0.0);
    while shifted.re < STIRLING_SHIFT {
        correction += shifted.ln();
        shifted += 1.0;
    }
    Ok(stirling_complex(shifted) - correction)
}

/// Reflection `Γ(z) Γ(1 − z) = π / sin(πz)` for `Re z < 0`.
fn reflected(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        let x = z.re;
        let s = (PI * x).sin();
        let mag = PI.ln() - s.abs().ln() - stirling_or_shift_real(1.0 - x);
        let phase = if s < 0.0 { PI } else { 0.0 };
        return Complex64::new(mag, phase);
    }
    if z.im < 0.0 {
        return reflected(z.conj()).conj();
    }
    // Im z > 0: ln sin(πz) = −iπz + iπ/2 − ln 2 + ln(1 − e^{2πiz}), analytic in
    // the upper half plane and consistent with the principal ln Γ there.
    let i = Complex64::i();
    let w = (2.0 * PI * i * z).exp();
    let ln_sin = -i * PI * z + i * (PI / 2.0) - LN_2 + (Complex64::new(1.0, 0.0) - w).ln();
    let ln_gamma_reflected = ln_gamma_complex(Complex64::new(1.0, 0.0) - z).expect("Re(1 - z) > 1 is never a pole");
    PI.ln() - ln_sin - ln_gamma_reflected
}

fn stirling_or_shift_real(x: f64) -> f64 {
    ln_gamma(x).expect("argument of the reflected gamma is positive")
}

/// ln G(x) for real `x > 0`, where `G` is the Barnes G-function.
pub fn ln_barnes_g(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain { x });
    }
    // G(x) = G(x + n) / (Γ(x) Γ(x + 1) ... Γ(x + n − 1))
    let mut z = x - 1.0;
    let mut pulled_back = 0.0;
    while z < BARNES_SHIFT {
        pulled_back += ln_gamma(z + 1.0)?;
        z += 1.0;
    }
    Ok(barnes_asymptotic(z) - pulled_back)
}

/// G(x) for real `x > 0`.
pub fn barnes_g(x: f64) -> Result<f64> {
    ln_barnes_g(x).map(f64::exp)
}

/// ψ(x) = Γ′(x)/Γ(x) for real `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialFnError::Domain { x });
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < STIRLING_SHIFT {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Σ B_{2k} / (2k x^{2k})
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(acc + x.ln() - 0.5 / x - tail)
}

/// Asymptotic expansion of ln G(1 + z) for large positive `z`.
fn barnes_asymptotic(z: f64) -> f64 {
    let ln_z = z.ln();
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    for &c in BARNES_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    0.5 * z * z * ln_z - 0.75 * z * z + z * LN_SQRT_2PI - ln_z / 12.0 + ZETA_PRIME_MINUS_ONE + series * inv2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ln_gamma_trivial_values() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(ln_gamma(2.0).unwrap().abs() < 1e-14);
        assert!(rel(ln_gamma(0.5).unwrap(), 0.5 * PI.ln()) < 1e-13);
        assert!(rel(ln_gamma(10.0).unwrap(), 362_880f64.ln()) < 1e-13);
    }

    #[test]
    fn ln_gamma_rejects_nonpositive() {
        assert!(matches!(ln_gamma(0.0), Err(SpecialFnError::Domain { .. })));
        assert!(matches!(ln_gamma(-2.5), Err(SpecialFnError::Domain { .. })));
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_matches_independent_implementation() {
        for i in 1..2000 {
            let x = 0.013 * i as f64 + 0.001;
            let ours = ln_gamma(x).unwrap();
            let theirs = statrs::function::gamma::ln_gamma(x);
            let scale = theirs.abs().max(1.0);
            assert!((ours - theirs).abs() / scale < 5e-14, "x = {x}: {ours} vs {theirs}");
        }
    }

    #[test]
    fn complex_poles_and_unit() {
        assert!(matches!(ln_gamma_complex(Complex64::new(-3.0, 0.0)), Err(SpecialFnError::Pole { .. })));
        assert!(ln_gamma_complex(Complex64::new(0.0, 0.0)).is_err());
        let one = ln_gamma_complex(Complex64::new(1.0, 0.0)).unwrap();
        assert!(one.norm() < 1e-14);
    }

    #[test]
    fn complex_schwarz_reflection() {
        for &(re, im) in &[(0.5, 10.0), (2.3, -7.1), (-3.7, 0.4), (15.0, 150.0)] {
            let z = Complex64::new(re, im);
            let a = ln_gamma_complex(z).unwrap();
            let b = ln_gamma_complex(z.conj()).unwrap();
            assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn complex_agrees_with_real_on_axis() {
        for i in 1..=500 {
            let x = 0.1 * i as f64;
            let c = ln_gamma_complex(Complex64::new(x, 0.0)).unwrap();
            let r = ln_gamma(x).unwrap();
            assert!(c.im.abs() < 1e-15);
            assert!(rel(c.re.exp(), r.exp()) < 1e-12, "x = {x}");
        }
    }

    /// Stirling series evaluated after shifting by `shift` extra steps, with
    /// the shift undone through the recurrence.
    fn shifted_stirling_oracle(z: Complex64, shift: usize) -> Complex64 {
        let mut w = z;
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..shift {
            acc += w.ln();
            w += 1.0;
        }
        stirling_complex(w) - acc
    }

    #[test]
    fn complex_matches_shifted_stirling_oracle() {
        let z = Complex64::new(0.5, 10.0);
        let a = shifted_stirling_oracle(z, 30);
        let b = shifted_stirling_oracle(z, 60);
        assert!((a - b).norm() < 1e-13, "oracle disagrees with itself");
        let ours = ln_gamma_complex(z).unwrap();
        assert!((ours - a).norm() <= 1e-12 * a.norm());
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        let expected_re = 0.5 * (PI / (PI * 10.0).cosh()).ln();
        assert!((ours.re - expected_re).abs() < 1e-12);
    }

    #[test]
    fn complex_is_continuous_along_vertical_lines() {
        for &c in &[0.25, 1.0, 3.5] {
            let mut prev = ln_gamma_complex(Complex64::new(c, 0.0)).unwrap();
            for k in 1..=4000 {
                let z = Complex64::new(c, 0.05 * k as f64);
                let cur = ln_gamma_complex(z).unwrap();
                assert!((cur - prev).norm() < 1.0, "jump at {z}");
                prev = cur;
            }
        }
    }

    #[test]
    fn reflection_branch_is_continuous_across_imaginary_axis() {
        for &im in &[0.3, 2.0, 7.5, 40.0] {
            let left = ln_gamma_complex(Complex64::new(-1e-9, im)).unwrap();
            let right = ln_gamma_complex(Complex64::new(1e-9, im)).unwrap();
            assert!((left - right).norm() < 1e-7, "im = {im}: {left} vs {right}");
        }
    }

    #[test]
    fn reflection_reproduces_gamma_on_negative_axis() {
        // Γ(−1/2) = −2√π
        let v = ln_gamma_complex(Complex64::new(-0.5, 0.0)).unwrap();
        assert!((v.re - (2.0 * PI.sqrt()).ln()).abs() < 1e-13);
        assert_eq!(v.im, PI);
        // Γ(−3/2) = 4√π/3
        let v = ln_gamma_complex(Complex64::new(-1.5, 0.0)).unwrap();
        assert!((v.re - (4.0 * PI.sqrt() / 3.0).ln()).abs() < 1e-13);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn barnes_trivial_values() {
        assert!((barnes_g(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((barnes_g(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((barnes_g(3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(barnes_g(0.0).is_err());
        assert!(barnes_g(-1.0).is_err());
    }

    #[test]
    fn barnes_superfactorials() {
        let mut superfactorial = 1.0;
        let mut factorial = 1.0;
        for n in 2..=10u32 {
            if n >= 3 {
                factorial *= (n - 2) as f64;
                superfactorial *= factorial;
            }
            let g = barnes_g(n as f64).unwrap();
            assert!(rel(g, superfactorial) < 1e-10, "G({n}) = {g}, want {superfactorial}");
        }
    }

    #[test]
    fn barnes_recurrence() {
        for &x in &[0.5, 1.5, 2.5, 5.0] {
            let lhs = barnes_g(x + 1.0).unwrap();
            let rhs = gamma(x).unwrap() * barnes_g(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs);
        }
    }

    /// G(1 + z) from its Weierstrass product, truncated after `terms` factors,
    /// with the leading tail `z³/3 · Σ_{k>K} 1/k²` added back.
    fn weierstrass_product_oracle(z: f64, terms: u64) -> f64 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut log = 0.5 * z * (2.0 * PI).ln() - 0.5 * (z + z * z * (1.0 + EULER_GAMMA));
        for k in 1..=terms {
            let k = k as f64;
            log += k * (z / k).ln_1p() - z + z * z / (2.0 * k);
        }
        let big_k = terms as f64;
        let tail_sq = 1.0 / big_k - 1.0 / (2.0 * big_k * big_k);
        let tail_cube = 1.0 / (2.0 * big_k * big_k);
        log += z.powi(3) / 3.0 * tail_sq - z.powi(4) / 4.0 * tail_cube;
        log.exp()
    }

    #[test]
    fn barnes_half_matches_product_oracle() {
        let oracle = weierstrass_product_oracle(-0.5, 1_000_000);
        let ours = barnes_g(0.5).unwrap();
        assert!(rel(ours, oracle) < 1e-10, "{ours} vs {oracle}");
        // closed form 2^{1/24} e^{1/8} π^{−1/4} A^{−3/2}
        let ln_glaisher = 1.0 / 12.0 - ZETA_PRIME_MINUS_ONE;
        let closed = (LN_2 / 24.0 + 0.125 - 0.25 * PI.ln() - 1.5 * ln_glaisher).exp();
        assert!(rel(ours, closed) < 1e-12);
    }

    #[test]
    fn barnes_matches_product_oracle_across_window() {
        for &x in &[0.2, 0.75, 1.3, 2.9, 4.4] {
            let oracle = weierstrass_product_oracle(x - 1.0, 1_000_000);
            let ours = barnes_g(x).unwrap();
            assert!(rel(ours, oracle) < 1e-10, "x = {x}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn digamma_values() {
        let euler_gamma = 0.577_215_664_901_532_9;
        assert!((digamma(1.0).unwrap() + euler_gamma).abs() < 1e-14);
        // ψ(1/2) = −γ − 2 ln 2
        assert!((digamma(0.5).unwrap() + euler_gamma + 2.0 * LN_2).abs() < 5e-14);
        for &x in &[0.3, 2.7, 11.0, 250.0] {
            let h = 1e-5 * x;
            let fd = (ln_gamma(x + h).unwrap() - ln_gamma(x - h).unwrap()) / (2.0 * h);
            assert!(rel(digamma(x).unwrap(), fd) < 1e-8, "x = {x}");
        }
        assert!(digamma(0.0).is_err());
    }
}
