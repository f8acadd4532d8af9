//! Moments of `det(U − I)` over Haar-random `U ∈ SO(2N)` and the value density
//! obtained from them by Mellin inversion.
//!
//! The moment of order `s` is
//!
//! ```text
//! M(N, s) = 2^{2Ns} ∏_{j=1}^{N} Γ(N + j − 1) Γ(s + j − 1/2) / (Γ(j − 1/2) Γ(s + j + N − 1))
//! ```
//!
//! and the density of `x = det(U − I)` on `(0, 4^N)` is
//! `P(N, x) = (2πi x)^{-1} ∫_{(c)} M(N, s) x^{-s} ds`.
//!
//! The inversion integral is not computed on the vertical line itself: for
//! small `N` the integrand decays only like `|t|^{-N(N-1/2)}` (for `N = 1`,
//! `|t|^{-1/2}`). Instead the upper half of the line is deformed into a
//! vertical segment `c → c + iH` followed by the horizontal ray
//! `c + iH → −∞ + iH`. Along the ray `|x^{-s} 4^{Ns}| = e^{ω Re s}` with
//! `ω = ln(4^N / x) > 0`, so the integrand decays exponentially, and the
//! poles of `M` (all on the real axis, `s ≤ −1/2`) stay a distance `H` away.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use thiserror::Error;

use crate::quadrature::GaussLegendre;
use crate::special_functions::{self, digamma, ln_barnes_g, ln_gamma, ln_gamma_complex, SpecialFnError};

/// Upper end of the small-`x` regime in which `2√X h(N)` is reported without
/// a warning.
pub const SMALL_X_REGIME: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("N must be at least 1")]
    InvalidDimension,
    #[error("moment has a pole at s = {re}{im:+}i")]
    Pole { re: f64, im: f64 },
    #[error("{0}")]
    Domain(String),
    #[error("contour integral did not converge: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

pub type Result<T> = std::result::Result<T, MomentError>;

/// Half-dimension `N` and order `s` of a moment of `|det(U − I)|` over SO(2N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec {
    n: u32,
    s: Complex64,
}

impl MomentSpec {
    pub fn new(n: u32, s: Complex64) -> Result<Self> {
        if n == 0 {
            return Err(MomentError::InvalidDimension);
        }
        Ok(Self { n, s })
    }

    pub fn real(n: u32, k: f64) -> Result<Self> {
        Self::new(n, Complex64::new(k, 0.0))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    /// Finite moments require `Re s > −1/2`.
    pub fn is_finite_moment(&self) -> bool {
        self.s.re > -0.5
    }
}

/// Precomputed pieces of `M(N, ·)` for a fixed `N`.
#[derive(Debug, Clone)]
pub struct SoEvenMoments {
    n: u32,
    /// Σ_j ln Γ(N + j − 1) − ln Γ(j − 1/2), evaluated as minus the gamma
    /// ratio at `s = 0` so that `M(N, 0) = 1` holds exactly.
    ln_normalizer: f64,
}

impl SoEvenMoments {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(MomentError::InvalidDimension);
        }
        let mut moments = Self { n, ln_normalizer: 0.0 };
        moments.ln_normalizer = -moments.ln_gamma_ratio(Complex64::new(0.0, 0.0))?.re;
        Ok(moments)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// ln M(N, s). Real part is `−∞` where the moment vanishes
    /// (s a non-positive integer ≤ −N).
    pub fn ln_moment(&self, s: Complex64) -> Result<Complex64> {
        check_pole(s)?;
        if self.vanishes_at(s) {
            return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
        }
        let nf = self.n as f64;
        Ok(self.ln_normalizer + 2.0 * nf * LN_2 * s + self.ln_gamma_ratio(s)?)
    }

    pub fn moment(&self, s: Complex64) -> Result<Complex64> {
        let ln = self.ln_moment(s)?;
        if ln.re == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(ln.exp())
    }

    fn vanishes_at(&self, s: Complex64) -> bool {
        // 1/Γ(s + j + N − 1) = 0 for some j
        s.im == 0.0 && s.re == s.re.floor() && s.re <= -(self.n as f64)
    }

    /// Σ_j ln Γ(s + j − 1/2) − ln Γ(s + j + N − 1), using
    /// Σ_{j=1}^{N} ln Γ(a + j − 1) = N ln Γ(a) + Σ_{m=1}^{N−1} (N − m) ln(a + m − 1).
    fn ln_gamma_ratio(&self, s: Complex64) -> Result<Complex64> {
        let n = self.n;
        let nf = n as f64;
        let top = s + 0.5;
        let bottom = s + nf;
        let mut acc = nf * (ln_gamma_complex(top)? - ln_gamma_complex(bottom)?);
        for m in 1..n {
            let weight = (n - m) as f64;
            let shift = (m - 1) as f64;
            acc += weight * ((top + shift).ln() - (bottom + shift).ln());
        }
        Ok(acc)
    }
}

fn check_pole(s: Complex64) -> Result<()> {
    // Γ(s + j − 1/2) has poles where s − 1/2 is an integer ≤ −1.
    if s.im == 0.0 && s.re <= -0.5 && (s.re - 0.5) == (s.re - 0.5).floor() {
        return Err(MomentError::Pole { re: s.re, im: s.im });
    }
    Ok(())
}

/// M(N, s) for complex `s`.
pub fn moment_so_even(spec: MomentSpec) -> Result<Complex64> {
    SoEvenMoments::new(spec.n)?.moment(spec.s)
}

/// M(N, k) for real `k`.
pub fn moment_so_even_real(n: u32, k: f64) -> Result<f64> {
    Ok(moment_so_even(MomentSpec::real(n, k)?)?.re)
}

/// ln M(N, s).
pub fn ln_moment_so_even(spec: MomentSpec) -> Result<Complex64> {
    SoEvenMoments::new(spec.n)?.ln_moment(spec.s)
}

/// `2^{k(k+1)/2} ∏_{ℓ=1}^{k−1} ℓ! / (2ℓ)!` in exact rational arithmetic.
pub fn g_k_product_exact(k: u32) -> BigRational {
    let mut value = BigRational::from_integer(BigInt::one() << (k as usize * (k as usize + 1) / 2));
    let mut factorial = BigInt::one();
    let mut double_factorial = BigInt::one();
    let mut built_to = 0u32;
    for ell in 1..k {
        factorial *= ell;
        while built_to < 2 * ell {
            built_to += 1;
            double_factorial *= built_to;
        }
        value *= BigRational::new(factorial.clone(), double_factorial.clone());
    }
    value
}

/// The leading constant of the integer moments, `g_k(O⁺)`.
pub fn g_k_product(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(MomentError::Domain("g_k is defined for k >= 1".into()));
    }
    g_k_product_exact(k).to_f64().ok_or_else(|| MomentError::Domain(format!("g_{k} does not fit in f64")))
}

/// ln g_k via the Barnes G-function, valid for real `k > −1/2`:
/// `g_k = 2^{k²/2} G(1 + k) √(Γ(1 + 2k) / (G(1 + 2k) Γ(1 + k)))`.
pub fn ln_g_k_barnes(k: f64) -> Result<f64> {
    if !(k > -0.5) {
        return Err(MomentError::Domain(format!("g_k needs k > -1/2, got {k}")));
    }
    Ok(0.5 * k * k * LN_2
        + ln_barnes_g(1.0 + k)?
        + 0.5 * (ln_gamma(1.0 + 2.0 * k)? - ln_barnes_g(1.0 + 2.0 * k)? - ln_gamma(1.0 + k)?))
}

pub fn g_k_barnes(k: f64) -> Result<f64> {
    ln_g_k_barnes(k).map(f64::exp)
}

/// `M(N, k) / (g_k N^{k(k−1)/2})`, which tends to 1 as `N → ∞`.
pub fn moment_asymptotic_ratio(n: u32, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(MomentError::Domain("k must be at least 1".into()));
    }
    let ln_m = ln_moment_so_even(MomentSpec::real(n, k as f64)?)?.re;
    let kf = k as f64;
    let ln_pred = g_k_product(k)?.ln() + 0.5 * kf * (kf - 1.0) * (n as f64).ln();
    Ok((ln_m - ln_pred).exp())
}

/// ln h(N), the coefficient of `x^{-1/2}` in `P(N, x)` as `x → 0⁺`.
pub fn ln_h_small_x(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(MomentError::InvalidDimension);
    }
    let nf = n as f64;
    let mut acc = -nf * LN_2 - ln_gamma(nf)?;
    for j in 1..=n {
        let j = j as f64;
        acc += ln_gamma(nf + j - 1.0)? + ln_gamma(j)? - ln_gamma(j - 0.5)? - ln_gamma(j + nf - 1.5)?;
    }
    Ok(acc)
}

pub fn h_small_x(n: u32) -> Result<f64> {
    ln_h_small_x(n).map(f64::exp)
}

/// `2^{−7/8} G(1/2) π^{−1/4}`, the limit of `h(N) N^{−3/8}`.
pub fn h_asymptotic_constant() -> f64 {
    let g_half = special_functions::barnes_g(0.5).expect("G(1/2) is in domain");
    2f64.powf(-0.875) * g_half * PI.powf(-0.25)
}

/// Small-`x` estimate of `Prob(det(U − I) ≤ X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfEstimate {
    pub value: f64,
    /// Set when `X` exceeds [`SMALL_X_REGIME`], where the `x^{-1/2}` law is
    /// no longer a reliable approximation.
    pub outside_small_x_regime: bool,
}

/// `2 √X h(N)`.
pub fn cdf_small_x(n: u32, x: f64) -> Result<CdfEstimate> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(MomentError::Domain(format!("X must be a nonnegative real, got {x}")));
    }
    let h = h_small_x(n)?;
    Ok(CdfEstimate { value: 2.0 * x.sqrt() * h, outside_small_x_regime: x > SMALL_X_REGIME })
}

/// Numerical parameters of the inversion contour.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOptions {
    /// Abscissa `c` of the vertical part of the contour; must exceed −1/2.
    /// With `saddle_contour` set this is only a lower bound.
    pub contour_c: f64,
    /// Move the vertical part to the real saddle point of `M(N, s) x^{-s}`.
    pub saddle_contour: bool,
    /// Upper bound for the saddle abscissa.
    pub max_contour_c: f64,
    /// Height `H` at which the contour turns left.
    pub turn_height: f64,
    /// Relative cutoff for the tail of the horizontal ray.
    pub tail_tolerance: f64,
    /// Points per Gauss–Legendre panel.
    pub nodes_per_panel: usize,
    /// Hard cap on the length of the horizontal ray.
    pub max_ray_length: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            contour_c: 0.25,
            saddle_contour: true,
            max_contour_c: 200.0,
            turn_height: 5.0,
            tail_tolerance: 1e-17,
            nodes_per_panel: 30,
            max_ray_length: 1e12,
        }
    }
}

/// Density evaluator for a fixed `N`.
#[derive(Debug, Clone)]
pub struct ValueDensity {
    moments: SoEvenMoments,
    options: DensityOptions,
    rule: GaussLegendre,
}

impl ValueDensity {
    pub fn new(n: u32, options: DensityOptions) -> Result<Self> {
        if !(options.contour_c > -0.5) {
            return Err(MomentError::Domain(format!("contour abscissa must exceed -1/2, got {}", options.contour_c)));
        }
        if !(options.turn_height > 0.0) {
            return Err(MomentError::Domain("turn height must be positive".into()));
        }
        let rule = GaussLegendre::new(options.nodes_per_panel.max(2));
        Ok(Self { moments: SoEvenMoments::new(n)?, options, rule })
    }

    pub fn n(&self) -> u32 {
        self.moments.n()
    }

    /// `ln 4^N`, the log of the upper end of the support.
    pub fn ln_support(&self) -> f64 {
        2.0 * self.n() as f64 * LN_2
    }

    /// P(N, x). Zero outside `(0, 4^N)`.
    pub fn at(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(MomentError::Domain(format!("x must be finite, got {x}")));
        }
        if x <= 0.0 {
            return Err(MomentError::Domain(format!("x must be positive, got {x}")));
        }
        let omega = self.ln_support() - x.ln();
        if omega <= 0.0 {
            return Ok(0.0);
        }
        self.at_log_ratio(omega)
    }

    /// P(N, x) with `x = 4^N e^{−ω}`, so that points close to the upper end of
    /// the support can be addressed without cancellation.
    pub fn at_log_ratio(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(MomentError::Domain(format!("log ratio must be positive, got {omega}")));
        }
        let integral = self.upper_contour_integral(omega)?;
        let inv_x = (omega - self.ln_support()).exp();
        Ok(integral.im * inv_x / PI)
    }

    fn integrand(&self, s: Complex64, omega: f64) -> Result<Complex64> {
        let ln_m = self.moments.ln_moment(s)?;
        Ok((ln_m + s * (omega - self.ln_support())).exp())
    }

    /// Height at which the contour turns left. Below `|s| ≈ N` the moments
    /// grow like a Gaussian in `Re s`, so the ray has to run above that region.
    fn turn_height(&self, c: f64) -> f64 {
        self.options.turn_height.max(2.0 * self.n() as f64).max(c)
    }

    /// d/ds ln(M(s) x^{-s}) on the real axis, plus ω.
    fn log_slope(&self, c: f64, omega: f64) -> Result<f64> {
        let n = self.n() as f64;
        let mut slope = omega;
        for j in 1..=self.n() {
            let j = j as f64;
            slope += digamma(c + j - 0.5)? - digamma(c + j + n - 1.0)?;
        }
        Ok(slope)
    }

    /// Abscissa of the vertical leg for a given `ω`.
    fn contour_abscissa(&self, omega: f64) -> Result<f64> {
        let lo = self.options.contour_c;
        if !self.options.saddle_contour {
            return Ok(lo);
        }
        let hi = self.options.max_contour_c.max(lo);
        if self.log_slope(lo, omega)? >= 0.0 {
            return Ok(lo);
        }
        if self.log_slope(hi, omega)? <= 0.0 {
            return Ok(hi);
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if self.log_slope(mid, omega)? < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-6 * (1.0 + a.abs()) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// ∫ M(s) x^{-s} ds over the upper half of the deformed contour.
    fn upper_contour_integral(&self, omega: f64) -> Result<Complex64> {
        let c = self.contour_abscissa(omega)?;
        let height = self.turn_height(c);
        let i = Complex64::i();
        let scale = self.integrand(Complex64::new(c, 0.0), omega)?.norm();

        // vertical leg s = c + it, ds = i dt. |M(c + it)| decreases in t, so
        // once it is negligible the rest of the segment can be skipped.
        let width = (10.0 / omega).min(0.5);
        let panels = (height / width).ceil().max(1.0) as usize;
        let step = height / panels as f64;
        let mut vertical = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = p as f64 * step;
            for (t, w) in self.rule.mapped(a, a + step) {
                vertical += w * self.integrand(Complex64::new(c, t), omega)?;
            }
            let edge = self.integrand(Complex64::new(c, a + step), omega)?.norm();
            if a + step >= 1.0 && edge * height <= self.options.tail_tolerance * scale {
                break;
            }
        }
        vertical *= i;

        // horizontal ray s = c − u + iH, ds = −du
        let mut ray = Complex64::new(0.0, 0.0);
        let mut start = 0.0;
        let mut width = (4.0 / omega).min(0.5);
        loop {
            let end = start + width;
            for (u, w) in self.rule.mapped(start, end) {
                ray -= w * self.integrand(Complex64::new(c - u, height), omega)?;
            }
            let edge = self.integrand(Complex64::new(c - end, height), omega)?.norm();
            // remaining tail ≤ |F(end)| / ω once the exponential dominates
            if omega * end > 2.0 && edge / omega <= self.options.tail_tolerance * scale {
                break;
            }
            if end > self.options.max_ray_length {
                return Err(MomentError::NonConvergence(format!(
                    "ray tail {:.3e} still above tolerance at length {end:.3e} (omega = {omega:.3e})",
                    edge / omega
                )));
            }
            start = end;
            width *= 2.0;
        }
        Ok(vertical + ray)
    }

    /// ∫_{x_lo}^{x_hi} x^k P(N, x) dx for `0 ≤ x_lo < x_hi ≤ 4^N`.
    ///
    /// Integrates in `ω = ln(4^N / x)`. Near the top of the support the
    /// substitution `ω = v²` removes the `(4^N − x)^{−1/2}` edge singularity
    /// that occurs for `N = 1`; below `x = 1e-14 · min(1, x_hi)` the leading
    /// small-`x` term `h(N) x^{−1/2}` is integrated in closed form.
    pub fn weighted_mass(&self, k: f64, x_lo: f64, x_hi: f64) -> Result<f64> {
        Ok(self.weighted_masses(&[k], x_lo, x_hi)?[0])
    }

    /// [`Self::weighted_mass`] for several exponents, sharing the density
    /// evaluations.
    pub fn weighted_masses(&self, ks: &[f64], x_lo: f64, x_hi: f64) -> Result<Vec<f64>> {
        let top = self.ln_support();
        let x_hi = x_hi.min(top.exp());
        if !(x_lo >= 0.0) || !(x_hi > x_lo) {
            return Err(MomentError::Domain(format!("bad interval [{x_lo}, {x_hi}]")));
        }
        if let Some(&k) = ks.iter().find(|&&k| !(k > -0.5)) {
            return Err(MomentError::Domain(format!("weight exponent must exceed -1/2, got {k}")));
        }
        let omega_top = (top - x_hi.ln()).max(0.0);
        let tail_cut = 1e-14 * x_hi.min(1.0);
        let mut totals = vec![0.0; ks.len()];
        let omega_bottom = if x_lo <= tail_cut {
            let h = h_small_x(self.n())?;
            for (total, &k) in totals.iter_mut().zip(ks) {
                *total = h * (tail_cut.powf(k + 0.5) - x_lo.powf(k + 0.5)) / (k + 0.5);
            }
            top - tail_cut.ln()
        } else {
            top - x_lo.ln()
        };

        let mut accumulate = |omega: f64, weight: f64| -> Result<()> {
            let p = self.at_log_ratio(omega)? * weight;
            let ln_x = top - omega;
            for (total, &k) in totals.iter_mut().zip(ks) {
                *total += p * ((k + 1.0) * ln_x).exp();
            }
            Ok(())
        };

        let mut lower = omega_top;
        if omega_top < 1.0 {
            let v_lo = omega_top.sqrt();
            let v_hi = omega_bottom.min(1.0).sqrt();
            for (v, w) in self.rule.mapped(v_lo, v_hi) {
                accumulate(v * v, w * 2.0 * v)?;
            }
            lower = omega_bottom.min(1.0);
        }
        if omega_bottom > lower {
            let panels = (omega_bottom - lower).ceil() as usize;
            let step = (omega_bottom - lower) / panels as f64;
            for p in 0..panels {
                let a = lower + p as f64 * step;
                for (omega, w) in self.rule.mapped(a, a + step) {
                    accumulate(omega, w)?;
                }
            }
        }
        Ok(totals)
    }

    /// Probability of each bin `[edges[i], edges[i + 1])`.
    pub fn bin_masses(&self, edges: &[f64]) -> Result<Vec<f64>> {
        let support = self.ln_support().exp();
        edges
            .par_windows(2)
            .map(|w| {
                let (lo, hi) = (w[0].max(0.0), w[1].min(support));
                if hi > lo {
                    self.weighted_mass(0.0, lo, hi)
                } else {
                    Ok(0.0)
                }
            })
            .collect()
    }

    /// ∫ x^k P(N, x) dx over the whole support; equals M(N, k).
    pub fn mellin_moment(&self, k: f64) -> Result<f64> {
        self.weighted_mass(k, 0.0, self.ln_support().exp())
    }

    /// [`Self::mellin_moment`] for several exponents at once.
    pub fn mellin_moments(&self, ks: &[f64]) -> Result<Vec<f64>> {
        self.weighted_masses(ks, 0.0, self.ln_support().exp())
    }
}

/// P(N, x) with the given contour options.
pub fn density_po(n: u32, x: f64, options: &DensityOptions) -> Result<f64> {
    ValueDensity::new(n, options.clone())?.at(x)
}

/// Tabulated density `P(N, x)` on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub n: u32,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
}

impl DensityGrid {
    pub fn new(n: u32, xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if xs.len() != ps.len() {
            return Err(MomentError::Domain("xs and ps differ in length".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(MomentError::Domain("grid must be strictly increasing".into()));
        }
        Ok(Self { n, xs, ps })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Evaluates `P(N, ·)` at every point of `xs`, one task per point.
pub fn density_grid(n: u32, xs: &[f64], options: &DensityOptions) -> Result<DensityGrid> {
    let density = ValueDensity::new(n, options.clone())?;
    let support = density.ln_support().exp();
    if let Some(&bad) = xs.iter().find(|&&x| !(x > 0.0 && x <= support)) {
        return Err(MomentError::Domain(format!("grid point {bad} outside (0, 4^N]")));
    }
    let ps = xs.par_iter().map(|&x| density.at(x)).collect::<Result<Vec<_>>>()?;
    DensityGrid::new(n, xs.to_vec(), ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_n1(x: f64) -> f64 {
        1.0 / (PI * (x * (4.0 - x)).sqrt())
    }

    #[test]
    fn moment_trivial_and_derived_values() {
        assert!((moment_so_even_real(5, 0.0).unwrap() - 1.0).abs() < 1e-12);
        // SO(2): (1/2π) ∫ (2 − 2cos θ) dθ = 2
        assert!((moment_so_even_real(1, 1.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((moment_so_even_real(2, 1.0).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn so2_moments_match_quadrature() {
        // (1/2π) ∫ (2 − 2cos θ)^s dθ
        let rule = GaussLegendre::new(64);
        for &s in &[0.5, 1.0, 2.0, 3.5] {
            let mut quad = 0.0;
            for p in 0..64 {
                let a = p as f64 * PI / 32.0;
                quad += rule.integrate(a, a + PI / 32.0, |t| (2.0 - 2.0 * t.cos()).powf(s));
            }
            quad /= 2.0 * PI;
            let m = moment_so_even_real(1, s).unwrap();
            assert!(((m - quad) / quad).abs() < 1e-10, "s = {s}: {m} vs {quad}");
        }
    }

    #[test]
    fn moment_poles_and_zeros() {
        assert!(matches!(moment_so_even_real(3, -0.5), Err(MomentError::Pole { .. })));
        assert!(matches!(moment_so_even_real(3, -2.5), Err(MomentError::Pole { .. })));
        assert_eq!(moment_so_even_real(2, -3.0).unwrap(), 0.0);
        assert!(moment_so_even_real(2, -0.75).is_ok());
        assert!(MomentSpec::new(0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn complex_moments_are_conjugate_symmetric() {
        let m = SoEvenMoments::new(7).unwrap();
        let s = Complex64::new(0.3, 4.2);
        let a = m.moment(s).unwrap();
        let b = m.moment(s.conj()).unwrap();
        assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn ln_moment_matches_direct_product() {
        // term-by-term evaluation of the defining product
        for &n in &[1u32, 4, 30] {
            for &s in &[Complex64::new(0.7, 0.0), Complex64::new(0.25, 3.0), Complex64::new(-0.3, 1.5)] {
                let mut direct = 2.0 * n as f64 * s * LN_2;
                for j in 1..=n {
                    let (nf, jf) = (n as f64, j as f64);
                    direct += ln_gamma(nf + jf - 1.0).unwrap() - ln_gamma(jf - 0.5).unwrap();
                    direct += ln_gamma_complex(s + jf - 0.5).unwrap() - ln_gamma_complex(s + jf + nf - 1.0).unwrap();
                }
                let ours = SoEvenMoments::new(n).unwrap().ln_moment(s).unwrap();
                let diff = (direct - ours).exp();
                assert!((diff - 1.0).norm() < 1e-10, "n = {n}, s = {s}: {diff}");
            }
        }
    }

    #[test]
    fn g_k_exact_values() {
        assert_eq!(g_k_product_exact(1), BigRational::from_integer(2.into()));
        assert_eq!(g_k_product_exact(2), BigRational::from_integer(4.into()));
        assert_eq!(g_k_product_exact(3), BigRational::new(8.into(), 3.into()));
        assert!(g_k_product(0).is_err());
    }

    #[test]
    fn g_k_barnes_matches_product() {
        assert!((g_k_barnes(0.0).unwrap() - 1.0).abs() < 1e-14);
        for k in 1..=8u32 {
            let a = g_k_product(k).unwrap();
            let b = g_k_barnes(k as f64).unwrap();
            assert!(((a - b) / a).abs() < 1e-10, "k = {k}: {a} vs {b}");
        }
        assert!(g_k_barnes(-0.5).is_err());
        assert!(g_k_barnes(-0.25).is_ok());
    }

    #[test]
    fn g_half_matches_large_n_limit() {
        // M(N, 1/2) / N^{-1/8} → g_{1/2}; the correction is O(1/N)
        let limit = |n: u32| moment_so_even_real(n, 0.5).unwrap() * (n as f64).powf(0.125);
        let (a, b) = (limit(500), limit(1000));
        let richardson = 2.0 * b - a;
        let g = g_k_barnes(0.5).unwrap();
        assert!(((g - richardson) / g).abs() < 1e-7, "{g} vs {richardson}");
    }

    #[test]
    fn asymptotic_ratio_examples() {
        assert!((moment_asymptotic_ratio(1000, 1).unwrap() - 1.0).abs() < 1e-6);
        assert!((moment_asymptotic_ratio(10, 2).unwrap() - 1.0).abs() < 0.15);
        let seq: Vec<f64> = [50, 100, 200].iter().map(|&n| moment_asymptotic_ratio(n, 3).unwrap()).collect();
        let gaps: Vec<f64> = seq.iter().map(|r| (r - 1.0).abs()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{seq:?}");
    }

    #[test]
    fn h_values() {
        assert!((h_small_x(1).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-14);
        let c = h_asymptotic_constant();
        let r20 = h_small_x(20).unwrap() / (c * 20f64.powf(0.375));
        assert!((r20 - 1.0).abs() < 0.05, "{r20}");
        let ratios: Vec<f64> =
            [100, 200, 400].iter().map(|&n| h_small_x(n).unwrap() / (n as f64).powf(0.375)).collect();
        for r in &ratios {
            assert!((r / c - 1.0).abs() < 0.01);
        }
        assert!((ratios[0] / ratios[2] - 1.0).abs() < 0.01);
    }

    #[test]
    fn cdf_values_and_flag() {
        let c = cdf_small_x(1, 1e-4).unwrap();
        assert!((c.value - 2.0 * 1e-2 / (2.0 * PI)).abs() < 1e-15);
        assert!(!c.outside_small_x_regime);
        assert_eq!(cdf_small_x(7, 0.0).unwrap().value, 0.0);
        assert!(cdf_small_x(3, 0.5).unwrap().outside_small_x_regime);
        assert!(cdf_small_x(3, -1.0).is_err());
    }

    #[test]
    fn density_n1_closed_form() {
        let d = ValueDensity::new(1, DensityOptions::default()).unwrap();
        assert!((d.at(2.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-12);
        for i in 0..=80 {
            let x = 0.01 + (3.99 - 0.01) * i as f64 / 80.0;
            let p = d.at(x).unwrap();
            assert!((p - closed_form_n1(x)).abs() < 1e-8, "x = {x}: {p} vs {}", closed_form_n1(x));
        }
    }

    #[test]
    fn density_n1_small_x_law() {
        let d = ValueDensity::new(1, DensityOptions::default()).unwrap();
        let x = 1e-8;
        let scaled = d.at(x).unwrap() * x.sqrt();
        assert!((scaled - h_small_x(1).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn density_outside_support() {
        let d = ValueDensity::new(2, DensityOptions::default()).unwrap();
        assert_eq!(d.at(16.0).unwrap(), 0.0);
        assert_eq!(d.at(100.0).unwrap(), 0.0);
        assert!(d.at(0.0).is_err());
        assert!(d.at(-1.0).is_err());
        assert!(density_po(2, 1.0, &DensityOptions { contour_c: -0.6, ..Default::default() }).is_err());
    }

    #[test]
    fn density_normalization_n5() {
        let d = ValueDensity::new(5, DensityOptions::default()).unwrap();
        let mass = d.mellin_moment(0.0).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn grid_rejects_points_outside_support() {
        assert!(density_grid(1, &[1.0, 5.0], &DensityOptions::default()).is_err());
        let g = density_grid(1, &[1.0, 2.0, 3.0], &DensityOptions::default()).unwrap();
        assert_eq!(g.len(), 3);
        assert!(DensityGrid::new(1, vec![2.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn mellin_round_trip() {
        for &n in &[1u32, 5, 20] {
            let d = ValueDensity::new(n, DensityOptions::default()).unwrap();
            let got = d.mellin_moments(&[0.0, 1.0, 2.0]).unwrap();
            for (k, &value) in got.iter().enumerate() {
                let want = moment_so_even_real(n, k as f64).unwrap();
                assert!(((value - want) / want).abs() < 1e-6, "N = {n}, k = {k}: {value} vs {want}");
            }
        }
    }

    #[test]
    fn density_matches_vertical_line_trapezoid() {
        // plain trapezoid on Re s = 1/4; the integrand decays like t^{-N(N-1/2)}
        let n = 6;
        let m = SoEvenMoments::new(n).unwrap();
        let d = ValueDensity::new(n, DensityOptions::default()).unwrap();
        for &x in &[1e-3, 0.5, 30.0, 900.0] {
            let (c, h) = (0.25, 0.005);
            let mut sum = 0.0;
            for i in 0..=12_000 {
                let s = Complex64::new(c, i as f64 * h);
                let term = (m.moment(s).unwrap() * Complex64::new(x, 0.0).powc(-s)).re;
                sum += if i == 0 { 0.5 * term } else { term };
            }
            let oracle = sum * h / (PI * x);
            let ours = d.at(x).unwrap();
            assert!((ours - oracle).abs() < 1e-9 * (1.0 + oracle), "x = {x}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn density_independent_of_contour_placement() {
        let saddle = ValueDensity::new(3, DensityOptions::default()).unwrap();
        let fixed = ValueDensity::new(3, DensityOptions { saddle_contour: false, ..Default::default() }).unwrap();
        for &x in &[1e-4, 0.3, 7.0, 60.0] {
            let (a, b) = (saddle.at(x).unwrap(), fixed.at(x).unwrap());
            assert!((a - b).abs() < 1e-10 * (1.0 + a), "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn density_is_nonnegative() {
        let d = ValueDensity::new(4, DensityOptions::default()).unwrap();
        for i in 1..200 {
            let x = 256.0 * i as f64 / 200.0;
            assert!(d.at(x).unwrap() >= -1e-9, "x = {x}");
        }
    }

    #[test]
    fn h2_matches_small_x_fit() {
        let d = ValueDensity::new(2, DensityOptions::default()).unwrap();
        let h = h_small_x(2).unwrap();
        for &x in &[1e-6, 1e-5, 1e-4] {
            let scaled = d.at(x).unwrap() * f64::sqrt(x);
            assert!(((scaled - h) / h).abs() < 2e-2, "x = {x}: {scaled} vs {h}");
        }
    }

    #[test]
    fn cdf_small_x_matches_quadrature_n20() {
        let d = ValueDensity::new(20, DensityOptions::default()).unwrap();
        let x = 1e-6;
        let numeric = d.weighted_mass(0.0, 0.0, x).unwrap();
        let law = cdf_small_x(20, x).unwrap().value;
        assert!(((law - numeric) / numeric).abs() < 2e-2, "{law} vs {numeric}");
    }
}
