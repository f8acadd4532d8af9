use crate::sieve::squarefree_flags;

use super::{kronecker, EllipticCurveData};

/// `d ≡ 1 (mod 4)` squarefree, or `d = 4m` with `m ≡ 2, 3 (mod 4)` squarefree; `d ≠ 0, 1`.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let sf = |m: i64| crate::sieve::is_squarefree(m.unsigned_abs());
    match d.rem_euclid(4) {
        1 => sf(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && sf(m)
        }
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignFilter {
    Negative,
    Positive,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parity {
    Odd,
    #[default]
    All,
}

/// Constraints on the discriminants of a scan.
#[derive(Debug, Clone, Default)]
pub struct DiscriminantFilter {
    pub sign: SignFilter,
    pub parity: Parity,
    /// Keep only `d` with `gcd(d, coprime_to) = 1` (0 disables).
    pub coprime_to: u64,
    /// Keep only `d` with `w_E χ_d(−N) = +1` for this curve.
    pub even_sign_for: Option<EllipticCurveData>,
    /// Keep only `d` with `|d|` prime.
    pub prime_only: bool,
    /// Keep only `d` with `χ_d(p) = value`.
    pub character: Option<(u64, i32)>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl DiscriminantFilter {
    /// Whether a fundamental discriminant passes the non-structural constraints.
    pub fn accepts(&self, d: i64) -> bool {
        match self.sign {
            SignFilter::Negative if d > 0 => return false,
            SignFilter::Positive if d < 0 => return false,
            _ => {}
        }
        if self.parity == Parity::Odd && d % 2 == 0 {
            return false;
        }
        if self.coprime_to > 0 && gcd(d.unsigned_abs(), self.coprime_to) != 1 {
            return false;
        }
        if self.prime_only && !crate::sieve::is_prime(d.unsigned_abs()) {
            return false;
        }
        if let Some(curve) = &self.even_sign_for {
            let chi = kronecker(d, -(curve.conductor as i64));
            if i32::from(curve.root_number) * chi != 1 {
                return false;
            }
        }
        if let Some((p, value)) = self.character {
            if kronecker(d, p as i64) != value {
                return false;
            }
        }
        true
    }
}

/// Fundamental discriminants with `dmin ≤ |d| ≤ dmax` passing `filter`,
/// ascending in `|d|` with the negative one first on ties.
pub fn fundamental_discriminants(dmin: u64, dmax: u64, filter: &DiscriminantFilter) -> Vec<i64> {
    let sf = squarefree_flags(dmax as usize);
    let squarefree = |m: u64| sf[m as usize];
    let fundamental = |d: i64| -> bool {
        match d.rem_euclid(4) {
            1 => d != 1 && squarefree(d.unsigned_abs()),
            0 => {
                let m = d / 4;
                matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
            }
            _ => false,
        }
    };
    let mut out = Vec::new();
    for abs in dmin.max(1)..=dmax {
        for d in [-(abs as i64), abs as i64] {
            if fundamental(d) && filter.accepts(d) {
                out.push(d);
            }
        }
    }
    out
}
