use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CurveError, EllipticCurveData, Result};
use crate::sieve::is_prime;

/// Primes at or above this use baby-step giant-step counting.
const BSGS_THRESHOLD: u64 = 1000;

/// `a_p = p + 1 − #E(F_p)`, counting points on the reduction of the stored
/// model. At bad primes this gives 1, −1 or 0 for split, non-split and
/// additive reduction.
pub fn ap_point_count(curve: &EllipticCurveData, p: u64) -> Result<i64> {
    if !is_prime(p) {
        return Err(CurveError::NotPrime(p));
    }
    if p >= BSGS_THRESHOLD && curve.has_good_reduction(p) && curve.discriminant() % p as i128 != 0 {
        return Ok(ap_bsgs(curve, p));
    }
    Ok(ap_naive(curve, p))
}

fn reduce(v: i128, p: u64) -> u64 {
    v.rem_euclid(p as i128) as u64
}

/// Character sum count; `O(p)`.
pub fn ap_naive(curve: &EllipticCurveData, p: u64) -> i64 {
    if p == 2 {
        let [a1, a2, a3, a4, a6] = curve.ainvs;
        let mut count = 1;
        for x in 0..2i64 {
            for y in 0..2i64 {
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if (lhs - rhs).rem_euclid(2) == 0 {
                    count += 1;
                }
            }
        }
        return 3 - count;
    }
    // (2y + a1 x + a3)² = 4x³ + b2 x² + 2 b4 x + b6
    let (b2, b4, b6) = (reduce(curve.b2(), p), reduce(2 * curve.b4(), p), reduce(curve.b6(), p));
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for y in 1..=(p - 1) / 2 {
        chi[(y * y % p) as usize] = 1;
    }
    let mut sum = 0i64;
    for x in 0..p {
        let f = (((4 * x % p + b2) % p * x % p + b4) % p * x % p + b6) % p;
        sum += i64::from(chi[f as usize]);
    }
    -sum
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Point {
    Infinity,
    Affine(u64, u64),
}

/// Arithmetic on `y² = x³ + a x + b` over `F_p`.
struct ShortCurve {
    a: u64,
    p: u64,
}

fn mul_mod(x: u64, y: u64, p: u64) -> u64 {
    ((x as u128 * y as u128) % p as u128) as u64
}

fn inv_mod(x: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, x as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p as i128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

impl ShortCurve {
    fn neg(&self, pt: Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x, (self.p - y) % self.p),
        }
    }

    fn add(&self, u: Point, v: Point) -> Point {
        let p = self.p;
        match (u, v) {
            (Point::Infinity, q) | (q, Point::Infinity) => q,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => {
                let lambda = if x1 == x2 {
                    if (y1 + y2) % p == 0 {
                        return Point::Infinity;
                    }
                    let num = (3 * mul_mod(x1, x1, p) + self.a) % p;
                    mul_mod(num, inv_mod(2 * y1 % p, p), p)
                } else {
                    mul_mod((y2 + p - y1) % p, inv_mod((x2 + p - x1) % p, p), p)
                };
                let x3 = (mul_mod(lambda, lambda, p) + 2 * p - x1 - x2) % p;
                let y3 = (mul_mod(lambda, (x1 + p - x3) % p, p) + p - y1) % p;
                Point::Affine(x3, y3)
            }
        }
    }

    fn mul(&self, pt: Point, mut k: u64) -> Point {
        let mut acc = Point::Infinity;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// All `m ∈ [lo, hi]` with `[m] pt = O`.
    fn annihilators(&self, pt: Point, lo: u64, hi: u64) -> Vec<u64> {
        let width = hi - lo + 1;
        let s = (width as f64).sqrt().ceil() as u64;
        let mut baby = HashMap::with_capacity(s as usize);
        let mut q = Point::Infinity;
        for j in 0..s {
            if j > 0 && q == Point::Infinity {
                // order j is below the step size
                let first = lo.div_ceil(j) * j;
                return (first..=hi).step_by(j as usize).collect();
            }
            baby.insert(q, j);
            q = self.add(q, pt);
        }
        let step = self.mul(pt, s);
        let mut giant = self.mul(pt, lo);
        let mut out = Vec::new();
        let mut base = lo;
        while base <= hi {
            if let Some(&j) = baby.get(&self.neg(giant)) {
                let m = base + j;
                if m <= hi {
                    out.push(m);
                }
            }
            giant = self.add(giant, step);
            base += s;
        }
        out
    }
}

fn legendre(v: u64, p: u64) -> i32 {
    match pow_mod(v, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Mestre's baby-step giant-step count for `p ≥ 5` of good reduction; falls
/// back to [`ap_naive`] if the order search does not isolate a single value.
pub fn ap_bsgs(curve: &EllipticCurveData, p: u64) -> i64 {
    // y² = x³ − 27 c4 x − 54 c6
    let a = reduce(-27 * curve.c4(), p);
    let b = reduce(-54 * curve.c6(), p);
    let width = {
        let mut w = (2.0 * (p as f64).sqrt()) as u64;
        while (w + 1) * (w + 1) <= 4 * p {
            w += 1;
        }
        while w * w > 4 * p {
            w -= 1;
        }
        w
    };
    let (lo, hi) = (p + 1 - width, p + 1 + width);
    let mut candidates: Vec<u64> = (lo..=hi).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    for _ in 0..64 {
        let x = rng.gen_range(0..p);
        let f = (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(a, x, p) + b) % p;
        if f == 0 {
            continue;
        }
        // (x f, f²) lies on y² = X³ + a f² X + b f³, the twist of E by f
        let f2 = mul_mod(f, f, p);
        let twisted = ShortCurve { a: mul_mod(a, f2, p), p };
        let point = Point::Affine(mul_mod(x, f, p), f2);
        let quadratic = legendre(f, p) == 1;
        let hits = twisted.annihilators(point, lo, hi);
        candidates.retain(|&n| {
            let target = if quadratic { n } else { 2 * p + 2 - n };
            hits.binary_search(&target).is_ok()
        });
        if candidates.len() == 1 {
            return p as i64 + 1 - candidates[0] as i64;
        }
    }
    ap_naive(curve, p)
}
