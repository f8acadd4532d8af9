use rayon::prelude::*;

use super::{LvalueError, Result};

/// Default cap on theta-table memory, in bytes.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;

/// Positive definite diagonal form `a x² + b y² + c z²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TernaryForm {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl TernaryForm {
    pub fn new(a: u64, b: u64, c: u64) -> Option<Self> {
        (a > 0 && b > 0 && c > 0).then_some(Self { a, b, c })
    }

    pub fn eval(&self, x: i64, y: i64, z: i64) -> u64 {
        self.a * (x * x) as u64 + self.b * (y * y) as u64 + self.c * (z * z) as u64
    }

    /// `r(n)` for `n ≤ t`, counting signed lattice points. With `odd_only`
    /// the entries for even `n` may be left incomplete.
    pub fn representation_counts(&self, t: u64, odd_only: bool, shards: usize) -> Vec<u32> {
        let (a, b, c) = (self.a, self.b, self.c);
        // odd values need y odd when a, c are even and b is odd
        let y_odd = odd_only && a % 2 == 0 && c % 2 == 0 && b % 2 == 1;
        let (y0, y_step) = if y_odd { (1u64, 2usize) } else { (0, 1) };
        let z_max = (t / c) as f64;
        let z_max = z_max.sqrt() as u64 + 1;
        let shards = shards.max(1);
        let partial: Vec<Vec<u32>> = (0..shards)
            .into_par_iter()
            .map(|shard| {
                let mut counts = vec![0u32; t as usize + 1];
                let mut z = shard as u64;
                while z <= z_max && c * z * z <= t {
                    let vz = c * z * z;
                    let wz = if z > 0 { 2 } else { 1 };
                    let mut y = y0;
                    while vz + b * y * y <= t {
                        let vyz = vz + b * y * y;
                        let wyz = wz * if y > 0 { 2 } else { 1 };
                        let mut x = 0u64;
                        let mut v = vyz;
                        while v <= t {
                            counts[v as usize] += wyz * if x > 0 { 2 } else { 1 };
                            // a(x+1)² − a x² = a(2x + 1)
                            v += a * (2 * x + 1);
                            x += 1;
                        }
                        y += y_step as u64;
                    }
                    z += shards as u64;
                }
                counts
            })
            .collect();
        let mut iter = partial.into_iter();
        let mut total = iter.next().unwrap_or_default();
        for shard in iter {
            for (t, s) in total.iter_mut().zip(shard) {
                *t += s;
            }
        }
        total
    }
}

/// The form pair and multiplier combined into `c(n) = r₁(n) − m·r₂(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaWiring {
    pub first: TernaryForm,
    pub second: TernaryForm,
    pub multiplier: i64,
}

impl Default for ThetaWiring {
    /// `2x² + y² + 8z²` against `2x² + y² + 32z²` with multiplier 2
    /// (odd `n`, twists of `y² = x³ − x`).
    fn default() -> Self {
        Self { first: TernaryForm { a: 2, b: 1, c: 8 }, second: TernaryForm { a: 2, b: 1, c: 32 }, multiplier: 2 }
    }
}

/// `c(n)` for odd `n ≤ t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable {
    t: u64,
    c: Vec<i32>,
}

impl ThetaTable {
    pub fn t(&self) -> u64 {
        self.t
    }

    /// `c(n)` for odd `n ≤ T`.
    pub fn get(&self, n: u64) -> Option<i64> {
        (n % 2 == 1 && n <= self.t).then(|| i64::from(self.c[n as usize]))
    }
}

/// Single sweep over all lattice points of both forms with value `≤ t`.
pub fn theta_coefficients_batch(wiring: &ThetaWiring, t: u64, memory_budget: u64) -> Result<ThetaTable> {
    let shards = rayon::current_num_threads().clamp(1, 8);
    let needed = (t + 1) * 4 * (shards as u64 + 2);
    if needed > memory_budget {
        return Err(LvalueError::MemoryBudget { t, needed, budget: memory_budget });
    }
    let r1 = wiring.first.representation_counts(t, true, shards);
    let r2 = wiring.second.representation_counts(t, true, shards);
    let c = r1
        .iter()
        .zip(&r2)
        .enumerate()
        .map(|(n, (&a, &b))| if n % 2 == 1 { a as i32 - wiring.multiplier as i32 * b as i32 } else { 0 })
        .collect();
    Ok(ThetaTable { t, c })
}
