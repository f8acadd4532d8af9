//! Prime, smallest-prime-factor and squarefree sieves.

/// Primes `≤ limit` in ascending order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime factor of every `n ≤ limit` (`spf[0] = spf[1] = 0`).
#[derive(Debug, Clone)]
pub struct SmallestPrimeFactor {
    spf: Vec<u32>,
}

impl SmallestPrimeFactor {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn get(&self, n: usize) -> u32 {
        self.spf[n]
    }

    /// `(p, e)` pairs of `n`, ascending in `p`.
    pub fn factor(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }
}

/// `flags[n]` is true when `n ≤ limit` is squarefree (`flags[0] = false`).
pub fn squarefree_flags(limit: usize) -> Vec<bool> {
    let mut flags = vec![true; limit + 1];
    flags[0] = false;
    let mut i = 2;
    while i * i <= limit {
        let sq = i * i;
        let mut j = sq;
        while j <= limit {
            flags[j] = false;
            j += sq;
        }
        i += 1;
    }
    flags
}

pub fn is_squarefree(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        if n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

/// Number of divisors of `n > 0`.
pub fn divisor_count(mut n: u64) -> u64 {
    let mut count = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        count *= e + 1;
        p += 1;
    }
    if n > 1 {
        count *= 2;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieves_agree_with_trial_division() {
        let primes = primes_up_to(1000);
        assert_eq!(primes.len(), 168);
        assert!(primes.iter().all(|&p| is_prime(p)));
        let spf = SmallestPrimeFactor::new(1000);
        let sf = squarefree_flags(1000);
        for n in 2..=1000usize {
            let f = spf.factor(n);
            assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n as u64);
            assert_eq!(sf[n], is_squarefree(n as u64), "n = {n}");
            let by_hand = (1..=n as u64).filter(|d| n as u64 % d == 0).count() as u64;
            assert_eq!(divisor_count(n as u64), by_hand);
        }
    }
}
