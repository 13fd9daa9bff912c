//! Prime moduli and scalar modular arithmetic.

use crate::error::{FheError, Result};

/// A prime modulus for one RNS component of the ring R_q = Z_q[x]/(x^n+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    q: u64,
    /// q ≡ 1 (mod 2n) for the ring degree this modulus was created for.
    ntt_friendly: bool,
}

impl Modulus {
    /// `degree` is the ring degree n the modulus will be used with; the
    /// NTT-friendliness flag records whether q ≡ 1 (mod 2n).
    pub fn new(q: u64, degree: usize) -> Result<Self> {
        if q >= 1u64 << 62 {
            return Err(FheError::UnsupportedParameters(format!(
                "modulus {q} >= 2^62"
            )));
        }
        if !is_prime(q) {
            return Err(FheError::UnsupportedParameters(format!(
                "modulus {q} is not prime"
            )));
        }
        let ntt_friendly = q % (2 * degree as u64) == 1;
        Ok(Modulus { q, ntt_friendly })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn is_ntt_friendly(&self) -> bool {
        self.ntt_friendly
    }

    pub fn bits(&self) -> u32 {
        64 - self.q.leading_zeros()
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    /// Reduce an arbitrary u64 into [0, q).
    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    /// Reduce a signed value into [0, q).
    #[inline]
    pub fn reduce_i64(&self, a: i64) -> u64 {
        let r = a.rem_euclid(self.q as i64);
        r as u64
    }

    /// Reduce a signed 128-bit value into [0, q).
    #[inline]
    pub fn reduce_i128(&self, a: i128) -> u64 {
        a.rem_euclid(self.q as i128) as u64
    }

    /// Reduce an unsigned 128-bit value into [0, q).
    #[inline]
    pub fn reduce_u128(&self, a: u128) -> u64 {
        (a % self.q as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base = self.reduce(base);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; q is prime so a^{q-2} works for a != 0.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.q != 0);
        self.pow(a, self.q - 2)
    }

    /// Centered representative in (-q/2, q/2].
    #[inline]
    pub fn center(&self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }
}

/// Deterministic Miller-Rabin for u64 inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    // These witnesses are exact for all n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Generate `count` distinct primes of exactly `bits` bits with q ≡ 1 (mod step),
/// scanning downward from 2^bits. Skips any prime in `exclude`.
pub fn generate_primes(bits: u32, step: u64, count: usize, exclude: &[u64]) -> Result<Vec<u64>> {
    assert!(bits < 62 && bits > 1);
    let hi = 1u64 << bits;
    let lo = 1u64 << (bits - 1);
    // Largest candidate of the form k*step + 1 below 2^bits.
    let mut cand = (hi - 2) / step * step + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && cand > lo {
        if is_prime(cand) && !exclude.contains(&cand) && !out.contains(&cand) {
            out.push(cand);
        }
        cand -= step;
    }
    if out.len() < count {
        return Err(FheError::UnsupportedParameters(format!(
            "could not find {count} primes of {bits} bits with q = 1 mod {step}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small() {
        let primes = [2u64, 3, 5, 17, 65537, 2147565569];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        for c in [1u64, 4, 9, 15, 65536, 65535, 2147516417] {
            assert!(!is_prime(c), "{c}");
        }
    }

    #[test]
    fn generated_primes_are_ntt_friendly() {
        let ps = generate_primes(54, 2 * 4096, 3, &[]).unwrap();
        for p in ps {
            assert!(is_prime(p));
            assert_eq!(p % 8192, 1);
            assert_eq!(64 - p.leading_zeros(), 54);
        }
    }

    #[test]
    fn modulus_rejects_composite_and_oversized() {
        assert!(Modulus::new(15, 8).is_err());
        assert!(Modulus::new((1 << 62) + 1, 8).is_err());
    }

    #[test]
    fn scalar_arithmetic() {
        let m = Modulus::new(17, 2).unwrap();
        assert_eq!(m.add(5, 13), 1);
        assert_eq!(m.add(9, 10), 2);
        assert_eq!(m.sub(3, 5), 15);
        assert_eq!(m.mul(5, 7), 1);
        assert_eq!(m.inv(5), 7);
        assert_eq!(m.center(16), -1);
        assert_eq!(m.center(8), 8);
        assert_eq!(m.reduce_i64(-1), 16);
    }
}
