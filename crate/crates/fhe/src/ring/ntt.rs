//! Negacyclic number-theoretic transform over a prime modulus.
//!
//! Iterative radix-2 with precomputed twiddle tables in bit-reversed order,
//! using a primitive 2n-th root of unity. Tables are built once per (n, q)
//! and live in the scheme context.

use crate::error::{FheError, Result};
use crate::ring::modulus::Modulus;

/// Precomputed twiddles for one (degree, prime) pair.
#[derive(Debug, Clone)]
pub struct NttTable {
    n: usize,
    modulus: Modulus,
    /// psi^bitrev(i), Shoup-paired.
    psi_rev: Vec<(u64, u64)>,
    /// psi^{-bitrev(i)}, Shoup-paired.
    psi_inv_rev: Vec<(u64, u64)>,
    n_inv: (u64, u64),
}

#[inline]
fn shoup_pair(w: u64, q: u64) -> (u64, u64) {
    (w, (((w as u128) << 64) / q as u128) as u64)
}

/// r = w*a mod q given the Shoup precomputation of w. Requires q < 2^63.
#[inline]
fn mul_shoup(a: u64, (w, w_shoup): (u64, u64), q: u64) -> u64 {
    let hi = ((w_shoup as u128 * a as u128) >> 64) as u64;
    let r = w.wrapping_mul(a).wrapping_sub(hi.wrapping_mul(q));
    if r >= q {
        r - q
    } else {
        r
    }
}

fn bit_reverse(x: usize, log_n: u32) -> usize {
    x.reverse_bits() >> (usize::BITS - log_n)
}

impl NttTable {
    pub fn new(n: usize, modulus: Modulus) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(FheError::UnsupportedParameters(format!(
                "ring degree {n} is not a power of two"
            )));
        }
        if !modulus.is_ntt_friendly() {
            return Err(FheError::UnsupportedParameters(format!(
                "modulus {} is not 1 mod 2n for n = {n}",
                modulus.value()
            )));
        }
        let psi = find_primitive_2n_root(&modulus, n)?;
        let psi_inv = modulus.inv(psi);
        let q = modulus.value();
        let log_n = n.trailing_zeros();

        let mut psi_rev = vec![(0u64, 0u64); n];
        let mut psi_inv_rev = vec![(0u64, 0u64); n];
        let mut pow = 1u64;
        let mut pow_inv = 1u64;
        for i in 0..n {
            let r = bit_reverse(i, log_n);
            psi_rev[r] = shoup_pair(pow, q);
            psi_inv_rev[r] = shoup_pair(pow_inv, q);
            pow = modulus.mul(pow, psi);
            pow_inv = modulus.mul(pow_inv, psi_inv);
        }
        let n_inv = shoup_pair(modulus.inv(n as u64), q);
        Ok(NttTable {
            n,
            modulus,
            psi_rev,
            psi_inv_rev,
            n_inv,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// In-place forward negacyclic NTT (Cooley-Tukey, natural -> bit-reversed).
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.modulus.value();
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t /= 2;
            for i in 0..m {
                let j1 = 2 * i * t;
                let s = self.psi_rev[m + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = mul_shoup(a[j + t], s, q);
                    a[j] = self.modulus.add(u, v);
                    a[j + t] = self.modulus.sub(u, v);
                }
            }
            m *= 2;
        }
    }

    /// In-place inverse negacyclic NTT (Gentleman-Sande, bit-reversed -> natural).
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.modulus.value();
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m / 2;
            let mut j1 = 0;
            for i in 0..h {
                let s = self.psi_inv_rev[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = self.modulus.add(u, v);
                    a[j + t] = mul_shoup(self.modulus.sub(u, v), s, q);
                }
                j1 += 2 * t;
            }
            t *= 2;
            m = h;
        }
        for x in a.iter_mut() {
            *x = mul_shoup(*x, self.n_inv, q);
        }
    }
}

fn find_primitive_2n_root(modulus: &Modulus, n: usize) -> Result<u64> {
    let q = modulus.value();
    let order = 2 * n as u64;
    debug_assert_eq!((q - 1) % order, 0);
    let cofactor = (q - 1) / order;
    for base in 2..q {
        let cand = modulus.pow(base, cofactor);
        // Primitive iff cand^n = -1.
        if modulus.pow(cand, n as u64) == q - 1 {
            return Ok(cand);
        }
    }
    Err(FheError::UnsupportedParameters(format!(
        "no primitive {order}-th root of unity mod {q}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn table(n: usize, q: u64) -> NttTable {
        NttTable::new(n, Modulus::new(q, n).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_small_prime() {
        let t = table(8, 17); // 17 = 1 mod 16
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a: Vec<u64> = (0..8).map(|_| rng.gen_range(0..17)).collect();
            let mut b = a.clone();
            t.forward(&mut b);
            t.inverse(&mut b);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn round_trip_large_prime() {
        for n in [8usize, 64, 256, 1024] {
            let q = crate::ring::modulus::generate_primes(54, 2 * n as u64, 1, &[]).unwrap()[0];
            let t = table(n, q);
            let mut rng = ChaCha20Rng::seed_from_u64(2);
            let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let mut b = a.clone();
            t.forward(&mut b);
            t.inverse(&mut b);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn zero_is_fixed_point() {
        let t = table(16, 97); // 97 = 1 mod 32
        let mut a = vec![0u64; 16];
        t.forward(&mut a);
        assert!(a.iter().all(|&x| x == 0));
        t.inverse(&mut a);
        assert!(a.iter().all(|&x| x == 0));
    }

    #[test]
    fn rejects_non_ntt_friendly_modulus() {
        // 19 is prime but 19 mod 16 != 1.
        let m = Modulus::new(19, 8).unwrap();
        assert!(NttTable::new(8, m).is_err());
    }
}
