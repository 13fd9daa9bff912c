//! Deterministic randomness for keys, encryption, and errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::ring::element::{Domain, RingElement};
use crate::ring::modulus::Modulus;

pub const DEFAULT_ERROR_STDDEV: f64 = 3.2;

/// Seedable sampler for one party. Same seed, same stream.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha20Rng,
    error_stddev: f64,
    error_bound: i64,
}

impl Sampler {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        Sampler::with_stddev(seed, DEFAULT_ERROR_STDDEV)
    }

    pub fn with_stddev(seed: [u8; 32], error_stddev: f64) -> Self {
        Sampler {
            rng: ChaCha20Rng::from_seed(seed),
            error_stddev,
            error_bound: (6.0 * error_stddev).ceil() as i64,
        }
    }

    /// Derive an independent child sampler, e.g. one per party per transaction.
    pub fn derive(&self, label: &[u8]) -> Sampler {
        let mut h = Sha256::new();
        h.update(self.rng.get_seed());
        h.update([0x43]);
        h.update(label);
        Sampler::with_stddev(h.finalize().into(), self.error_stddev)
    }

    pub fn error_bound(&self) -> i64 {
        self.error_bound
    }

    /// Uniform element over the active primes, in the requested domain
    /// (independent uniform residues are uniform in either domain).
    pub fn uniform(&mut self, n: usize, moduli: &[Modulus], domain: Domain) -> RingElement {
        let mut el = RingElement::zero(n, moduli, domain);
        for (row, m) in el.residues_mut().iter_mut().zip(moduli) {
            for x in row.iter_mut() {
                *x = self.rng.gen_range(0..m.value());
            }
        }
        el
    }

    /// Ternary polynomial with coefficients uniform over {-1, 0, 1}.
    pub fn ternary(&mut self, n: usize, moduli: &[Modulus]) -> RingElement {
        let coeffs = self.ternary_coeffs(n);
        RingElement::from_signed_coeffs(n, moduli, &coeffs, Domain::Coefficient)
    }

    pub fn ternary_coeffs(&mut self, n: usize) -> Vec<i64> {
        (0..n).map(|_| self.rng.gen_range(-1i64..=1)).collect()
    }

    /// Rounded centered Gaussian error, rejection-sampled beyond 6 sigma.
    pub fn error(&mut self, n: usize, moduli: &[Modulus]) -> RingElement {
        let coeffs = self.error_coeffs(n);
        RingElement::from_signed_coeffs(n, moduli, &coeffs, Domain::Coefficient)
    }

    pub fn error_coeffs(&mut self, n: usize) -> Vec<i64> {
        let normal = Normal::new(0.0, self.error_stddev).expect("valid stddev");
        (0..n)
            .map(|_| loop {
                let x = normal.sample(&mut self.rng);
                if x.abs() <= 6.0 * self.error_stddev {
                    return x.round() as i64;
                }
            })
            .collect()
    }

    pub fn gen_bytes(&mut self, out: &mut [u8]) {
        self.rng.fill(out);
    }

    pub fn gen_u64(&mut self) -> u64 {
        self.rng.gen()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::modulus::Modulus;

    fn moduli() -> Vec<Modulus> {
        vec![Modulus::new(97, 16).unwrap()]
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = Sampler::from_seed([42u8; 32]);
        let mut b = Sampler::from_seed([42u8; 32]);
        let m = moduli();
        assert_eq!(a.uniform(16, &m, Domain::Coefficient), b.uniform(16, &m, Domain::Coefficient));
        assert_eq!(a.ternary_coeffs(16), b.ternary_coeffs(16));
        assert_eq!(a.error_coeffs(16), b.error_coeffs(16));
    }

    #[test]
    fn derived_children_differ() {
        let s = Sampler::from_seed([7u8; 32]);
        let mut a = s.derive(b"party-a");
        let mut b = s.derive(b"party-b");
        assert_ne!(a.error_coeffs(64), b.error_coeffs(64));
    }

    #[test]
    fn error_coeffs_bounded() {
        let mut s = Sampler::from_seed([1u8; 32]);
        let bound = s.error_bound();
        let coeffs = s.error_coeffs(100_000);
        assert!(coeffs.iter().all(|c| c.abs() <= bound));
    }

    #[test]
    fn ternary_histogram_near_uniform() {
        let mut s = Sampler::from_seed([2u8; 32]);
        let mut counts = [0usize; 3];
        let draws = 1_000_000;
        for c in s.ternary_coeffs(draws) {
            counts[(c + 1) as usize] += 1;
        }
        // Uniform over {-1,0,1}: expect one third each, within 1%.
        let expect = draws as f64 / 3.0;
        for c in counts {
            assert!((c as f64 - expect).abs() / draws as f64 <= 0.01, "{counts:?}");
        }
    }
}
