//! CRT composition over a modulus chain and base-2^w digit decomposition.
//!
//! Chains are kept small enough that the composed modulus fits in u128;
//! composition is only used at decryption scaling, decomposition, and
//! diagnostics, never in per-coefficient hot loops of add/mul.

use crate::error::{FheError, Result};
use crate::ring::element::{Domain, RingElement};
use crate::ring::modulus::Modulus;

/// Precomputed CRT data for one prefix of a modulus chain.
#[derive(Debug, Clone)]
pub struct CrtContext {
    moduli: Vec<Modulus>,
    /// q = product of the primes.
    q: u128,
    /// m_i = q / q_i.
    punctured: Vec<u128>,
    /// (m_i mod q_i)^{-1} mod q_i.
    inverses: Vec<u64>,
}

impl CrtContext {
    pub fn new(moduli: &[Modulus]) -> Result<Self> {
        let mut q: u128 = 1;
        for m in moduli {
            q = q.checked_mul(m.value() as u128).ok_or_else(|| {
                FheError::UnsupportedParameters("modulus chain product exceeds u128".into())
            })?;
        }
        if q.leading_zeros() == 0 {
            return Err(FheError::UnsupportedParameters(
                "modulus chain product must stay below 2^127".into(),
            ));
        }
        let punctured: Vec<u128> = moduli.iter().map(|m| q / m.value() as u128).collect();
        let inverses = moduli
            .iter()
            .zip(&punctured)
            .map(|(m, &p)| m.inv(m.reduce_u128(p)))
            .collect();
        Ok(CrtContext {
            moduli: moduli.to_vec(),
            q,
            punctured,
            inverses,
        })
    }

    pub fn modulus_product(&self) -> u128 {
        self.q
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    /// Compose one coefficient's residues into its value in [0, q).
    pub fn compose(&self, residues: &[u64]) -> u128 {
        debug_assert_eq!(residues.len(), self.moduli.len());
        let mut acc: u128 = 0;
        for i in 0..residues.len() {
            let r = self.moduli[i].mul(residues[i], self.inverses[i]);
            // punctured * r < q * q_i <= 2^127 per term; accumulate mod q.
            acc = (acc + self.punctured[i] % self.q * r as u128 % self.q) % self.q;
        }
        acc
    }

    /// Compose into the centered representative in (-q/2, q/2].
    pub fn compose_centered(&self, residues: &[u64]) -> i128 {
        let x = self.compose(residues);
        if x > self.q / 2 {
            x as i128 - self.q as i128
        } else {
            x as i128
        }
    }

    /// Coefficient-wise composition of a coefficient-domain element.
    pub fn compose_element(&self, el: &RingElement) -> Result<Vec<u128>> {
        if el.domain() != Domain::Coefficient {
            return Err(FheError::Domain { expected: "coefficient", got: "ntt" });
        }
        if el.moduli() != self.moduli.as_slice() {
            return Err(FheError::ParameterMismatch(
                "element chain does not match CRT context".into(),
            ));
        }
        let n = el.degree();
        let rows = el.residues();
        let mut scratch = vec![0u64; rows.len()];
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            for (i, row) in rows.iter().enumerate() {
                scratch[i] = row[j];
            }
            out.push(self.compose(&scratch));
        }
        Ok(out)
    }

    pub fn compose_element_centered(&self, el: &RingElement) -> Result<Vec<i128>> {
        let vals = self.compose_element(el)?;
        let half = self.q / 2;
        Ok(vals
            .into_iter()
            .map(|x| if x > half { x as i128 - self.q as i128 } else { x as i128 })
            .collect())
    }
}

/// Digit count for base-2^w decomposition of this chain's modulus.
pub fn digit_count(total_modulus_bits: u32, base_bits: u32) -> usize {
    total_modulus_bits.div_ceil(base_bits) as usize
}

/// Decompose a coefficient-domain element into base-2^base_bits digits:
/// a = sum_j d_j * 2^(j*base_bits) with every digit coefficient < 2^base_bits.
pub fn base_decompose(
    a: &RingElement,
    base_bits: u32,
    crt: &CrtContext,
) -> Result<Vec<RingElement>> {
    if !(1..=60).contains(&base_bits) {
        return Err(FheError::UnsupportedParameters(format!(
            "base_bits {base_bits} outside [1, 60]"
        )));
    }
    let values = crt.compose_element(a)?;
    let total_bits = 128 - crt.modulus_product().leading_zeros();
    let k = digit_count(total_bits, base_bits);
    let mask: u128 = (1u128 << base_bits) - 1;
    let n = a.degree();
    let moduli = a.moduli();
    let mut digits = vec![RingElement::zero(n, moduli, Domain::Coefficient); k];
    for (j, &x) in values.iter().enumerate() {
        for (d, digit) in digits.iter_mut().enumerate() {
            let part = ((x >> (d as u32 * base_bits)) & mask) as u64;
            for (i, m) in moduli.iter().enumerate() {
                digit.residues_mut()[i][j] = m.reduce(part);
            }
        }
    }
    Ok(digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::modulus::generate_primes;
    use crate::ring::sampler::Sampler;

    fn chain(n: usize) -> Vec<Modulus> {
        generate_primes(30, 2 * n as u64, 2, &[])
            .unwrap()
            .into_iter()
            .map(|q| Modulus::new(q, n).unwrap())
            .collect()
    }

    #[test]
    fn compose_round_trips_through_residues() {
        let n = 16;
        let moduli = chain(n);
        let crt = CrtContext::new(&moduli).unwrap();
        let mut s = Sampler::from_seed([3u8; 32]);
        let el = s.uniform(n, &moduli, Domain::Coefficient);
        let vals = crt.compose_element(&el).unwrap();
        for (j, &v) in vals.iter().enumerate() {
            for (i, m) in moduli.iter().enumerate() {
                assert_eq!((v % m.value() as u128) as u64, el.residues()[i][j]);
            }
        }
    }

    #[test]
    fn recomposition_identity() {
        let n = 16;
        let moduli = chain(n);
        let crt = CrtContext::new(&moduli).unwrap();
        let mut s = Sampler::from_seed([4u8; 32]);
        for _ in 0..1000 {
            let el = s.uniform(n, &moduli, Domain::Coefficient);
            let digits = base_decompose(&el, 7, &crt).unwrap();
            // Recompose sum d_j * 2^(7 j) and compare against the original.
            let vals = crt.compose_element(&el).unwrap();
            for j in 0..n {
                let mut acc: u128 = 0;
                for (d, digit) in digits.iter().enumerate() {
                    let part = digit.residues()[0][j] as u128;
                    acc += part << (7 * d as u32);
                }
                assert_eq!(acc % crt.modulus_product(), vals[j]);
                assert_eq!(acc, vals[j]); // digits cover the full value exactly
            }
        }
    }

    #[test]
    fn zero_decomposes_to_zero_digits() {
        let n = 8;
        let moduli = chain(n);
        let crt = CrtContext::new(&moduli).unwrap();
        let z = RingElement::zero(n, &moduli, Domain::Coefficient);
        for d in base_decompose(&z, 16, &crt).unwrap() {
            assert!(d.is_zero());
        }
    }

    #[test]
    fn positional_decomposition() {
        let n = 8;
        let moduli = chain(n);
        let crt = CrtContext::new(&moduli).unwrap();
        let el = RingElement::from_signed_coeffs(n, &moduli, &[0x1_0000], Domain::Coefficient);
        let digits = base_decompose(&el, 16, &crt).unwrap();
        assert_eq!(digits[0].residues()[0][0], 0);
        assert_eq!(digits[1].residues()[0][0], 1);
        for d in &digits[2..] {
            assert_eq!(d.residues()[0][0], 0);
        }
    }

    #[test]
    fn digit_count_matches_contract() {
        assert_eq!(digit_count(108, 16), 7);
    }
}
