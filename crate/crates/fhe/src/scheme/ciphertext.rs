//! Ciphertexts: a sequence of ring elements plus scheme/level/scale metadata.

use crate::error::{FheError, Result};
use crate::ring::{Domain, RingElement};
use crate::scheme::params::Scheme;

#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub scheme: Scheme,
    /// >= 2 polynomials; freshly encrypted ciphertexts have exactly 2,
    /// a multiplication output has 3 until relinearized.
    pub polys: Vec<RingElement>,
    /// Index into the modulus chain; polys carry the active prefix.
    pub level: usize,
    /// CKKS encoding scale; 0.0 for the integer schemes.
    pub scale: f64,
    pub is_ntt_form: bool,
}

impl Ciphertext {
    pub fn new(
        scheme: Scheme,
        polys: Vec<RingElement>,
        level: usize,
        scale: f64,
    ) -> Result<Self> {
        if polys.len() < 2 {
            return Err(FheError::InvalidCiphertext(
                "ciphertext needs at least 2 polynomials".into(),
            ));
        }
        let domain = polys[0].domain();
        let moduli = polys[0].moduli().to_vec();
        for p in &polys {
            if p.domain() != domain || p.moduli() != moduli {
                return Err(FheError::InvalidCiphertext(
                    "ciphertext polynomials disagree on level or domain".into(),
                ));
            }
        }
        if moduli.len() != level + 1 {
            return Err(FheError::InvalidCiphertext(
                "active prime count does not match level".into(),
            ));
        }
        Ok(Ciphertext {
            scheme,
            is_ntt_form: domain == Domain::Ntt,
            polys,
            level,
            scale,
        })
    }

    pub fn size(&self) -> usize {
        self.polys.len()
    }

    pub fn degree(&self) -> usize {
        self.polys[0].degree()
    }
}
