//! Plaintexts for the integer schemes (coefficients mod t) and CKKS
//! (scaled integer coefficients from the canonical embedding).

use crate::scheme::params::Scheme;

#[derive(Debug, Clone, PartialEq)]
pub enum PlainData {
    /// BFV/BGV: n coefficients in [0, t), either raw or slot-encoded.
    Integers { coeffs: Vec<u64>, slot_encoded: bool },
    /// CKKS: n signed coefficients carrying values at `scale`.
    Reals { coeffs: Vec<i128>, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plaintext {
    pub scheme: Scheme,
    pub data: PlainData,
    /// Logical payload length (values occupied before padding).
    pub len: usize,
}

impl Plaintext {
    pub fn integers(scheme: Scheme, coeffs: Vec<u64>, slot_encoded: bool, len: usize) -> Self {
        debug_assert!(matches!(scheme, Scheme::Bfv | Scheme::Bgv));
        Plaintext {
            scheme,
            data: PlainData::Integers { coeffs, slot_encoded },
            len,
        }
    }

    pub fn reals(coeffs: Vec<i128>, scale: f64, len: usize) -> Self {
        Plaintext {
            scheme: Scheme::Ckks,
            data: PlainData::Reals { coeffs, scale },
            len,
        }
    }

    pub fn scale(&self) -> f64 {
        match &self.data {
            PlainData::Reals { scale, .. } => *scale,
            _ => 0.0,
        }
    }
}
