//! Plaintext encodings: slot batching mod t (plaintext CRT via the negacyclic
//! NTT mod t) and the CKKS canonical embedding.

use num_complex::Complex64;

use crate::error::{FheError, Result};
use crate::scheme::context::Context;
use crate::scheme::plaintext::{PlainData, Plaintext};

impl Context {
    /// Slot-encode integers mod t. Slot-wise add/mul semantics hold under the
    /// homomorphic operations. Falls back to coefficient packing when t does
    /// not support batching and a single value is given.
    pub fn encode_integers(&self, values: &[u64]) -> Result<Plaintext> {
        let t = self.plain_modulus().ok_or_else(|| {
            FheError::SchemeMismatch { expected: "bfv/bgv", got: self.scheme().name() }
        })?;
        let n = self.degree();
        if values.len() > n {
            return Err(FheError::TooManyValues { given: values.len(), max: n });
        }
        let mut slots: Vec<u64> = values.iter().map(|&v| t.reduce(v)).collect();
        slots.resize(n, 0);
        match self.plain_ntt() {
            Some(table) => {
                // slots -> coefficients is the inverse plaintext NTT.
                table.inverse(&mut slots);
                Ok(Plaintext::integers(self.scheme(), slots, true, values.len()))
            }
            None if values.len() <= 1 => {
                Ok(Plaintext::integers(self.scheme(), slots, false, values.len()))
            }
            None => Err(FheError::EncodingUnsupported(format!(
                "t = {} is not prime with t = 1 mod 2n; only single-value coefficient packing available",
                t.value()
            ))),
        }
    }

    pub fn decode_integers(&self, pt: &Plaintext) -> Result<Vec<u64>> {
        let PlainData::Integers { coeffs, slot_encoded } = &pt.data else {
            return Err(FheError::SchemeMismatch { expected: "bfv/bgv", got: "ckks" });
        };
        if *slot_encoded {
            let table = self.plain_ntt().ok_or_else(|| {
                FheError::EncodingUnsupported("no batching table for this context".into())
            })?;
            let mut slots = coeffs.clone();
            table.forward(&mut slots);
            Ok(slots)
        } else {
            Ok(coeffs.clone())
        }
    }

    /// CKKS encoding: values (up to n/2 complex numbers) are placed at the
    /// odd powers of the 2n-th root of unity; coefficients are the scaled,
    /// rounded inverse canonical embedding.
    pub fn ckks_encode_complex(&self, values: &[Complex64], scale: f64) -> Result<Plaintext> {
        let emb = self.ckks_embedding().ok_or_else(|| {
            FheError::SchemeMismatch { expected: "ckks", got: self.scheme().name() }
        })?;
        let n = self.degree();
        if values.len() > n / 2 {
            return Err(FheError::TooManyValues { given: values.len(), max: n / 2 });
        }
        if scale <= 1.0 {
            return Err(FheError::UnsupportedParameters("scale must exceed 1".into()));
        }
        // Headroom check: encoded coefficients must stay well below q/2.
        let q_bits = self.chain().product_bits_at(self.top_level());
        let max_mag = values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if (max_mag.max(1.0) * scale).log2() + 2.0 > (q_bits - 1) as f64 {
            return Err(FheError::EncodingOverflow(format!(
                "scale {scale:e} too large for the active {q_bits}-bit modulus"
            )));
        }

        // c_k = (2/n) Re( e^{-i pi k/n} * DFT_n(zero-padded scaled values)_k ).
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, v) in values.iter().enumerate() {
            buf[j] = v * scale;
        }
        emb.fft_forward.process(&mut buf);
        let coeffs: Vec<i128> = (0..n)
            .map(|k| {
                let c = (emb.twist[k] * buf[k]).re * 2.0 / n as f64;
                c.round() as i128
            })
            .collect();
        Ok(Plaintext::reals(coeffs, scale, values.len()))
    }

    pub fn ckks_encode(&self, values: &[f64], scale: f64) -> Result<Plaintext> {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.ckks_encode_complex(&v, scale)
    }

    pub fn ckks_decode_complex(&self, pt: &Plaintext) -> Result<Vec<Complex64>> {
        let emb = self.ckks_embedding().ok_or_else(|| {
            FheError::SchemeMismatch { expected: "ckks", got: self.scheme().name() }
        })?;
        let PlainData::Reals { coeffs, scale } = &pt.data else {
            return Err(FheError::SchemeMismatch { expected: "ckks", got: "bfv/bgv" });
        };
        let n = self.degree();
        // z_j = sum_k c_k e^{i pi k (2j+1)/n} = IDFT_n(c_k e^{i pi k/n})_j (unnormalized).
        let mut buf: Vec<Complex64> = (0..n)
            .map(|k| emb.untwist[k] * Complex64::new(coeffs[k] as f64, 0.0))
            .collect();
        emb.fft_inverse.process(&mut buf);
        Ok(buf[..n / 2].iter().map(|z| z / *scale).collect())
    }

    pub fn ckks_decode(&self, pt: &Plaintext) -> Result<Vec<f64>> {
        Ok(self.ckks_decode_complex(pt)?.iter().map(|z| z.re).collect())
    }

    pub fn default_scale(&self) -> f64 {
        self.params().scale()
    }
}
