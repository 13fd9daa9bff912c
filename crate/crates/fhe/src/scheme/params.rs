//! Encryption parameters and the desk/paper presets.

use crate::error::{FheError, Result};
use crate::ring::sampler::DEFAULT_ERROR_STDDEV;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Bfv,
    Bgv,
    Ckks,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Bfv => "bfv",
            Scheme::Bgv => "bgv",
            Scheme::Ckks => "ckks",
        }
    }

    pub fn from_name(s: &str) -> Result<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "bfv" => Ok(Scheme::Bfv),
            "bgv" => Ok(Scheme::Bgv),
            "ckks" => Ok(Scheme::Ckks),
            other => Err(FheError::UnsupportedParameters(format!(
                "unknown scheme {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Small functional parameters for development machines: n = 4096.
    Desk,
    /// n = 16384, matching the measured setup's polynomial modulus degree.
    Paper,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }

    pub fn from_name(s: &str) -> Result<Preset> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(FheError::UnsupportedParameters(format!(
                "unknown preset {other}"
            ))),
        }
    }
}

pub const DEFAULT_PLAIN_MODULUS: u64 = 65537;
pub const DEFAULT_RELIN_BASE_BITS: u32 = 16;
/// CKKS chains carry rescaling primes sized to the scale.
pub const CKKS_SCALE_BITS: u32 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct EncryptionParameters {
    pub scheme: Scheme,
    pub n: usize,
    /// Bit sizes of the chain primes q_0 ... q_L (concrete primes are chosen
    /// at context creation).
    pub coeff_modulus_bits: Vec<u32>,
    /// Plaintext modulus t (BFV/BGV).
    pub plain_modulus: Option<u64>,
    /// Encoding scale 2^scale_bits (CKKS).
    pub scale_bits: Option<u32>,
    pub error_stddev: f64,
    pub relin_base_bits: u32,
    pub preset: Option<Preset>,
}

impl EncryptionParameters {
    pub fn preset(scheme: Scheme, preset: Preset) -> Self {
        let n = match preset {
            Preset::Desk => 4096,
            Preset::Paper => 16384,
        };
        let p = match scheme {
            Scheme::Bfv | Scheme::Bgv => EncryptionParameters {
                scheme,
                n,
                coeff_modulus_bits: vec![54, 54],
                plain_modulus: Some(DEFAULT_PLAIN_MODULUS),
                scale_bits: None,
                error_stddev: DEFAULT_ERROR_STDDEV,
                relin_base_bits: DEFAULT_RELIN_BASE_BITS,
                preset: Some(preset),
            },
            Scheme::Ckks => EncryptionParameters {
                scheme,
                n,
                coeff_modulus_bits: vec![46, CKKS_SCALE_BITS, CKKS_SCALE_BITS],
                plain_modulus: None,
                scale_bits: Some(CKKS_SCALE_BITS),
                error_stddev: DEFAULT_ERROR_STDDEV,
                relin_base_bits: DEFAULT_RELIN_BASE_BITS,
                preset: Some(preset),
            },
        };
        p.validate().expect("preset parameters are valid");
        p
    }

    pub fn custom(
        scheme: Scheme,
        n: usize,
        coeff_modulus_bits: Vec<u32>,
        plain_modulus: Option<u64>,
        scale_bits: Option<u32>,
    ) -> Result<Self> {
        let p = EncryptionParameters {
            scheme,
            n,
            coeff_modulus_bits,
            plain_modulus,
            scale_bits,
            error_stddev: DEFAULT_ERROR_STDDEV,
            relin_base_bits: DEFAULT_RELIN_BASE_BITS,
            preset: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn scale(&self) -> f64 {
        (self.scale_bits.unwrap_or(0) as f64).exp2()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 8 {
            return Err(FheError::UnsupportedParameters(format!(
                "degree {} must be a power of two >= 8",
                self.n
            )));
        }
        if self.coeff_modulus_bits.is_empty() {
            return Err(FheError::UnsupportedParameters(
                "empty coefficient modulus".into(),
            ));
        }
        if self.coeff_modulus_bits.iter().any(|&b| !(20..=60).contains(&b)) {
            return Err(FheError::UnsupportedParameters(
                "chain prime sizes must be in [20, 60] bits".into(),
            ));
        }
        let total: u32 = self.coeff_modulus_bits.iter().sum();
        if total > 126 {
            return Err(FheError::UnsupportedParameters(format!(
                "total modulus of {total} bits exceeds the supported 126-bit budget"
            )));
        }
        if !(1..=60).contains(&self.relin_base_bits) {
            return Err(FheError::UnsupportedParameters(
                "relin_base_bits outside [1, 60]".into(),
            ));
        }
        match self.scheme {
            Scheme::Bfv | Scheme::Bgv => {
                let t = self.plain_modulus.ok_or_else(|| {
                    FheError::UnsupportedParameters("BFV/BGV require a plain modulus".into())
                })?;
                let t_bits = 64 - t.leading_zeros();
                // Decryption scaling computes t*x for x < q in u128.
                if total + t_bits > 126 {
                    return Err(FheError::UnsupportedParameters(
                        "plain and coefficient moduli together exceed the 126-bit budget".into(),
                    ));
                }
            }
            Scheme::Ckks => {
                if self.scale_bits.is_none() {
                    return Err(FheError::UnsupportedParameters(
                        "CKKS requires scale_bits".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}
