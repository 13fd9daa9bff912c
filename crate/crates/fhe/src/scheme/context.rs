//! Immutable per-parameter-set state: chain primes, NTT tables, CRT data,
//! batching tables, CKKS embedding transforms, and the extended basis used by
//! the BFV tensor product.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed};
use rustfft::{Fft, FftPlanner};

use crate::error::{FheError, Result};
use crate::ring::{generate_primes, CrtContext, Modulus, ModulusChain, NttTable};
use crate::scheme::params::{EncryptionParameters, Scheme};

/// CRT data over chain ∪ auxiliary primes, sized to hold the exact integer
/// tensor product of two ciphertext polynomials before t/q scaling.
#[derive(Debug, Clone)]
pub struct BfvMultBasis {
    pub aux_moduli: Vec<Modulus>,
    pub aux_tables: Vec<NttTable>,
    /// One entry per chain level (active primes + all aux primes).
    pub levels: Vec<BfvMultLevel>,
}

#[derive(Debug, Clone)]
pub struct BfvMultLevel {
    /// Product of active chain primes and aux primes.
    pub basis_product: BigUint,
    pub half_basis: BigUint,
    /// basis_product / p_i for every basis prime (active chain first, then aux).
    pub punctured: Vec<BigUint>,
    /// (punctured_i mod p_i)^{-1} mod p_i.
    pub inverses: Vec<u64>,
    /// Product of the active chain primes.
    pub q_product: BigUint,
}

/// Precomputed complex transforms realizing the CKKS canonical embedding.
pub struct CkksEmbedding {
    pub fft_forward: Arc<dyn Fft<f64>>,
    pub fft_inverse: Arc<dyn Fft<f64>>,
    /// e^{-i pi k / n} for k in 0..n.
    pub twist: Vec<num_complex::Complex64>,
    /// e^{+i pi k / n} for k in 0..n.
    pub untwist: Vec<num_complex::Complex64>,
}

/// Immutable after creation; creating one is the timed "context creation"
/// operation.
pub struct Context {
    params: EncryptionParameters,
    chain: ModulusChain,
    tables: Vec<NttTable>,
    /// CRT data for every level prefix, index = level.
    crt: Vec<CrtContext>,
    plain_modulus: Option<Modulus>,
    /// Negacyclic NTT mod t for slot batching; present when t = 1 mod 2n.
    plain_ntt: Option<NttTable>,
    /// floor(q_level / t) reduced mod every active prime, index = level.
    delta: Vec<Vec<u64>>,
    bfv_mult: Option<BfvMultBasis>,
    ckks: Option<CkksEmbedding>,
}

impl Context {
    pub fn new(params: EncryptionParameters) -> Result<Arc<Self>> {
        params.validate()?;
        let n = params.n;
        let two_n = 2 * n as u64;

        // BFV/BGV chain primes are 1 mod 2n*t so that batching, the NTT, and
        // exact BGV modulus switching (p = 1 mod t) all hold.
        let step = match params.scheme {
            Scheme::Bfv | Scheme::Bgv => two_n * params.plain_modulus.unwrap(),
            Scheme::Ckks => two_n,
        };

        let mut primes: Vec<u64> = Vec::new();
        for &bits in &params.coeff_modulus_bits {
            let needed = params
                .coeff_modulus_bits
                .iter()
                .filter(|&&b| b == bits)
                .count();
            if primes.iter().any(|&p| 64 - p.leading_zeros() == bits) {
                continue; // all primes of this size were generated together
            }
            let mut found = generate_primes(bits, step, needed, &primes)?;
            primes.append(&mut found);
        }
        // Restore the declared order by bit size.
        let mut ordered = Vec::with_capacity(params.coeff_modulus_bits.len());
        let mut pool = primes;
        for &bits in &params.coeff_modulus_bits {
            let pos = pool
                .iter()
                .position(|&p| 64 - p.leading_zeros() == bits)
                .expect("generated prime of requested size");
            ordered.push(pool.remove(pos));
        }

        let moduli: Vec<Modulus> = ordered
            .iter()
            .map(|&q| Modulus::new(q, n))
            .collect::<Result<_>>()?;
        let chain = ModulusChain::new(moduli)?;
        let tables: Vec<NttTable> = chain
            .primes()
            .iter()
            .map(|&m| NttTable::new(n, m))
            .collect::<Result<_>>()?;
        let crt: Vec<CrtContext> = (0..=chain.top_level())
            .map(|l| CrtContext::new(chain.active(l)))
            .collect::<Result<_>>()?;

        let plain_modulus = match params.plain_modulus {
            Some(t) => Some(Modulus::new(t, n)?),
            None => None,
        };
        let plain_ntt = match &plain_modulus {
            Some(t) if t.is_ntt_friendly() => Some(NttTable::new(n, *t)?),
            _ => None,
        };

        let delta = match (&params.scheme, params.plain_modulus) {
            (Scheme::Bfv, Some(t)) => (0..=chain.top_level())
                .map(|l| {
                    let d = chain.product_at(l) / t as u128;
                    chain.active(l).iter().map(|m| m.reduce_u128(d)).collect()
                })
                .collect(),
            _ => vec![],
        };

        let bfv_mult = if params.scheme == Scheme::Bfv {
            Some(Self::build_bfv_mult_basis(&params, &chain)?)
        } else {
            None
        };

        let ckks = if params.scheme == Scheme::Ckks {
            let mut planner = FftPlanner::new();
            let fft_forward = planner.plan_fft_forward(n);
            let fft_inverse = planner.plan_fft_inverse(n);
            let twist: Vec<_> = (0..n)
                .map(|k| {
                    num_complex::Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 / n as f64)
                })
                .collect();
            let untwist: Vec<_> = twist.iter().map(|z| z.conj()).collect();
            Some(CkksEmbedding {
                fft_forward,
                fft_inverse,
                twist,
                untwist,
            })
        } else {
            None
        };

        Ok(Arc::new(Context {
            params,
            chain,
            tables,
            crt,
            plain_modulus,
            plain_ntt,
            delta,
            bfv_mult,
            ckks,
        }))
    }

    fn build_bfv_mult_basis(
        params: &EncryptionParameters,
        chain: &ModulusChain,
    ) -> Result<BfvMultBasis> {
        let n = params.n;
        let two_n = 2 * n as u64;
        // Basis must exceed 2 * n * (q/2)^2; three 58-bit primes on top of a
        // <=126-bit chain give >=174 extra bits, enough for any supported n.
        let exclude: Vec<u64> = chain.primes().iter().map(|m| m.value()).collect();
        let aux = generate_primes(58, two_n, 3, &exclude)?;
        let aux_moduli: Vec<Modulus> = aux
            .iter()
            .map(|&q| Modulus::new(q, n))
            .collect::<Result<_>>()?;
        let aux_tables: Vec<NttTable> = aux_moduli
            .iter()
            .map(|&m| NttTable::new(n, m))
            .collect::<Result<_>>()?;

        let mut levels = Vec::with_capacity(chain.top_level() + 1);
        for l in 0..=chain.top_level() {
            let active: Vec<u64> = exclude[..=l].iter().chain(aux.iter()).copied().collect();
            let mut basis_product = BigUint::one();
            for &p in &active {
                basis_product *= p;
            }
            let punctured: Vec<BigUint> = active.iter().map(|&p| &basis_product / p).collect();
            let inverses: Vec<u64> = active
                .iter()
                .zip(&punctured)
                .map(|(&p, m_i)| {
                    let m = Modulus::new(p, n).expect("basis prime");
                    let r = (m_i % p).to_u64_digits().first().copied().unwrap_or(0);
                    m.inv(r)
                })
                .collect();
            let mut q_product = BigUint::one();
            for &p in &exclude[..=l] {
                q_product *= p;
            }
            levels.push(BfvMultLevel {
                half_basis: &basis_product >> 1,
                basis_product,
                punctured,
                inverses,
                q_product,
            });
        }
        Ok(BfvMultBasis {
            aux_moduli,
            aux_tables,
            levels,
        })
    }

    pub fn params(&self) -> &EncryptionParameters {
        &self.params
    }

    pub fn scheme(&self) -> Scheme {
        self.params.scheme
    }

    pub fn degree(&self) -> usize {
        self.params.n
    }

    pub fn chain(&self) -> &ModulusChain {
        &self.chain
    }

    pub fn top_level(&self) -> usize {
        self.chain.top_level()
    }

    pub fn tables(&self) -> &[NttTable] {
        &self.tables
    }

    pub fn tables_at(&self, level: usize) -> &[NttTable] {
        &self.tables[..=level]
    }

    pub fn crt_at(&self, level: usize) -> &CrtContext {
        &self.crt[level]
    }

    pub fn plain_modulus(&self) -> Option<&Modulus> {
        self.plain_modulus.as_ref()
    }

    pub fn plain_ntt(&self) -> Option<&NttTable> {
        self.plain_ntt.as_ref()
    }

    /// floor(q_level / t) mod each active prime.
    pub fn delta_at(&self, level: usize) -> &[u64] {
        &self.delta[level]
    }

    pub fn bfv_mult_basis(&self) -> Option<&BfvMultBasis> {
        self.bfv_mult.as_ref()
    }

    pub fn ckks_embedding(&self) -> Option<&CkksEmbedding> {
        self.ckks.as_ref()
    }

    /// Relinearization digit count for the full chain.
    pub fn relin_digit_count(&self) -> usize {
        crate::ring::digit_count(self.chain.total_bits(), self.params.relin_base_bits)
    }

    pub fn slot_count(&self) -> Result<usize> {
        match self.params.scheme {
            Scheme::Ckks => Ok(self.params.n / 2),
            _ => {
                if self.plain_ntt.is_some() {
                    Ok(self.params.n)
                } else {
                    Err(FheError::EncodingUnsupported(
                        "plain modulus does not support batching".into(),
                    ))
                }
            }
        }
    }
}

impl std::fmt::Debug for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Context")
            .field("scheme", &self.params.scheme)
            .field("n", &self.params.n)
            .field(
                "chain",
                &self.chain.primes().iter().map(|m| m.value()).collect::<Vec<_>>(),
            )
            .finish()
    }
}

/// Floor division of a signed big integer by an unsigned one, rounding the
/// quotient of t*x/q to nearest via a pre-added half.
pub(crate) fn bigint_round_div(num: &BigInt, den: &BigUint) -> BigInt {
    use num_integer::Integer;
    let den = BigInt::from(den.clone());
    let half = &den >> 1;
    let shifted: BigInt = num + half;
    let (q, r) = shifted.div_mod_floor(&den);
    debug_assert!(!r.is_negative());
    q
}
