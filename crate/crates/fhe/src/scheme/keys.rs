//! Key material: secret, public and relinearization keys.

use crate::error::{FheError, Result};
use crate::ring::{Domain, RingElement, Sampler};
use crate::scheme::context::Context;
use crate::scheme::params::Scheme;

/// Ternary secret key s.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    /// Signed ternary coefficients, the canonical representation.
    coeffs: Vec<i64>,
    /// s in NTT form over the full chain.
    s_ntt: RingElement,
}

impl SecretKey {
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn from_coeffs(ctx: &Context, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != ctx.degree() || coeffs.iter().any(|c| c.abs() > 1) {
            return Err(FheError::ParameterMismatch(
                "secret key must be ternary of the ring degree".into(),
            ));
        }
        let s = RingElement::from_signed_coeffs(
            ctx.degree(),
            ctx.chain().primes(),
            &coeffs,
            Domain::Coefficient,
        );
        let s_ntt = s.ntt_forward(ctx.tables())?;
        Ok(SecretKey { coeffs, s_ntt })
    }

    /// s in NTT form restricted to the active primes of a level.
    pub fn ntt_at(&self, ctx: &Context, level: usize) -> Result<RingElement> {
        if level == ctx.top_level() {
            return Ok(self.s_ntt.clone());
        }
        let s = RingElement::from_signed_coeffs(
            ctx.degree(),
            ctx.chain().active(level),
            &self.coeffs,
            Domain::Coefficient,
        );
        s.ntt_forward(ctx.tables_at(level))
    }
}

/// Public key (b, a) with b = -(a s + e), both in NTT form at top level.
/// For BGV the error term is t*e so that decryption stays clean mod t.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    pub b: RingElement,
    pub a: RingElement,
}

/// Key-switching pairs encrypting 2^(j w) * s^2, NTT form at top level.
#[derive(Debug, Clone, PartialEq)]
pub struct RelinKey {
    pub pairs: Vec<(RingElement, RingElement)>,
    pub base_bits: u32,
}

impl RelinKey {
    pub fn digit_count(&self) -> usize {
        self.pairs.len()
    }
}

pub(crate) fn error_scale(ctx: &Context) -> u64 {
    match ctx.scheme() {
        Scheme::Bgv => ctx.plain_modulus().expect("BGV has t").value(),
        _ => 1,
    }
}

/// Generate a fresh secret key.
pub fn secret_keygen(ctx: &Context, sampler: &mut Sampler) -> Result<SecretKey> {
    let coeffs = sampler.ternary_coeffs(ctx.degree());
    SecretKey::from_coeffs(ctx, coeffs)
}

/// Public key under an existing secret key.
pub fn public_keygen(ctx: &Context, sk: &SecretKey, sampler: &mut Sampler) -> Result<PublicKey> {
    let n = ctx.degree();
    let primes = ctx.chain().primes();
    let a = sampler.uniform(n, primes, Domain::Ntt);
    let e = sampler.error(n, primes);
    let e_scaled = scale_error(ctx, e);
    let e_ntt = e_scaled.ntt_forward(ctx.tables())?;
    let b = a.mul_pointwise(&sk.ntt_at(ctx, ctx.top_level())?)?.add(&e_ntt)?.neg();
    Ok(PublicKey { a, b })
}

/// Relinearization key: for each digit j, (b_j, a_j) with
/// b_j = -(a_j s + e_j) + 2^(j w) s^2 (error scaled by t for BGV).
pub fn relin_keygen(ctx: &Context, sk: &SecretKey, sampler: &mut Sampler) -> Result<RelinKey> {
    let n = ctx.degree();
    let primes = ctx.chain().primes();
    let w = ctx.params().relin_base_bits;
    let k = ctx.relin_digit_count();
    let s_ntt = sk.ntt_at(ctx, ctx.top_level())?;
    let s2 = s_ntt.mul_pointwise(&s_ntt)?;
    let mut pairs = Vec::with_capacity(k);
    for j in 0..k {
        let a_j = sampler.uniform(n, primes, Domain::Ntt);
        let e_j = scale_error(ctx, sampler.error(n, primes)).ntt_forward(ctx.tables())?;
        // 2^(j w) mod each prime.
        let factors: Vec<u64> = primes
            .iter()
            .map(|m| m.pow(2, (j as u32 * w) as u64))
            .collect();
        let gs2 = s2.mul_scalar_per_prime(&factors)?;
        let b_j = a_j.mul_pointwise(&s_ntt)?.add(&e_j)?.neg().add(&gs2)?;
        pairs.push((b_j, a_j));
    }
    Ok(RelinKey {
        pairs,
        base_bits: w,
    })
}

/// The full key quadruple for one party or one transaction.
pub fn keygen(
    ctx: &Context,
    sampler: &mut Sampler,
) -> Result<(SecretKey, PublicKey, RelinKey)> {
    let sk = secret_keygen(ctx, sampler)?;
    let pk = public_keygen(ctx, &sk, sampler)?;
    let rk = relin_keygen(ctx, &sk, sampler)?;
    Ok((sk, pk, rk))
}

fn scale_error(ctx: &Context, e: RingElement) -> RingElement {
    let t = error_scale(ctx);
    if t == 1 {
        e
    } else {
        let scalars: Vec<u64> = ctx.chain().primes().iter().map(|m| m.reduce(t)).collect();
        e.mul_scalar_per_prime(&scalars).expect("chain matches")
    }
}
