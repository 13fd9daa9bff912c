//! Encryption, decryption and the homomorphic operations for all three
//! schemes. BFV ciphertexts live in the coefficient domain (the tensor
//! product needs exact integer coefficients); BGV and CKKS ciphertexts stay
//! in NTT form so that additions and multiplications are pointwise.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::error::{FheError, Result};
use crate::ring::{base_decompose, Domain, RingElement, Sampler};
use crate::scheme::ciphertext::Ciphertext;
use crate::scheme::context::{bigint_round_div, Context};
use crate::scheme::keys::{PublicKey, RelinKey, SecretKey};
use crate::scheme::params::Scheme;
use crate::scheme::plaintext::{PlainData, Plaintext};

const SCALE_TOLERANCE: f64 = 1e-9;

impl Context {
    fn check_scheme(&self, scheme: Scheme) -> Result<()> {
        if scheme != self.scheme() {
            return Err(FheError::SchemeMismatch {
                expected: self.scheme().name(),
                got: scheme.name(),
            });
        }
        Ok(())
    }

    /// Plaintext payload as a ring element over the active primes.
    /// `scaled_by_delta` embeds floor(q/t)*m (BFV encryption / add_plain).
    fn plaintext_element(
        &self,
        pt: &Plaintext,
        level: usize,
        scaled_by_delta: bool,
    ) -> Result<RingElement> {
        self.check_scheme(pt.scheme)?;
        let n = self.degree();
        let primes = self.chain().active(level);
        match &pt.data {
            PlainData::Integers { coeffs, .. } => {
                let mut el = RingElement::zero(n, primes, Domain::Coefficient);
                if scaled_by_delta {
                    let delta = self.delta_at(level);
                    for (i, m) in primes.iter().enumerate() {
                        for j in 0..n {
                            el.residues_mut()[i][j] = m.mul(delta[i], m.reduce(coeffs[j]));
                        }
                    }
                } else {
                    for (i, m) in primes.iter().enumerate() {
                        for j in 0..n {
                            el.residues_mut()[i][j] = m.reduce(coeffs[j]);
                        }
                    }
                }
                Ok(el)
            }
            PlainData::Reals { coeffs, .. } => {
                let mut el = RingElement::zero(n, primes, Domain::Coefficient);
                for (i, m) in primes.iter().enumerate() {
                    for j in 0..n {
                        el.residues_mut()[i][j] = m.reduce_i128(coeffs[j]);
                    }
                }
                Ok(el)
            }
        }
    }

    /// Asymmetric encryption. Fresh ciphertexts are size 2 at the top level.
    pub fn encrypt(
        &self,
        pk: &PublicKey,
        pt: &Plaintext,
        sampler: &mut Sampler,
    ) -> Result<Ciphertext> {
        self.check_scheme(pt.scheme)?;
        let n = self.degree();
        let level = self.top_level();
        let primes = self.chain().primes();
        let tables = self.tables();
        let t = self.plain_modulus().map(|m| m.value()).unwrap_or(1);

        let u = sampler.ternary(n, primes).ntt_forward(tables)?;
        let e1 = sampler.error(n, primes);
        let e2 = sampler.error(n, primes);
        let bu = pk.b.mul_pointwise(&u)?;
        let au = pk.a.mul_pointwise(&u)?;

        match self.scheme() {
            Scheme::Bfv => {
                let dm = self.plaintext_element(pt, level, true)?;
                let c0 = bu.ntt_inverse(tables)?.add(&e1)?.add(&dm)?;
                let c1 = au.ntt_inverse(tables)?.add(&e2)?;
                Ciphertext::new(Scheme::Bfv, vec![c0, c1], level, 0.0)
            }
            Scheme::Bgv => {
                let m = self.plaintext_element(pt, level, false)?;
                let te1 = scale_by(&e1, t);
                let te2 = scale_by(&e2, t);
                let c0 = bu.add(&m.add(&te1)?.ntt_forward(tables)?)?;
                let c1 = au.add(&te2.ntt_forward(tables)?)?;
                Ciphertext::new(Scheme::Bgv, vec![c0, c1], level, 0.0)
            }
            Scheme::Ckks => {
                let m = self.plaintext_element(pt, level, false)?;
                let c0 = bu.add(&m.add(&e1)?.ntt_forward(tables)?)?;
                let c1 = au.add(&e2.ntt_forward(tables)?)?;
                Ciphertext::new(Scheme::Ckks, vec![c0, c1], level, pt.scale())
            }
        }
    }

    /// c0 + c1 s (+ c2 s^2 ...) as a coefficient-domain element.
    fn decryption_poly(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<RingElement> {
        let tables = self.tables_at(ct.level);
        let s = sk.ntt_at(self, ct.level)?;
        let mut s_pow = s.clone();
        let mut acc = ct.polys[0].to_domain(Domain::Ntt, tables)?;
        for (i, poly) in ct.polys.iter().enumerate().skip(1) {
            let p_ntt = poly.to_domain(Domain::Ntt, tables)?;
            acc = acc.add(&p_ntt.mul_pointwise(&s_pow)?)?;
            if i + 1 < ct.polys.len() {
                s_pow = s_pow.mul_pointwise(&s)?;
            }
        }
        acc.ntt_inverse(tables)
    }

    pub fn decrypt(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
        if ct.size() != 2 {
            return Err(FheError::InvalidCiphertext(format!(
                "decrypt expects a size-2 ciphertext, got size {}; relinearize first",
                ct.size()
            )));
        }
        self.decrypt_inner(sk, ct)
    }

    /// Size->=2 decryption path used by tests to isolate relinearization.
    pub fn decrypt_extended(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
        self.decrypt_inner(sk, ct)
    }

    fn decrypt_inner(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
        self.check_scheme(ct.scheme)?;
        let v = self.decryption_poly(sk, ct)?;
        let crt = self.crt_at(ct.level);
        match self.scheme() {
            Scheme::Bfv => {
                if self.budget_from_poly(&v, ct.level)? == 0 {
                    return Err(FheError::NoiseBudgetExhausted);
                }
                let t = self.plain_modulus().unwrap();
                let q = crt.modulus_product();
                let vals = crt.compose_element(&v)?;
                let coeffs: Vec<u64> = vals
                    .into_iter()
                    .map(|x| {
                        // round(t*x/q) mod t; t*x stays below 2^127 by parameter rule.
                        let y = (t.value() as u128 * x + q / 2) / q;
                        t.reduce_u128(y)
                    })
                    .collect();
                Ok(Plaintext::integers(
                    Scheme::Bfv,
                    coeffs,
                    self.plain_ntt().is_some(),
                    self.degree(),
                ))
            }
            Scheme::Bgv => {
                if self.budget_from_poly(&v, ct.level)? == 0 {
                    return Err(FheError::NoiseBudgetExhausted);
                }
                let t = self.plain_modulus().unwrap();
                let vals = crt.compose_element_centered(&v)?;
                let coeffs: Vec<u64> = vals.into_iter().map(|x| t.reduce_i128(x)).collect();
                Ok(Plaintext::integers(
                    Scheme::Bgv,
                    coeffs,
                    self.plain_ntt().is_some(),
                    self.degree(),
                ))
            }
            Scheme::Ckks => {
                let coeffs = crt.compose_element_centered(&v)?;
                Ok(Plaintext::reals(coeffs, ct.scale, self.degree() / 2))
            }
        }
    }

    fn check_aligned(&self, a: &Ciphertext, b: &Ciphertext) -> Result<()> {
        self.check_scheme(a.scheme)?;
        self.check_scheme(b.scheme)?;
        if a.level != b.level {
            return Err(FheError::LevelMismatch(format!(
                "levels {} and {}",
                a.level, b.level
            )));
        }
        if self.scheme() == Scheme::Ckks {
            let rel = (a.scale - b.scale).abs() / a.scale.max(b.scale);
            if rel > SCALE_TOLERANCE {
                return Err(FheError::ScaleMismatch(format!(
                    "scales {:e} and {:e}",
                    a.scale, b.scale
                )));
            }
        }
        Ok(())
    }

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.binary_linear(a, b, false)
    }

    pub fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.binary_linear(a, b, true)
    }

    fn binary_linear(&self, a: &Ciphertext, b: &Ciphertext, negate: bool) -> Result<Ciphertext> {
        self.check_aligned(a, b)?;
        if a.polys[0].domain() != b.polys[0].domain() {
            return Err(FheError::Domain {
                expected: if a.is_ntt_form { "ntt" } else { "coefficient" },
                got: if b.is_ntt_form { "ntt" } else { "coefficient" },
            });
        }
        let len = a.size().max(b.size());
        let mut polys = Vec::with_capacity(len);
        for i in 0..len {
            let poly = match (a.polys.get(i), b.polys.get(i)) {
                (Some(x), Some(y)) => {
                    if negate {
                        x.sub(y)?
                    } else {
                        x.add(y)?
                    }
                }
                (Some(x), None) => x.clone(),
                (None, Some(y)) => {
                    if negate {
                        y.neg()
                    } else {
                        y.clone()
                    }
                }
                (None, None) => unreachable!(),
            };
            polys.push(poly);
        }
        Ciphertext::new(a.scheme, polys, a.level, a.scale)
    }

    pub fn add_plain(&self, ct: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext> {
        self.check_scheme(ct.scheme)?;
        self.check_scheme(pt.scheme)?;
        if self.scheme() == Scheme::Ckks {
            let rel = (ct.scale - pt.scale()).abs() / ct.scale.max(pt.scale());
            if rel > SCALE_TOLERANCE {
                return Err(FheError::ScaleMismatch(format!(
                    "ciphertext at {:e}, plaintext at {:e}",
                    ct.scale,
                    pt.scale()
                )));
            }
        }
        let el = self.plaintext_element(pt, ct.level, self.scheme() == Scheme::Bfv)?;
        let el = if ct.is_ntt_form {
            el.ntt_forward(self.tables_at(ct.level))?
        } else {
            el
        };
        let mut polys = ct.polys.clone();
        polys[0] = polys[0].add(&el)?;
        Ciphertext::new(ct.scheme, polys, ct.level, ct.scale)
    }

    pub fn mul_plain(&self, ct: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext> {
        self.check_scheme(ct.scheme)?;
        self.check_scheme(pt.scheme)?;
        let tables = self.tables_at(ct.level);
        let el = self.plaintext_element(pt, ct.level, false)?.ntt_forward(tables)?;
        let mut polys = Vec::with_capacity(ct.size());
        for p in &ct.polys {
            if ct.is_ntt_form {
                polys.push(p.mul_pointwise(&el)?);
            } else {
                polys.push(p.ntt_forward(tables)?.mul_pointwise(&el)?.ntt_inverse(tables)?);
            }
        }
        let scale = if self.scheme() == Scheme::Ckks {
            ct.scale * pt.scale()
        } else {
            ct.scale
        };
        Ciphertext::new(ct.scheme, polys, ct.level, scale)
    }

    /// Ciphertext-ciphertext product; the output has size 3 until
    /// relinearized. CKKS output scale is the product of the input scales.
    pub fn multiply(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check_aligned(a, b)?;
        if a.size() != 2 || b.size() != 2 {
            return Err(FheError::InvalidCiphertext(format!(
                "multiply expects size-2 inputs, got {} and {}",
                a.size(),
                b.size()
            )));
        }
        if self.scheme() == Scheme::Ckks && a.level == 0 {
            return Err(FheError::LevelExhausted(
                "no prime left to rescale after this multiplication".into(),
            ));
        }
        match self.scheme() {
            Scheme::Bfv => self.bfv_multiply(a, b),
            Scheme::Bgv | Scheme::Ckks => {
                let (a0, a1) = (&a.polys[0], &a.polys[1]);
                let (b0, b1) = (&b.polys[0], &b.polys[1]);
                let d0 = a0.mul_pointwise(b0)?;
                let d1 = a0.mul_pointwise(b1)?.add(&a1.mul_pointwise(b0)?)?;
                let d2 = a1.mul_pointwise(b1)?;
                let scale = if self.scheme() == Scheme::Ckks {
                    a.scale * b.scale
                } else {
                    0.0
                };
                Ciphertext::new(a.scheme, vec![d0, d1, d2], a.level, scale)
            }
        }
    }

    /// BFV tensor product with t/q scaling, computed exactly over an
    /// extended RNS basis.
    fn bfv_multiply(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        let basis = self.bfv_mult_basis().expect("BFV context");
        let level = a.level;
        let lvl = &basis.levels[level];
        let n = self.degree();
        let chain_primes = self.chain().active(level);
        let chain_tables = self.tables_at(level);
        let crt = self.crt_at(level);
        let t = self.plain_modulus().unwrap().value();

        // Lift each input polynomial to NTT form over chain + aux primes.
        let mut lifted: Vec<Vec<Vec<u64>>> = Vec::with_capacity(4);
        for poly in a.polys.iter().chain(b.polys.iter()) {
            let coeff = poly.to_domain(Domain::Coefficient, chain_tables)?;
            let centered = crt.compose_element_centered(&coeff)?;
            let mut rows: Vec<Vec<u64>> = coeff.residues().to_vec();
            for m in &basis.aux_moduli {
                rows.push(centered.iter().map(|&x| m.reduce_i128(x)).collect());
            }
            for (i, row) in rows.iter_mut().enumerate() {
                if i < chain_tables.len() {
                    chain_tables[i].forward(row);
                } else {
                    basis.aux_tables[i - chain_tables.len()].forward(row);
                }
            }
            lifted.push(rows);
        }
        let (a0, a1, b0, b1) = (&lifted[0], &lifted[1], &lifted[2], &lifted[3]);

        let prime_count = a0.len();
        let all_moduli: Vec<_> = chain_primes
            .iter()
            .copied()
            .chain(basis.aux_moduli.iter().copied())
            .collect();
        let mut tensor: Vec<Vec<Vec<u64>>> = vec![vec![vec![0u64; n]; prime_count]; 3];
        for i in 0..prime_count {
            let m = &all_moduli[i];
            for j in 0..n {
                let x0 = a0[i][j];
                let x1 = a1[i][j];
                let y0 = b0[i][j];
                let y1 = b1[i][j];
                tensor[0][i][j] = m.mul(x0, y0);
                tensor[1][i][j] = m.add(m.mul(x0, y1), m.mul(x1, y0));
                tensor[2][i][j] = m.mul(x1, y1);
            }
        }
        for rows in tensor.iter_mut() {
            for (i, row) in rows.iter_mut().enumerate() {
                if i < chain_tables.len() {
                    chain_tables[i].inverse(row);
                } else {
                    basis.aux_tables[i - chain_tables.len()].inverse(row);
                }
            }
        }

        // Per coefficient: CRT-compose the exact integer, center, scale by
        // t/q with rounding, reduce back into the chain.
        let t_big = BigInt::from(t);
        let mut out_polys = Vec::with_capacity(3);
        let mut residues = vec![0u64; prime_count];
        for rows in &tensor {
            let mut out = RingElement::zero(n, chain_primes, Domain::Coefficient);
            for j in 0..n {
                for (i, row) in rows.iter().enumerate() {
                    residues[i] = row[j];
                }
                let mut acc = num_bigint::BigUint::default();
                for i in 0..prime_count {
                    let r = all_moduli[i].mul(residues[i], lvl.inverses[i]);
                    acc += &lvl.punctured[i] * r;
                }
                acc %= &lvl.basis_product;
                let centered = if acc > lvl.half_basis {
                    BigInt::from(acc) - BigInt::from(lvl.basis_product.clone())
                } else {
                    BigInt::from(acc)
                };
                let scaled = bigint_round_div(&(&t_big * centered), &lvl.q_product);
                for (i, m) in chain_primes.iter().enumerate() {
                    out.residues_mut()[i][j] = reduce_bigint(&scaled, m.value());
                }
            }
            out_polys.push(out);
        }
        Ciphertext::new(Scheme::Bfv, out_polys, level, 0.0)
    }

    /// Key-switch a size-3 ciphertext back to size 2 under the same secret.
    pub fn relinearize(&self, rk: &RelinKey, ct: &Ciphertext) -> Result<Ciphertext> {
        self.check_scheme(ct.scheme)?;
        if ct.size() != 3 {
            return Err(FheError::InvalidCiphertext(format!(
                "relinearize expects a size-3 ciphertext, got size {}",
                ct.size()
            )));
        }
        if rk.base_bits != self.params().relin_base_bits {
            return Err(FheError::ParameterMismatch(
                "relin key base does not match context".into(),
            ));
        }
        let level = ct.level;
        let tables = self.tables_at(level);
        let active = level + 1;
        let c2 = ct.polys[2].to_domain(Domain::Coefficient, tables)?;
        let digits = base_decompose(&c2, rk.base_bits, self.crt_at(level))?;
        if digits.len() > rk.pairs.len() {
            return Err(FheError::ParameterMismatch(format!(
                "relin key has {} digits, {} needed at this level",
                rk.pairs.len(),
                digits.len()
            )));
        }
        let n = self.degree();
        let mut acc0 = RingElement::zero(n, self.chain().active(level), Domain::Ntt);
        let mut acc1 = acc0.clone();
        for (digit, (b_j, a_j)) in digits.iter().zip(&rk.pairs) {
            let d = digit.ntt_forward(tables)?;
            acc0 = acc0.add(&d.mul_pointwise(&b_j.restrict(active))?)?;
            acc1 = acc1.add(&d.mul_pointwise(&a_j.restrict(active))?)?;
        }
        let (c0, c1) = if ct.is_ntt_form {
            (ct.polys[0].add(&acc0)?, ct.polys[1].add(&acc1)?)
        } else {
            (
                ct.polys[0].add(&acc0.ntt_inverse(tables)?)?,
                ct.polys[1].add(&acc1.ntt_inverse(tables)?)?,
            )
        };
        Ciphertext::new(ct.scheme, vec![c0, c1], level, ct.scale)
    }

    /// CKKS: drop the last prime and divide the scale by it.
    pub fn rescale(&self, ct: &Ciphertext) -> Result<Ciphertext> {
        self.check_scheme(ct.scheme)?;
        if self.scheme() != Scheme::Ckks {
            return Err(FheError::SchemeMismatch { expected: "ckks", got: self.scheme().name() });
        }
        if ct.level == 0 {
            return Err(FheError::LevelExhausted("cannot rescale at level 0".into()));
        }
        let p = self.chain().active(ct.level).last().unwrap();
        if ct.scale < p.value() as f64 {
            return Err(FheError::ScaleMismatch(format!(
                "scale {:e} below the prime {} being dropped",
                ct.scale,
                p.value()
            )));
        }
        let new_level = ct.level - 1;
        let keep = self.chain().active(new_level);
        let tables = self.tables_at(ct.level);
        let new_tables = self.tables_at(new_level);
        let mut polys = Vec::with_capacity(ct.size());
        for poly in &ct.polys {
            let coeff = poly.to_domain(Domain::Coefficient, tables)?;
            let last_row = &coeff.residues()[ct.level];
            let mut out = RingElement::zero(self.degree(), keep, Domain::Coefficient);
            for (i, m) in keep.iter().enumerate() {
                let p_inv = m.inv(m.reduce(p.value()));
                for j in 0..self.degree() {
                    let r = p.center(last_row[j]);
                    let diff = m.sub(coeff.residues()[i][j], m.reduce_i64(r));
                    out.residues_mut()[i][j] = m.mul(diff, p_inv);
                }
            }
            polys.push(if ct.is_ntt_form {
                out.ntt_forward(new_tables)?
            } else {
                out
            });
        }
        Ciphertext::new(ct.scheme, polys, new_level, ct.scale / p.value() as f64)
    }

    /// Drop the last prime without rescaling (exact CKKS level alignment).
    pub fn drop_level(&self, ct: &Ciphertext, target_level: usize) -> Result<Ciphertext> {
        self.check_scheme(ct.scheme)?;
        if self.scheme() != Scheme::Ckks {
            return Err(FheError::SchemeMismatch { expected: "ckks", got: self.scheme().name() });
        }
        if target_level > ct.level {
            return Err(FheError::LevelMismatch(
                "cannot raise a ciphertext's level".into(),
            ));
        }
        let polys = ct
            .polys
            .iter()
            .map(|p| p.restrict(target_level + 1))
            .collect();
        Ciphertext::new(ct.scheme, polys, target_level, ct.scale)
    }

    /// Level drop preserving the plaintext exactly: BGV modulus switching,
    /// also usable for BFV level alignment.
    pub fn mod_switch(&self, ct: &Ciphertext) -> Result<Ciphertext> {
        self.check_scheme(ct.scheme)?;
        if self.scheme() == Scheme::Ckks {
            return Err(FheError::SchemeMismatch { expected: "bfv/bgv", got: "ckks" });
        }
        if ct.level == 0 {
            return Err(FheError::LevelExhausted("cannot mod-switch at level 0".into()));
        }
        let p = *self.chain().active(ct.level).last().unwrap();
        let new_level = ct.level - 1;
        let keep = self.chain().active(new_level);
        let tables = self.tables_at(ct.level);
        let new_tables = self.tables_at(new_level);
        let t = self.plain_modulus().unwrap().value();
        // BGV correction: delta = t * [c * t^{-1}]_p is = c mod p and = 0 mod t;
        // (c - delta)/p preserves m because every chain prime is 1 mod t.
        // BFV: delta = [c]_p gives plain rounding round(c/p).
        let t_inv_p = if self.scheme() == Scheme::Bgv {
            Some(p.inv(p.reduce(t)))
        } else {
            None
        };
        let mut polys = Vec::with_capacity(ct.size());
        for poly in &ct.polys {
            let coeff = poly.to_domain(Domain::Coefficient, tables)?;
            let last_row = &coeff.residues()[ct.level];
            let mut out = RingElement::zero(self.degree(), keep, Domain::Coefficient);
            for (i, m) in keep.iter().enumerate() {
                let p_inv = m.inv(m.reduce(p.value()));
                for j in 0..self.degree() {
                    let delta: i128 = match t_inv_p {
                        Some(ti) => {
                            let u = p.center(p.mul(last_row[j], ti));
                            t as i128 * u as i128
                        }
                        None => p.center(last_row[j]) as i128,
                    };
                    let base = m.reduce_i128(coeff.residues()[i][j] as i128 - delta);
                    out.residues_mut()[i][j] = m.mul(base, p_inv);
                }
            }
            polys.push(if ct.is_ntt_form {
                out.ntt_forward(new_tables)?
            } else {
                out
            });
        }
        Ciphertext::new(ct.scheme, polys, new_level, ct.scale)
    }

    /// Remaining bits of headroom before decryption becomes unreliable
    /// (BFV/BGV diagnostic; needs the secret key, never crosses the wire).
    pub fn noise_budget(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<u32> {
        self.check_scheme(ct.scheme)?;
        if self.scheme() == Scheme::Ckks {
            return Err(FheError::UnsupportedParameters(
                "noise budget is a BFV/BGV diagnostic; CKKS reports a precision estimate".into(),
            ));
        }
        let v = self.decryption_poly(sk, ct)?;
        self.budget_from_poly(&v, ct.level)
    }

    fn budget_from_poly(&self, v: &RingElement, level: usize) -> Result<u32> {
        let crt = self.crt_at(level);
        let q = crt.modulus_product();
        let noise_inf = match self.scheme() {
            Scheme::Bfv => {
                // Invariant-noise style: t*v mod q, centered; the residual
                // after the q*m part cancels is t*noise (+ m, since q = 1 mod t).
                let t = self.plain_modulus().unwrap().value() as u128;
                let vals = crt.compose_element(v)?;
                vals.into_iter()
                    .map(|x| {
                        let w = t * x % q;
                        let c = if w > q / 2 { q - w } else { w };
                        c
                    })
                    .max()
                    .unwrap_or(0)
            }
            Scheme::Bgv => crt
                .compose_element_centered(v)?
                .into_iter()
                .map(|x| x.unsigned_abs())
                .max()
                .unwrap_or(0),
            Scheme::Ckks => unreachable!(),
        };
        let noise = noise_inf.max(1);
        let ratio = q / (2 * noise);
        Ok(if ratio == 0 { 0 } else { ratio.ilog2() })
    }

    /// Rough CKKS precision estimate in bits: log2(scale) minus the expected
    /// embedded-noise magnitude for fresh ciphertexts at this degree.
    pub fn ckks_precision_estimate(&self, ct: &Ciphertext) -> Result<f64> {
        if self.scheme() != Scheme::Ckks {
            return Err(FheError::SchemeMismatch { expected: "ckks", got: self.scheme().name() });
        }
        let n = self.degree() as f64;
        let sigma = self.params().error_stddev;
        let noise_slot = (2.0 * n * n * sigma * sigma * (2.0 / 3.0)).sqrt();
        Ok(ct.scale.log2() - noise_slot.log2())
    }
}

fn scale_by(el: &RingElement, factor: u64) -> RingElement {
    if factor == 1 {
        return el.clone();
    }
    let scalars: Vec<u64> = el.moduli().iter().map(|m| m.reduce(factor)).collect();
    el.mul_scalar_per_prime(&scalars).expect("same chain")
}

fn reduce_bigint(x: &BigInt, q: u64) -> u64 {
    use num_integer::Integer;
    let m = BigInt::from(q);
    let r = x.mod_floor(&m);
    debug_assert!(!r.is_negative());
    let digits = r.to_u64_digits().1;
    digits.first().copied().unwrap_or(0)
}
