//! Ring elements of R_q = Z_q[x]/(x^n+1) in RNS form over a modulus chain.

use crate::error::{FheError, Result};
use crate::ring::modulus::Modulus;
use crate::ring::ntt::NttTable;

/// Which representation the residue vectors are in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Coefficient,
    Ntt,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Coefficient => "coefficient",
            Domain::Ntt => "ntt",
        }
    }
}

/// Ordered sequence of distinct primes q_0 ... q_L; elements at level l use
/// the prefix q_0 ... q_l.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusChain {
    primes: Vec<Modulus>,
}

impl ModulusChain {
    pub fn new(primes: Vec<Modulus>) -> Result<Self> {
        if primes.is_empty() {
            return Err(FheError::UnsupportedParameters("empty modulus chain".into()));
        }
        for (i, p) in primes.iter().enumerate() {
            if primes[..i].iter().any(|r| r.value() == p.value()) {
                return Err(FheError::UnsupportedParameters(format!(
                    "duplicate prime {} in chain",
                    p.value()
                )));
            }
        }
        Ok(ModulusChain { primes })
    }

    pub fn primes(&self) -> &[Modulus] {
        &self.primes
    }

    /// Index of the last prime when all are active.
    pub fn top_level(&self) -> usize {
        self.primes.len() - 1
    }

    /// Active prefix for a given level.
    pub fn active(&self, level: usize) -> &[Modulus] {
        &self.primes[..=level]
    }

    /// Product of the active primes. Chains are sized so this fits in u128.
    pub fn product_at(&self, level: usize) -> u128 {
        self.active(level)
            .iter()
            .fold(1u128, |acc, m| acc * m.value() as u128)
    }

    /// Bit length of the product of the active primes.
    pub fn product_bits_at(&self, level: usize) -> u32 {
        128 - self.product_at(level).leading_zeros()
    }

    pub fn total_bits(&self) -> u32 {
        self.product_bits_at(self.top_level())
    }
}

/// Coefficient vector over the active primes of a chain, one residue row per
/// prime. All ciphertext and key material is built from these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElement {
    n: usize,
    moduli: Vec<Modulus>,
    /// residues[i][j] = j-th coefficient mod moduli[i], always in [0, q_i).
    residues: Vec<Vec<u64>>,
    domain: Domain,
}

impl RingElement {
    pub fn zero(n: usize, moduli: &[Modulus], domain: Domain) -> Self {
        RingElement {
            n,
            moduli: moduli.to_vec(),
            residues: vec![vec![0u64; n]; moduli.len()],
            domain,
        }
    }

    pub fn from_residues(
        n: usize,
        moduli: &[Modulus],
        residues: Vec<Vec<u64>>,
        domain: Domain,
    ) -> Result<Self> {
        if residues.len() != moduli.len() || residues.iter().any(|r| r.len() != n) {
            return Err(FheError::ParameterMismatch(
                "residue shape does not match degree/chain".into(),
            ));
        }
        for (row, m) in residues.iter().zip(moduli) {
            if row.iter().any(|&x| x >= m.value()) {
                return Err(FheError::ParameterMismatch(
                    "residue out of range for its prime".into(),
                ));
            }
        }
        Ok(RingElement {
            n,
            moduli: moduli.to_vec(),
            residues,
            domain,
        })
    }

    /// Embed small signed coefficients (the same integer polynomial in every
    /// residue row).
    pub fn from_signed_coeffs(n: usize, moduli: &[Modulus], coeffs: &[i64], domain: Domain) -> Self {
        debug_assert!(coeffs.len() <= n);
        let mut el = RingElement::zero(n, moduli, domain);
        for (i, m) in moduli.iter().enumerate() {
            for (j, &c) in coeffs.iter().enumerate() {
                el.residues[i][j] = m.reduce_i64(c);
            }
        }
        el
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn residues(&self) -> &[Vec<u64>] {
        &self.residues
    }

    pub fn residues_mut(&mut self) -> &mut [Vec<u64>] {
        &mut self.residues
    }

    pub fn is_zero(&self) -> bool {
        self.residues.iter().all(|r| r.iter().all(|&x| x == 0))
    }

    /// Restrict to the first `count` primes (valid in either domain since
    /// residue rows are independent).
    pub fn restrict(&self, count: usize) -> RingElement {
        debug_assert!(count >= 1 && count <= self.moduli.len());
        RingElement {
            n: self.n,
            moduli: self.moduli[..count].to_vec(),
            residues: self.residues[..count].to_vec(),
            domain: self.domain,
        }
    }

    fn check_compatible(&self, other: &RingElement) -> Result<()> {
        if self.n != other.n || self.moduli != other.moduli {
            return Err(FheError::ParameterMismatch(
                "ring elements differ in degree or modulus chain".into(),
            ));
        }
        if self.domain != other.domain {
            return Err(FheError::Domain {
                expected: self.domain.name(),
                got: other.domain.name(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            for j in 0..self.n {
                out.residues[i][j] = m.add(self.residues[i][j], other.residues[i][j]);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            for j in 0..self.n {
                out.residues[i][j] = m.sub(self.residues[i][j], other.residues[i][j]);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> RingElement {
        let mut out = self.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            for j in 0..self.n {
                out.residues[i][j] = m.neg(self.residues[i][j]);
            }
        }
        out
    }

    /// Pointwise product; both operands must already be in NTT domain.
    pub fn mul_pointwise(&self, other: &RingElement) -> Result<RingElement> {
        self.check_compatible(other)?;
        if self.domain != Domain::Ntt {
            return Err(FheError::Domain {
                expected: "ntt",
                got: self.domain.name(),
            });
        }
        let mut out = self.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            for j in 0..self.n {
                out.residues[i][j] = m.mul(self.residues[i][j], other.residues[i][j]);
            }
        }
        Ok(out)
    }

    /// Multiply every residue by a per-prime scalar.
    pub fn mul_scalar_per_prime(&self, scalars: &[u64]) -> Result<RingElement> {
        if scalars.len() != self.moduli.len() {
            return Err(FheError::ParameterMismatch(
                "scalar count does not match chain".into(),
            ));
        }
        let mut out = self.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            let s = m.reduce(scalars[i]);
            for j in 0..self.n {
                out.residues[i][j] = m.mul(self.residues[i][j], s);
            }
        }
        Ok(out)
    }

    fn check_tables(&self, tables: &[NttTable]) -> Result<()> {
        if tables.len() != self.moduli.len()
            || tables
                .iter()
                .zip(&self.moduli)
                .any(|(t, m)| t.degree() != self.n || t.modulus() != m)
        {
            return Err(FheError::ParameterMismatch(
                "NTT tables do not match element degree/chain".into(),
            ));
        }
        Ok(())
    }

    /// Forward negacyclic NTT; flips the domain flag.
    pub fn ntt_forward(&self, tables: &[NttTable]) -> Result<RingElement> {
        if self.domain != Domain::Coefficient {
            return Err(FheError::Domain {
                expected: "coefficient",
                got: self.domain.name(),
            });
        }
        self.check_tables(tables)?;
        let mut out = self.clone();
        for (row, t) in out.residues.iter_mut().zip(tables) {
            t.forward(row);
        }
        out.domain = Domain::Ntt;
        Ok(out)
    }

    /// Inverse negacyclic NTT; flips the domain flag.
    pub fn ntt_inverse(&self, tables: &[NttTable]) -> Result<RingElement> {
        if self.domain != Domain::Ntt {
            return Err(FheError::Domain {
                expected: "ntt",
                got: self.domain.name(),
            });
        }
        self.check_tables(tables)?;
        let mut out = self.clone();
        for (row, t) in out.residues.iter_mut().zip(tables) {
            t.inverse(row);
        }
        out.domain = Domain::Coefficient;
        Ok(out)
    }

    /// Put the element in the requested domain, transforming if necessary.
    pub fn to_domain(&self, domain: Domain, tables: &[NttTable]) -> Result<RingElement> {
        if self.domain == domain {
            Ok(self.clone())
        } else if domain == Domain::Ntt {
            self.ntt_forward(tables)
        } else {
            self.ntt_inverse(tables)
        }
    }
}

/// Negacyclic product in Z_q[x]/(x^n+1) via NTT, pointwise product, inverse NTT.
/// Coefficient-domain inputs are transformed internally; NTT-domain inputs are
/// multiplied pointwise and left in the NTT domain.
pub fn ring_mul(a: &RingElement, b: &RingElement, tables: &[NttTable]) -> Result<RingElement> {
    if a.domain() == Domain::Ntt && b.domain() == Domain::Ntt {
        return a.mul_pointwise(b);
    }
    let fa = a.to_domain(Domain::Ntt, tables)?;
    let fb = b.to_domain(Domain::Ntt, tables)?;
    fa.mul_pointwise(&fb)?.ntt_inverse(tables)
}
