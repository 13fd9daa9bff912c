//! Bit-exact little-endian serialization of ring objects.
//!
//! Shared layout for every object built from ring elements:
//! n (u16 LE), prime count (1), poly count (1), level (1), domain flag (1),
//! scale (f64 LE; zero for the integer schemes), then every residue as u64 LE
//! in (poly, prime, coefficient) order. Relinearization keys prefix a 1-byte
//! digit count and concatenate one such block per digit pair.

use fhe::ring::{Domain, RingElement};
use fhe::scheme::{PublicKey, RelinKey, SecretKey};
use fhe::{Ciphertext, Context};

use crate::error::{Result, SmobError};

pub const ELEMENT_HEADER_LEN: usize = 14;

fn put_header(out: &mut Vec<u8>, n: usize, primes: usize, polys: usize, level: usize, domain: Domain, scale: f64) {
    out.extend_from_slice(&(n as u16).to_le_bytes());
    out.push(primes as u8);
    out.push(polys as u8);
    out.push(level as u8);
    out.push(match domain {
        Domain::Coefficient => 0,
        Domain::Ntt => 1,
    });
    out.extend_from_slice(&scale.to_le_bytes());
}

fn put_polys(out: &mut Vec<u8>, polys: &[&RingElement]) {
    for poly in polys {
        for row in poly.residues() {
            for &x in row {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
}

/// Exact serialized size of a poly block with the given shape.
pub fn block_len(n: usize, primes: usize, polys: usize) -> usize {
    ELEMENT_HEADER_LEN + polys * primes * n * 8
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(SmobError::Serial(format!(
                "truncated buffer: need {len} bytes at offset {}, have {}",
                self.pos,
                self.buf.len() - self.pos
            ))),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(SmobError::Serial(format!(
                "{} trailing bytes after object",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

struct Block {
    polys: Vec<RingElement>,
    level: usize,
    scale: f64,
}

fn read_block(r: &mut Reader, ctx: &Context) -> Result<Block> {
    let n = r.u16()? as usize;
    if n != ctx.degree() {
        return Err(SmobError::Serial(format!(
            "degree {n} does not match context degree {}",
            ctx.degree()
        )));
    }
    let prime_count = r.u8()? as usize;
    let poly_count = r.u8()? as usize;
    let level = r.u8()? as usize;
    let domain = match r.u8()? {
        0 => Domain::Coefficient,
        1 => Domain::Ntt,
        d => return Err(SmobError::Serial(format!("bad domain flag {d}"))),
    };
    let scale = r.f64()?;
    if level > ctx.top_level() || prime_count != level + 1 {
        return Err(SmobError::Serial(format!(
            "level {level} / prime count {prime_count} invalid for this context"
        )));
    }
    if poly_count < 1 || poly_count > 8 {
        return Err(SmobError::Serial(format!("implausible poly count {poly_count}")));
    }
    let moduli = ctx.chain().active(level);
    let mut polys = Vec::with_capacity(poly_count);
    for _ in 0..poly_count {
        let mut residues = Vec::with_capacity(prime_count);
        for _ in 0..prime_count {
            let raw = r.take(n * 8)?;
            let row: Vec<u64> = raw
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            residues.push(row);
        }
        let el = RingElement::from_residues(n, moduli, residues, domain)
            .map_err(|e| SmobError::Serial(e.to_string()))?;
        polys.push(el);
    }
    Ok(Block { polys, level, scale })
}

pub fn serialize_ciphertext(ct: &Ciphertext) -> Vec<u8> {
    let n = ct.degree();
    let primes = ct.polys[0].moduli().len();
    let mut out = Vec::with_capacity(block_len(n, primes, ct.size()));
    put_header(&mut out, n, primes, ct.size(), ct.level, ct.polys[0].domain(), ct.scale);
    let refs: Vec<&RingElement> = ct.polys.iter().collect();
    put_polys(&mut out, &refs);
    out
}

pub fn deserialize_ciphertext(bytes: &[u8], ctx: &Context) -> Result<Ciphertext> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let b = read_block(&mut r, ctx)?;
    r.done()?;
    Ciphertext::new(ctx.scheme(), b.polys, b.level, b.scale).map_err(SmobError::from)
}

pub fn serialize_public_key(pk: &PublicKey) -> Vec<u8> {
    let n = pk.b.degree();
    let primes = pk.b.moduli().len();
    let mut out = Vec::with_capacity(block_len(n, primes, 2));
    put_header(&mut out, n, primes, 2, primes - 1, pk.b.domain(), 0.0);
    put_polys(&mut out, &[&pk.b, &pk.a]);
    out
}

pub fn deserialize_public_key(bytes: &[u8], ctx: &Context) -> Result<PublicKey> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let b = read_block(&mut r, ctx)?;
    r.done()?;
    if b.polys.len() != 2 || b.level != ctx.top_level() {
        return Err(SmobError::Serial("public key must be 2 polys at top level".into()));
    }
    let mut it = b.polys.into_iter();
    Ok(PublicKey { b: it.next().unwrap(), a: it.next().unwrap() })
}

/// Secret keys serialize for size accounting and local storage only; the
/// orchestrator never puts one on the wire.
pub fn serialize_secret_key(sk: &SecretKey, ctx: &Context) -> Vec<u8> {
    let s = RingElement::from_signed_coeffs(
        ctx.degree(),
        ctx.chain().primes(),
        sk.coeffs(),
        Domain::Coefficient,
    );
    let mut out = Vec::with_capacity(block_len(ctx.degree(), ctx.chain().primes().len(), 1));
    put_header(
        &mut out,
        ctx.degree(),
        ctx.chain().primes().len(),
        1,
        ctx.top_level(),
        Domain::Coefficient,
        0.0,
    );
    put_polys(&mut out, &[&s]);
    out
}

pub fn deserialize_secret_key(bytes: &[u8], ctx: &Context) -> Result<SecretKey> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let b = read_block(&mut r, ctx)?;
    r.done()?;
    if b.polys.len() != 1 || b.level != ctx.top_level() {
        return Err(SmobError::Serial("secret key must be 1 poly at top level".into()));
    }
    let m0 = b.polys[0].moduli()[0];
    let coeffs: Vec<i64> = b.polys[0].residues()[0].iter().map(|&x| m0.center(x)).collect();
    SecretKey::from_coeffs(ctx, coeffs).map_err(SmobError::from)
}

pub fn serialize_relin_key(rk: &RelinKey) -> Vec<u8> {
    let k = rk.pairs.len();
    let (b0, _) = &rk.pairs[0];
    let n = b0.degree();
    let primes = b0.moduli().len();
    let mut out = Vec::with_capacity(1 + k * block_len(n, primes, 2));
    out.push(k as u8);
    for (b, a) in &rk.pairs {
        put_header(&mut out, n, primes, 2, primes - 1, b.domain(), 0.0);
        put_polys(&mut out, &[b, a]);
    }
    out
}

pub fn deserialize_relin_key(bytes: &[u8], ctx: &Context) -> Result<RelinKey> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let k = r.u8()? as usize;
    if k == 0 {
        return Err(SmobError::Serial("relin key with zero digits".into()));
    }
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let b = read_block(&mut r, ctx)?;
        if b.polys.len() != 2 || b.level != ctx.top_level() {
            return Err(SmobError::Serial("relin digit pair must be 2 polys at top level".into()));
        }
        let mut it = b.polys.into_iter();
        pairs.push((it.next().unwrap(), it.next().unwrap()));
    }
    r.done()?;
    Ok(RelinKey {
        pairs,
        base_bits: ctx.params().relin_base_bits,
    })
}
