//! The three transaction shapes over message-passing parties.
//!
//! T1: providers encrypt under the customer's one-time key, the platform
//! computes, the customer decrypts. T2: the encrypted partial sum travels
//! provider to provider via the platform; the last provider finishes the
//! computation. T3: providers and customer encrypt under the platform's key,
//! the customer computes, the platform decrypts the aggregate.
//!
//! All three evaluate total = (sum of prices) * discount - bonus, which takes
//! exactly one ciphertext multiplication and one relinearization. The
//! per-scheme multiset of homomorphic operations is identical across T1-T3;
//! only the place of execution differs.

use std::sync::Arc;

use fhe::ring::Sampler;
use fhe::scheme::{PublicKey, RelinKey, SecretKey};
use fhe::{Ciphertext, Context, Scheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::thread_cpu_ns;
use crate::error::{Result, SmobError};
use crate::privacy::{audit_trace, AllowMatrix, AuditReport, DataCategory, PartyRole, TraceEntry};
use crate::transport::{
    deserialize_ciphertext, deserialize_public_key, deserialize_relin_key, serialize_ciphertext,
    serialize_public_key, serialize_relin_key, Endpoint, MsgType, Network, PartyId, TaggedMessage,
    TransportKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransactionKind {
    T1,
    T2,
    T3,
}

impl TransactionKind {
    pub const ALL: [TransactionKind; 3] =
        [TransactionKind::T1, TransactionKind::T2, TransactionKind::T3];

    pub fn name(self) -> &'static str {
        match self {
            TransactionKind::T1 => "t1",
            TransactionKind::T2 => "t2",
            TransactionKind::T3 => "t3",
        }
    }

    pub fn from_name(s: &str) -> Result<TransactionKind> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(TransactionKind::T1),
            "t2" => Ok(TransactionKind::T2),
            "t3" => Ok(TransactionKind::T3),
            other => Err(SmobError::Config(format!("unknown transaction {other}"))),
        }
    }
}

/// Fine-grained operation labels for per-party logs; the bench harness folds
/// Add/Multiply/Subtract/Rescale into its "calculate" bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    ContextCreation,
    KeyGen,
    EvalKeyGen,
    Encrypt,
    Add,
    Multiply,
    Relinearize,
    Rescale,
    Subtract,
    Decrypt,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OpSample {
    pub op: OpKind,
    pub ns: u64,
}

/// One transaction's numeric workload. Prices are currency cents; for the
/// integer schemes every value must be a non-negative integer below the
/// plain modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub prices: Vec<f64>,
    pub discount: f64,
    pub bonus: f64,
    /// Which provider supplies the encrypted discount/bonus pair.
    pub db_provider: usize,
}

impl WorkloadSpec {
    pub fn new(prices: Vec<f64>, discount: f64, bonus: f64) -> Self {
        WorkloadSpec { prices, discount, bonus, db_provider: 0 }
    }

    pub fn providers(&self) -> usize {
        self.prices.len()
    }

    fn validate(&self, scheme: Scheme, t: Option<u64>) -> Result<()> {
        if self.prices.is_empty() {
            return Err(SmobError::Config("at least one provider price required".into()));
        }
        if self.db_provider >= self.prices.len() {
            return Err(SmobError::Config("db_provider out of range".into()));
        }
        if scheme != Scheme::Ckks {
            let t = t.expect("integer scheme has t");
            for v in self.prices.iter().chain([&self.discount, &self.bonus]) {
                if v.fract() != 0.0 || *v < 0.0 || *v >= t as f64 {
                    return Err(SmobError::Config(format!(
                        "value {v} is not an integer in [0, {t}) as the integer schemes require"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TotalValue {
    Int(u64),
    Real(f64),
}

impl TotalValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            TotalValue::Int(v) => *v as f64,
            TotalValue::Real(v) => *v,
        }
    }
}

/// Ground-truth plaintext evaluation of (sum p_i) * d - b.
pub fn oracle_total(w: &WorkloadSpec, scheme: Scheme, t: Option<u64>) -> Result<TotalValue> {
    w.validate(scheme, t)?;
    if scheme == Scheme::Ckks {
        let sum: f64 = w.prices.iter().sum();
        Ok(TotalValue::Real(sum * w.discount - w.bonus))
    } else {
        let t = t.expect("integer scheme has t") as i128;
        let sum: i128 = w.prices.iter().map(|&p| p as i128).sum();
        let total = (sum * w.discount as i128 - w.bonus as i128).rem_euclid(t);
        Ok(TotalValue::Int(total as u64))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartyOps {
    pub id: PartyId,
    pub ops: Vec<OpSample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransactionOutcome {
    pub kind: TransactionKind,
    pub txid: [u8; 16],
    pub total: TotalValue,
    pub trace: Vec<TraceEntry>,
    pub party_ops: Vec<PartyOps>,
    pub audit: AuditReport,
}

impl TransactionOutcome {
    /// Multiset of homomorphic operations over all parties.
    pub fn op_counts(&self) -> Vec<(OpKind, usize)> {
        let mut counts: std::collections::BTreeMap<OpKind, usize> = Default::default();
        for p in &self.party_ops {
            for s in &p.ops {
                *counts.entry(s.op).or_default() += 1;
            }
        }
        counts.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "detail")]
pub enum Verdict {
    Ok,
    NumericMismatch(String),
    AuditViolation(String),
}

/// Check an outcome against the oracle and its audit report.
pub fn verify_outcome(
    o: &TransactionOutcome,
    w: &WorkloadSpec,
    ctx: &Context,
) -> Result<Verdict> {
    let t = ctx.plain_modulus().map(|m| m.value());
    let expect = oracle_total(w, ctx.scheme(), t)?;
    let ok = match (o.total, expect) {
        (TotalValue::Int(a), TotalValue::Int(b)) => a == b,
        (TotalValue::Real(a), TotalValue::Real(b)) => (a - b).abs() <= 1e-3 * b.abs().max(1.0),
        _ => false,
    };
    if !ok {
        return Ok(Verdict::NumericMismatch(format!(
            "total {:?} differs from oracle {:?}",
            o.total, expect
        )));
    }
    if o.audit.violations > 0 {
        let first = o
            .audit
            .records
            .iter()
            .find_map(|r| r.reason.clone())
            .unwrap_or_default();
        return Ok(Verdict::AuditViolation(first));
    }
    // Key hygiene: nothing Secret ever crosses the wire.
    if o.trace.iter().any(|e| e.category == DataCategory::Secret) {
        return Ok(Verdict::AuditViolation("secret-category message on the wire".into()));
    }
    Ok(Verdict::Ok)
}

/// One party's execution state during a transaction.
struct Actor {
    id: PartyId,
    ctx: Arc<Context>,
    sampler: Sampler,
    ep: Endpoint,
    ops: Vec<OpSample>,
    txid: [u8; 16],
}

impl Actor {
    fn timed<T>(&mut self, op: OpKind, f: impl FnOnce(&mut Self) -> T) -> T {
        let t0 = thread_cpu_ns();
        let out = f(self);
        let t1 = thread_cpu_ns();
        self.ops.push(OpSample { op, ns: t1.saturating_sub(t0) });
        out
    }

    fn keygen_timed(&mut self) -> Result<(SecretKey, PublicKey, RelinKey)> {
        let (sk, pk) = self.timed(OpKind::KeyGen, |a| {
            let sk = fhe::scheme::secret_keygen(&a.ctx, &mut a.sampler)?;
            let pk = fhe::scheme::public_keygen(&a.ctx, &sk, &mut a.sampler)?;
            Ok::<_, fhe::FheError>((sk, pk))
        })?;
        let rk = self.timed(OpKind::EvalKeyGen, |a| {
            fhe::scheme::relin_keygen(&a.ctx, &sk, &mut a.sampler)
        })?;
        Ok((sk, pk, rk))
    }

    /// Encrypt one value into slot 0. `scale` overrides the default CKKS
    /// scale for level-aligned operands.
    fn encrypt_value(&mut self, pk: &PublicKey, v: f64, scale: Option<f64>) -> Result<Ciphertext> {
        self.timed(OpKind::Encrypt, |a| {
            let pt = if a.ctx.scheme() == Scheme::Ckks {
                a.ctx.ckks_encode(&[v], scale.unwrap_or_else(|| a.ctx.default_scale()))?
            } else {
                a.ctx.encode_integers(&[v as u64])?
            };
            let ct = a.ctx.encrypt(pk, &pt, &mut a.sampler)?;
            Ok::<_, fhe::FheError>(ct)
        })
        .map_err(SmobError::from)
    }

    fn decrypt_total(&mut self, sk: &SecretKey, ct: &Ciphertext) -> Result<TotalValue> {
        let pt = self
            .timed(OpKind::Decrypt, |a| a.ctx.decrypt(sk, ct))
            .map_err(|e| self.step_err("decrypt", e))?;
        if self.ctx.scheme() == Scheme::Ckks {
            Ok(TotalValue::Real(self.ctx.ckks_decode(&pt)?[0]))
        } else {
            Ok(TotalValue::Int(self.ctx.decode_integers(&pt)?[0]))
        }
    }

    fn step_err(&self, step: &str, e: fhe::FheError) -> SmobError {
        SmobError::Protocol(format!("{} failed at {step}: {e}", self.id.label()))
    }

    fn msg(&self, msg_type: MsgType, category: DataCategory, payload: Vec<u8>) -> TaggedMessage {
        TaggedMessage {
            txid: self.txid,
            msg_type,
            scheme: self.ctx.scheme(),
            category,
            payload,
        }
    }

    fn send_ct(&mut self, to: PartyId, msg_type: MsgType, ct: &Ciphertext) -> Result<()> {
        let m = self.msg(msg_type, DataCategory::Insensitive, serialize_ciphertext(ct));
        self.ep.send(to, &m)
    }

    fn recv_ct(&mut self, from: PartyId, expect: MsgType) -> Result<Ciphertext> {
        let m = self.ep.recv_from(from)?;
        if m.msg_type != expect {
            return Err(SmobError::Protocol(format!(
                "{} expected {} from {}, got {}",
                self.id.label(),
                expect.name(),
                from.label(),
                m.msg_type.name()
            )));
        }
        deserialize_ciphertext(&m.payload, &self.ctx)
    }

    fn send_pk(&mut self, to: PartyId, pk: &PublicKey) -> Result<()> {
        let cat = if self.id.role == PartyRole::Customer {
            DataCategory::Pseudonym
        } else {
            DataCategory::Insensitive
        };
        let m = self.msg(MsgType::KeyOffer, cat, serialize_public_key(pk));
        self.ep.send(to, &m)
    }

    fn recv_pk(&mut self, from: PartyId) -> Result<PublicKey> {
        let m = self.ep.recv_from(from)?;
        deserialize_public_key(&m.payload, &self.ctx)
    }

    fn send_rk(&mut self, to: PartyId, rk: &RelinKey) -> Result<()> {
        let cat = if self.id.role == PartyRole::Customer {
            DataCategory::Pseudonym
        } else {
            DataCategory::Insensitive
        };
        let m = self.msg(MsgType::EvalKey, cat, serialize_relin_key(rk));
        self.ep.send(to, &m)
    }

    fn recv_rk(&mut self, from: PartyId) -> Result<RelinKey> {
        let m = self.ep.recv_from(from)?;
        deserialize_relin_key(&m.payload, &self.ctx)
    }

    fn send_total(&mut self, to: PartyId, total: TotalValue) -> Result<()> {
        let payload = total.as_f64().to_le_bytes().to_vec();
        let m = self.msg(MsgType::PlainResult, DataCategory::Insensitive, payload);
        self.ep.send(to, &m)
    }

    /// (sum of prices)*d - b given all operand ciphertexts, with the
    /// relinearization key. The CKKS path rescales after relinearizing and
    /// level-aligns the bonus before subtracting.
    fn calculate(
        &mut self,
        prices: &[Ciphertext],
        d: &Ciphertext,
        b: &Ciphertext,
        rk: &RelinKey,
    ) -> Result<Ciphertext> {
        let mut sum = prices[0].clone();
        for p in &prices[1..] {
            sum = self
                .timed(OpKind::Add, |a| a.ctx.add(&sum, p))
                .map_err(|e| self.step_err("add", e))?;
        }
        let prod = self
            .timed(OpKind::Multiply, |a| a.ctx.multiply(&sum, d))
            .map_err(|e| self.step_err("multiply", e))?;
        let mut prod = self
            .timed(OpKind::Relinearize, |a| a.ctx.relinearize(rk, &prod))
            .map_err(|e| self.step_err("relinearize", e))?;
        let b_aligned;
        let b_ref = if self.ctx.scheme() == Scheme::Ckks {
            prod = self
                .timed(OpKind::Rescale, |a| a.ctx.rescale(&prod))
                .map_err(|e| self.step_err("rescale", e))?;
            b_aligned = self.ctx.drop_level(b, prod.level)?;
            &b_aligned
        } else {
            b
        };
        self.timed(OpKind::Subtract, |a| a.ctx.sub(&prod, b_ref))
            .map_err(|e| self.step_err("subtract", e))
    }
}

/// The CKKS scale at which the bonus operand must be encrypted so it aligns
/// with the once-rescaled product.
pub fn bonus_scale(ctx: &Context) -> f64 {
    if ctx.scheme() != Scheme::Ckks {
        return 0.0;
    }
    let s = ctx.default_scale();
    let p = ctx.chain().primes()[ctx.top_level()].value() as f64;
    s * s / p
}

fn derive_txid(seed: u64, kind: TransactionKind, scheme: Scheme, providers: usize) -> [u8; 16] {
    let mut h = Sha256::new();
    h.update(b"smob-txid");
    h.update(seed.to_le_bytes());
    h.update([kind as u8, scheme as u8, providers as u8]);
    let d = h.finalize();
    d[..16].try_into().unwrap()
}

fn party_seed(seed: u64, txid: &[u8; 16]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"smob-master");
    h.update(seed.to_le_bytes());
    h.update(txid);
    h.finalize().into()
}

pub const CUSTOMER: PartyId = PartyId { role: PartyRole::Customer, index: 0 };
pub const PLATFORM: PartyId = PartyId { role: PartyRole::MobilityPlatform, index: 0 };

pub fn provider(i: usize) -> PartyId {
    PartyId { role: PartyRole::MobilityProvider, index: i as u8 }
}

fn build_actors(
    ctx: &Arc<Context>,
    kind: TransactionKind,
    w: &WorkloadSpec,
    seed: u64,
    transport: TransportKind,
) -> Result<(Actor, Actor, Vec<Actor>, Network)> {
    let p = w.providers();
    let txid = derive_txid(seed, kind, ctx.scheme(), p);
    let master = Sampler::from_seed(party_seed(seed, &txid));
    let mut ids = vec![CUSTOMER, PLATFORM];
    ids.extend((0..p).map(provider));
    let mut net = Network::connect(&ids, transport)?;
    let mk = |id: PartyId, net: &mut Network, master: &Sampler| Actor {
        id,
        ctx: Arc::clone(ctx),
        sampler: master.derive(id.label().as_bytes()),
        ep: net.take(id),
        ops: Vec::new(),
        txid,
    };
    let customer = mk(CUSTOMER, &mut net, &master);
    let platform = mk(PLATFORM, &mut net, &master);
    let providers: Vec<Actor> = (0..p).map(|i| mk(provider(i), &mut net, &master)).collect();
    Ok((customer, platform, providers, net))
}

fn finish(
    kind: TransactionKind,
    txid: [u8; 16],
    total: TotalValue,
    actors: Vec<Actor>,
    net: Network,
    matrix: &AllowMatrix,
) -> TransactionOutcome {
    let party_ops = actors
        .iter()
        .map(|a| PartyOps { id: a.id, ops: a.ops.clone() })
        .collect();
    drop(actors); // close endpoints before tearing the network down
    let trace = net.trace.lock().unwrap().clone();
    let audit = audit_trace(&trace, matrix);
    TransactionOutcome { kind, txid, total, trace, party_ops, audit }
}

/// T1: computation at the platform under the customer's one-time key.
pub fn run_t1(
    ctx: &Arc<Context>,
    w: &WorkloadSpec,
    seed: u64,
    transport: TransportKind,
) -> Result<TransactionOutcome> {
    w.validate(ctx.scheme(), ctx.plain_modulus().map(|m| m.value()))?;
    let (mut customer, mut platform, mut providers, net) =
        build_actors(ctx, TransactionKind::T1, w, seed, transport)?;
    let txid = customer.txid;
    let p = w.providers();

    let (sk, pk, rk) = customer.keygen_timed()?;
    // The public key goes to the providers directly, never via the platform.
    for i in 0..p {
        customer.send_pk(provider(i), &pk)?;
    }
    customer.send_rk(PLATFORM, &rk)?;

    // Providers encrypt independently, in parallel.
    let b_scale = bonus_scale(ctx);
    let db_provider = w.db_provider;
    std::thread::scope(|s| -> Result<()> {
        let mut handles = Vec::new();
        for (i, prov) in providers.iter_mut().enumerate() {
            let price = w.prices[i];
            let (d, b) = (w.discount, w.bonus);
            handles.push(s.spawn(move || -> Result<()> {
                let pk = prov.recv_pk(CUSTOMER)?;
                let ct = prov.encrypt_value(&pk, price, None)?;
                prov.send_ct(PLATFORM, MsgType::CtPrice, &ct)?;
                if i == db_provider {
                    let ct_d = prov.encrypt_value(&pk, d, None)?;
                    let scale = (prov.ctx.scheme() == Scheme::Ckks).then_some(b_scale);
                    let ct_b = prov.encrypt_value(&pk, b, scale)?;
                    prov.send_ct(PLATFORM, MsgType::CtPrice, &ct_d)?;
                    prov.send_ct(PLATFORM, MsgType::CtPrice, &ct_b)?;
                }
                Ok(())
            }));
        }
        for h in handles {
            h.join().expect("provider thread")?;
        }
        Ok(())
    })?;

    let rk = platform.recv_rk(CUSTOMER)?;
    let mut price_cts = Vec::with_capacity(p);
    let mut d_ct = None;
    let mut b_ct = None;
    for i in 0..p {
        price_cts.push(platform.recv_ct(provider(i), MsgType::CtPrice)?);
        if i == w.db_provider {
            d_ct = Some(platform.recv_ct(provider(i), MsgType::CtPrice)?);
            b_ct = Some(platform.recv_ct(provider(i), MsgType::CtPrice)?);
        }
    }
    let result = platform.calculate(&price_cts, &d_ct.unwrap(), &b_ct.unwrap(), &rk)?;
    platform.send_ct(CUSTOMER, MsgType::CtResult, &result)?;

    let result_ct = customer.recv_ct(PLATFORM, MsgType::CtResult)?;
    let total = customer.decrypt_total(&sk, &result_ct)?;
    customer.send_total(PLATFORM, total)?;
    platform.ep.recv_from(CUSTOMER)?; // platform records the aggregate

    let mut actors = vec![customer, platform];
    actors.extend(providers);
    Ok(finish(TransactionKind::T1, txid, total, actors, net, &AllowMatrix::default()))
}

/// T2: the encrypted partial sum travels along the provider chain via the
/// platform; the last provider multiplies and relinearizes.
pub fn run_t2(
    ctx: &Arc<Context>,
    w: &WorkloadSpec,
    seed: u64,
    transport: TransportKind,
) -> Result<TransactionOutcome> {
    w.validate(ctx.scheme(), ctx.plain_modulus().map(|m| m.value()))?;
    let (mut customer, mut platform, mut providers, net) =
        build_actors(ctx, TransactionKind::T2, w, seed, transport)?;
    let txid = customer.txid;
    let p = w.providers();
    let last = p - 1;

    let (sk, pk, rk) = customer.keygen_timed()?;
    for i in 0..p {
        customer.send_pk(provider(i), &pk)?;
    }
    customer.send_rk(provider(last), &rk)?;

    // Chain: each provider adds its encrypted price to the running partial
    // sum; discount and bonus (from provider 0) travel along with it.
    let b_scale = bonus_scale(ctx);
    for i in 0..p {
        let prov = &mut providers[i];
        let pk_i = prov.recv_pk(CUSTOMER)?;
        let ct_i = prov.encrypt_value(&pk_i, w.prices[i], None)?;
        let (partial, d_ct, b_ct) = if i == 0 {
            let ct_d = prov.encrypt_value(&pk_i, w.discount, None)?;
            let scale = (ctx.scheme() == Scheme::Ckks).then_some(b_scale);
            let ct_b = prov.encrypt_value(&pk_i, w.bonus, scale)?;
            (ct_i, ct_d, ct_b)
        } else {
            let prev = prov.recv_ct(PLATFORM, MsgType::CtPartial)?;
            let d_ct = prov.recv_ct(PLATFORM, MsgType::CtPartial)?;
            let b_ct = prov.recv_ct(PLATFORM, MsgType::CtPartial)?;
            let sum = prov
                .timed(OpKind::Add, |a| a.ctx.add(&prev, &ct_i))
                .map_err(|e| {
                    SmobError::Protocol(format!("chain position {i}: add failed: {e}"))
                })?;
            (sum, d_ct, b_ct)
        };
        if i < last {
            // Forward the intermediate results through the platform.
            prov.send_ct(PLATFORM, MsgType::CtPartial, &partial)?;
            prov.send_ct(PLATFORM, MsgType::CtPartial, &d_ct)?;
            prov.send_ct(PLATFORM, MsgType::CtPartial, &b_ct)?;
            for _ in 0..3 {
                let m = platform.ep.recv_from(provider(i))?;
                platform.ep.send(provider(i + 1), &m)?;
            }
        } else {
            let rk = prov.recv_rk(CUSTOMER)?;
            let result = prov.calculate(std::slice::from_ref(&partial), &d_ct, &b_ct, &rk)?;
            prov.send_ct(PLATFORM, MsgType::CtResult, &result)?;
            let m = platform.ep.recv_from(provider(last))?;
            platform.ep.send(CUSTOMER, &m)?;
        }
    }

    let result_ct = customer.recv_ct(PLATFORM, MsgType::CtResult)?;
    let total = customer.decrypt_total(&sk, &result_ct)?;
    customer.send_total(PLATFORM, total)?;
    platform.ep.recv_from(CUSTOMER)?;

    let mut actors = vec![customer, platform];
    actors.extend(providers);
    Ok(finish(TransactionKind::T2, txid, total, actors, net, &AllowMatrix::default()))
}

/// T3: computation at the customer under the platform's key; the platform
/// decrypts the aggregate.
pub fn run_t3(
    ctx: &Arc<Context>,
    w: &WorkloadSpec,
    seed: u64,
    transport: TransportKind,
) -> Result<TransactionOutcome> {
    w.validate(ctx.scheme(), ctx.plain_modulus().map(|m| m.value()))?;
    let (mut customer, mut platform, mut providers, net) =
        build_actors(ctx, TransactionKind::T3, w, seed, transport)?;
    let txid = customer.txid;
    let p = w.providers();

    let (sk, pk, rk) = platform.keygen_timed()?;
    for i in 0..p {
        platform.send_pk(provider(i), &pk)?;
    }
    platform.send_pk(CUSTOMER, &pk)?;
    platform.send_rk(CUSTOMER, &rk)?;

    // Providers encrypt their parameters under the platform key, in parallel,
    // and send them to the computing customer.
    std::thread::scope(|s| -> Result<()> {
        let mut handles = Vec::new();
        for (prov, &price) in providers.iter_mut().zip(&w.prices) {
            handles.push(s.spawn(move || -> Result<()> {
                let pk = prov.recv_pk(PLATFORM)?;
                let ct = prov.encrypt_value(&pk, price, None)?;
                prov.send_ct(CUSTOMER, MsgType::CtPrice, &ct)?;
                Ok(())
            }));
        }
        for h in handles {
            h.join().expect("provider thread")?;
        }
        Ok(())
    })?;

    let pk_c = customer.recv_pk(PLATFORM)?;
    let rk_c = customer.recv_rk(PLATFORM)?;
    let mut price_cts = Vec::with_capacity(p);
    for i in 0..p {
        price_cts.push(customer.recv_ct(provider(i), MsgType::CtPrice)?);
    }
    let d_ct = customer.encrypt_value(&pk_c, w.discount, None)?;
    let scale = (ctx.scheme() == Scheme::Ckks).then_some(bonus_scale(ctx));
    let b_ct = customer.encrypt_value(&pk_c, w.bonus, scale)?;
    let result = customer.calculate(&price_cts, &d_ct, &b_ct, &rk_c)?;
    customer.send_ct(PLATFORM, MsgType::CtResult, &result)?;

    let result_ct = platform.recv_ct(CUSTOMER, MsgType::CtResult)?;
    let total = platform.decrypt_total(&sk, &result_ct)?;
    platform.send_total(CUSTOMER, total)?;
    customer.ep.recv_from(PLATFORM)?;

    let mut actors = vec![customer, platform];
    actors.extend(providers);
    Ok(finish(TransactionKind::T3, txid, total, actors, net, &AllowMatrix::default()))
}

pub fn run_transaction(
    kind: TransactionKind,
    ctx: &Arc<Context>,
    w: &WorkloadSpec,
    seed: u64,
    transport: TransportKind,
) -> Result<TransactionOutcome> {
    match kind {
        TransactionKind::T1 => run_t1(ctx, w, seed, transport),
        TransactionKind::T2 => run_t2(ctx, w, seed, transport),
        TransactionKind::T3 => run_t3(ctx, w, seed, transport),
    }
}
