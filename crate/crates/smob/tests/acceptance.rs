//! End-to-end acceptance suite. Each criterion prints exactly one pass/fail
//! line (run with `--nocapture` to see them as they complete).
//!
//! Repetition counts for the large-parameter benchmark criterion honor the
//! SMOB_ACCEPT_REPS environment variable (default 3) so CI stays fast; set
//! it to 500 for a full-depth run.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use fhe::ring::{generate_primes, ring_mul, Domain, Modulus, NttTable, Sampler};
use fhe::{Context, EncryptionParameters, Preset, Scheme};
use smob::bench::{
    estimate_cost, qualitative_flags, render_report, run_transaction_bench, time_operation,
    transaction_ref_ms, BenchOp, ReportFormat, PAPER_INSTANCE_CORES, PAPER_PRICE_PER_HOUR_USD,
};
use smob::privacy::{audit_trace, AllowMatrix, DataCategory, PartyRole};
use smob::transactions::{
    run_transaction, verify_outcome, TransactionKind, TransactionOutcome, Verdict, WorkloadSpec,
};
use smob::transport::{
    deserialize_ciphertext, serialize_ciphertext, TransportKind,
};

fn report(n: u32, desc: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("criterion {n}: pass - {desc}"),
        Err(e) => {
            println!("criterion {n}: FAIL - {desc}");
            std::panic::resume_unwind(e);
        }
    }
}

fn ctx_for(scheme: Scheme, preset: Preset) -> Arc<Context> {
    Context::new(EncryptionParameters::preset(scheme, preset)).unwrap()
}

/// Deterministic value stream independent of the library's sampler.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        // splitmix64
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn real(&mut self, bound: f64) -> f64 {
        (self.next() as f64 / u64::MAX as f64 * 2.0 - 1.0) * bound
    }
}

fn schoolbook_negacyclic(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut acc = vec![0i128; n];
    for i in 0..n {
        for j in 0..n {
            let prod = a[i] as i128 * b[j] as i128 % q as i128;
            if i + j < n {
                acc[i + j] += prod;
            } else {
                acc[i + j - n] -= prod;
            }
        }
    }
    acc.into_iter().map(|x| x.rem_euclid(q as i128) as u64).collect()
}

#[test]
fn criterion_1_ring_oracle_equivalence() {
    report(1, "ring multiplication equals the schoolbook negacyclic oracle", || {
        for n in [8usize, 16, 64, 256] {
            let q = generate_primes(50, 2 * n as u64, 1, &[]).unwrap()[0];
            let m = Modulus::new(q, n).unwrap();
            let tables = vec![NttTable::new(n, m).unwrap()];
            let moduli = vec![m];
            let mut s = Sampler::from_seed([n as u8; 32]);
            for _ in 0..1000 {
                let a = s.uniform(n, &moduli, Domain::Coefficient);
                let b = s.uniform(n, &moduli, Domain::Coefficient);
                let fast = ring_mul(&a, &b, &tables).unwrap();
                let slow = schoolbook_negacyclic(&a.residues()[0], &b.residues()[0], q);
                assert_eq!(fast.residues()[0], slow, "n = {n}");
            }
        }
    });
}

#[test]
fn criterion_2_scheme_round_trips() {
    report(2, "decrypt-of-encrypt identity per scheme per preset", || {
        for preset in [Preset::Desk, Preset::Paper] {
            for scheme in [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks] {
                let ctx = ctx_for(scheme, preset);
                let mut s = Sampler::from_seed([33; 32]);
                let (sk, pk, _) = fhe::scheme::keygen(&ctx, &mut s).unwrap();
                let slots = ctx.slot_count().unwrap();
                let mut rng = Rng(preset as u64 * 17 + scheme as u64);
                for _ in 0..100 {
                    if scheme == Scheme::Ckks {
                        let vals: Vec<f64> =
                            (0..slots.min(64)).map(|_| rng.real(1000.0)).collect();
                        let pt = ctx.ckks_encode(&vals, ctx.default_scale()).unwrap();
                        let ct = ctx.encrypt(&pk, &pt, &mut s).unwrap();
                        let out = ctx.ckks_decode(&ctx.decrypt(&sk, &ct).unwrap()).unwrap();
                        for (v, o) in vals.iter().zip(&out) {
                            assert!((v - o).abs() <= 1e-4, "{scheme:?} {preset:?}: {v} vs {o}");
                        }
                    } else {
                        let t = ctx.plain_modulus().unwrap().value();
                        let vals: Vec<u64> = (0..slots).map(|_| rng.next() % t).collect();
                        let pt = ctx.encode_integers(&vals).unwrap();
                        let ct = ctx.encrypt(&pk, &pt, &mut s).unwrap();
                        let out = ctx.decode_integers(&ctx.decrypt(&sk, &ct).unwrap()).unwrap();
                        assert_eq!(vals, out, "{scheme:?} {preset:?}");
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_3_homomorphism() {
    report(3, "homomorphic add/multiply match the plaintext oracle; noise budget positive", || {
        for scheme in [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks] {
            let ctx = ctx_for(scheme, Preset::Desk);
            let mut s = Sampler::from_seed([44; 32]);
            let (sk, pk, rk) = fhe::scheme::keygen(&ctx, &mut s).unwrap();
            let mut rng = Rng(1000 + scheme as u64);
            for _ in 0..1000 {
                if scheme == Scheme::Ckks {
                    let (a, b) = (rng.real(100.0), rng.real(100.0));
                    let scale = ctx.default_scale();
                    let ca = ctx.encrypt(&pk, &ctx.ckks_encode(&[a], scale).unwrap(), &mut s).unwrap();
                    let cb = ctx.encrypt(&pk, &ctx.ckks_encode(&[b], scale).unwrap(), &mut s).unwrap();
                    let sum = ctx.ckks_decode(&ctx.decrypt(&sk, &ctx.add(&ca, &cb).unwrap()).unwrap()).unwrap()[0];
                    assert!((sum - (a + b)).abs() <= 1e-3, "{a}+{b}: {sum}");
                    let prod_ct = ctx.relinearize(&rk, &ctx.multiply(&ca, &cb).unwrap()).unwrap();
                    let prod = ctx.ckks_decode(&ctx.decrypt(&sk, &prod_ct).unwrap()).unwrap()[0];
                    let tol = 1e-3 * (a * b).abs().max(1.0);
                    assert!((prod - a * b).abs() <= tol, "{a}*{b}: {prod}");
                } else {
                    let t = ctx.plain_modulus().unwrap().value();
                    let (a, b) = (rng.next() % t, rng.next() % t);
                    let ca = ctx.encrypt(&pk, &ctx.encode_integers(&[a]).unwrap(), &mut s).unwrap();
                    let cb = ctx.encrypt(&pk, &ctx.encode_integers(&[b]).unwrap(), &mut s).unwrap();
                    let sum = ctx.decode_integers(&ctx.decrypt(&sk, &ctx.add(&ca, &cb).unwrap()).unwrap()).unwrap()[0];
                    assert_eq!(sum, (a + b) % t);
                    let prod_ct = ctx.relinearize(&rk, &ctx.multiply(&ca, &cb).unwrap()).unwrap();
                    let prod = ctx.decode_integers(&ctx.decrypt(&sk, &prod_ct).unwrap()).unwrap()[0];
                    assert_eq!(prod as u128, (a as u128 * b as u128) % t as u128);
                }
            }

            // Canonical workload leaves a positive noise budget (BFV/BGV).
            if scheme != Scheme::Ckks {
                let enc = |v: u64, s: &mut Sampler| {
                    ctx.encrypt(&pk, &ctx.encode_integers(&[v]).unwrap(), s).unwrap()
                };
                let p1 = enc(100, &mut s);
                let p2 = enc(100, &mut s);
                let d = enc(2, &mut s);
                let b = enc(50, &mut s);
                let sum = ctx.add(&p1, &p2).unwrap();
                let prod = ctx.relinearize(&rk, &ctx.multiply(&sum, &d).unwrap()).unwrap();
                let total = ctx.sub(&prod, &b).unwrap();
                let budget = ctx.noise_budget(&sk, &total).unwrap();
                assert!(budget > 0, "{scheme:?} budget {budget}");
            }
        }
    });
}

fn full_matrix() -> Vec<(Scheme, usize, Vec<TransactionOutcome>, WorkloadSpec, Arc<Context>)> {
    let mut cells = Vec::new();
    for scheme in [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks] {
        let ctx = ctx_for(scheme, Preset::Desk);
        for p in [1usize, 2, 4, 8] {
            let prices: Vec<f64> = (0..p).map(|i| 50.0 + 25.0 * i as f64).collect();
            let w = WorkloadSpec::new(prices, 2.0, 30.0);
            let outs: Vec<TransactionOutcome> = TransactionKind::ALL
                .iter()
                .map(|&k| run_transaction(k, &ctx, &w, 777, TransportKind::Inproc).unwrap())
                .collect();
            cells.push((scheme, p, outs, w, ctx.clone()));
        }
    }
    cells
}

#[test]
fn criterion_4_transaction_matrix() {
    report(4, "full transaction matrix verifies and totals mutually agree", || {
        for (scheme, p, outs, w, ctx) in full_matrix() {
            for o in &outs {
                assert_eq!(
                    verify_outcome(o, &w, &ctx).unwrap(),
                    Verdict::Ok,
                    "{:?} {scheme:?} P={p}",
                    o.kind
                );
            }
            let totals: Vec<f64> = outs.iter().map(|o| o.total.as_f64()).collect();
            let tol = if scheme == Scheme::Ckks { 2e-3 } else { 0.0 };
            for v in &totals[1..] {
                assert!((v - totals[0]).abs() <= tol, "{scheme:?} P={p}: {totals:?}");
            }
        }
    });
}

#[test]
fn criterion_5_privacy_audit() {
    report(5, "clean matrix audits clean; planted faults are each caught", || {
        let matrix = AllowMatrix::default();
        let mut sample_traces = Vec::new();
        for (_, _, outs, _, _) in full_matrix() {
            for o in &outs {
                assert_eq!(o.audit.violations, 0, "{:?}", o.kind);
                if matches!(o.kind, TransactionKind::T1 | TransactionKind::T2)
                    && sample_traces.len() < 2
                {
                    sample_traces.push(o.trace.clone());
                }
            }
        }
        for trace in &sample_traces {
            // Plaintext sensitive data to the platform.
            let mut t = trace.clone();
            let mut e = trace[0].clone();
            e.category = DataCategory::Sensitive;
            e.provenance = None;
            e.customer_key_material = false;
            e.receiver = PartyRole::MobilityPlatform;
            t.push(e);
            let r = audit_trace(&t, &matrix);
            assert_eq!(r.violations, 1);
            assert!(r.records.last().unwrap().reason.as_deref().unwrap().contains("sensitive"));

            // Secret key material on the wire, to anyone.
            let mut t = trace.clone();
            let mut e = trace[0].clone();
            e.category = DataCategory::Secret;
            e.provenance = None;
            e.customer_key_material = false;
            e.receiver = PartyRole::BillingProvider;
            t.push(e);
            assert_eq!(audit_trace(&t, &matrix).violations, 1);

            // Customer public key reaching the platform.
            let mut t = trace.clone();
            let mut e = trace
                .iter()
                .find(|e| e.customer_key_material)
                .expect("customer key offer present")
                .clone();
            e.receiver = PartyRole::MobilityPlatform;
            t.push(e);
            let r = audit_trace(&t, &matrix);
            assert_eq!(r.violations, 1);
            assert!(r.records.last().unwrap().reason.as_deref().unwrap().contains("public key"));
        }
    });
}

#[test]
fn criterion_6_serialization_and_transport() {
    report(6, "bit-exact serialization, exact framed size, transport equivalence", || {
        for scheme in [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks] {
            let ctx = ctx_for(scheme, Preset::Desk);
            let mut s = Sampler::from_seed([66; 32]);
            let (_, pk, _) = fhe::scheme::keygen(&ctx, &mut s).unwrap();
            let pt = if scheme == Scheme::Ckks {
                ctx.ckks_encode(&[2.5], ctx.default_scale()).unwrap()
            } else {
                ctx.encode_integers(&[7]).unwrap()
            };
            let ct = ctx.encrypt(&pk, &pt, &mut s).unwrap();
            let bytes = serialize_ciphertext(&ct);
            let back = deserialize_ciphertext(&bytes, &ctx).unwrap();
            assert_eq!(bytes, serialize_ciphertext(&back));
            if scheme != Scheme::Ckks {
                assert_eq!(bytes.len(), 131086);
            }
        }

        let w = WorkloadSpec::new(vec![100.0, 200.0], 2.0, 40.0);
        for scheme in [Scheme::Bfv, Scheme::Ckks] {
            let ctx = ctx_for(scheme, Preset::Desk);
            for kind in TransactionKind::ALL {
                let a = run_transaction(kind, &ctx, &w, 13, TransportKind::Inproc).unwrap();
                let b = run_transaction(kind, &ctx, &w, 13, TransportKind::Tcp).unwrap();
                assert_eq!(a.total, b.total, "{kind:?} {scheme:?}");
            }
        }
    });
}

#[test]
fn criterion_7_benchmark_grid() {
    report(7, "large-parameter benchmark grid with qualitative flags and references", || {
        let reps: usize = std::env::var("SMOB_ACCEPT_REPS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(3);
        let w = WorkloadSpec::new(vec![100.0, 100.0], 2.0, 50.0);
        let mut operations = Vec::new();
        let mut transactions = Vec::new();
        for scheme in [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks] {
            let ctx = ctx_for(scheme, Preset::Paper);
            assert_eq!(ctx.degree(), 16384);
            for op in BenchOp::ALL {
                let r = if op == BenchOp::ContextCreation { 1 } else { reps };
                operations.push(time_operation(op, &ctx, r, 3).unwrap());
            }
            for kind in TransactionKind::ALL {
                transactions.push(
                    run_transaction_bench(kind, &ctx, &w, 1, 3, TransportKind::Inproc).unwrap(),
                );
            }
        }
        // Complete 7-operation x 3-scheme grid, plus per-party analogues.
        assert_eq!(operations.len(), 21);
        assert_eq!(transactions.len(), 9);
        for t in &transactions {
            assert!(t.verified);
            assert_eq!(t.paper_ref_ms, transaction_ref_ms(Scheme::from_name(&t.scheme).unwrap()));
            assert!(!t.parties.is_empty());
        }
        // Calculate-phase reference annotations are attached, never gated on.
        assert!(operations
            .iter()
            .filter(|m| m.op == "calculate")
            .all(|m| m.paper_ref_ms.is_some()));

        let flags = qualitative_flags(&operations);
        assert_eq!(flags.encrypt_relin_top2.len(), 3);
        // Encryption and relinearization dominate the data path wherever the
        // multiplication itself is cheap (NTT-form schemes).
        assert!(flags.encrypt_relin_top2["bgv"]);
        assert!(flags.encrypt_relin_top2["ckks"]);
    });
}

#[test]
fn criterion_8_cost_model() {
    report(8, "cost model reproduces the sub-3-microcent figure and flags the rate gap", || {
        let c = estimate_cost(0.104, PAPER_PRICE_PER_HOUR_USD, PAPER_INSTANCE_CORES).unwrap();
        assert!(c.paper_rate_microcents < 3.0, "{}", c.paper_rate_microcents);
        assert!((c.paper_rate_microcents - 1.768).abs() < 0.01);
        // The raw division gives ~1736 microcents per core-second.
        assert!((c.formula_rate_microcents_per_core_s - 1736.11).abs() < 0.01);
        assert!(c.rate_discrepancy);
    });
}

/// Report rendering determinism rides along with the acceptance run.
#[test]
fn report_reemission_is_byte_identical() {
    let ctx = ctx_for(Scheme::Bgv, Preset::Desk);
    let ops = vec![time_operation(BenchOp::Encrypt, &ctx, 2, 1).unwrap()];
    let report = smob::bench::BenchReport {
        environment: smob::bench::Environment::detect(),
        params: serde_json::json!({"preset": "desk"}),
        flags: qualitative_flags(&ops),
        operations: ops,
        transactions: vec![],
        sizes: Default::default(),
        memory_approx: smob::bench::MemoryApprox {
            serialized_total_bytes: 0,
            allocator_peak_bytes: None,
            paper_ref_mb: smob::bench::paper_memory_refs(),
        },
        cost: estimate_cost(1.0, 8.0, 128).unwrap(),
        audit: smob::bench::AuditSummary { messages: 0, violations: 0, warnings: 0 },
    };
    let a = render_report(&report, ReportFormat::Json).unwrap();
    let b = render_report(&report, ReportFormat::Json).unwrap();
    assert_eq!(a, b);
    // The operation-grid plot table has one row per (operation, scheme).
    let plot = render_report(&report, ReportFormat::Plotdata).unwrap();
    assert_eq!(plot[0].1.lines().count() - 1, report.operations.len());
}
