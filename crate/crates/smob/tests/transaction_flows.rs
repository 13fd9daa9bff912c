//! Transaction orchestration: oracle agreement, identical operation
//! multisets across flows, clean audits, and fault-injected audits that
//! catch exactly the planted violation.

use std::sync::Arc;

use fhe::{Context, EncryptionParameters, Preset, Scheme};
use smob::privacy::{audit_trace, AllowMatrix, DataCategory, PartyRole, TraceEntry};
use smob::transactions::{
    oracle_total, run_transaction, verify_outcome, OpKind, TransactionKind, TransactionOutcome,
    Verdict, WorkloadSpec,
};
use smob::transport::TransportKind;

fn desk_ctx(scheme: Scheme) -> Arc<Context> {
    Context::new(EncryptionParameters::preset(scheme, Preset::Desk)).unwrap()
}

fn run(kind: TransactionKind, scheme: Scheme, w: &WorkloadSpec, seed: u64) -> TransactionOutcome {
    let ctx = desk_ctx(scheme);
    let o = run_transaction(kind, &ctx, w, seed, TransportKind::Inproc).unwrap();
    assert_eq!(verify_outcome(&o, w, &ctx).unwrap(), Verdict::Ok, "{kind:?} {scheme:?}");
    o
}

#[test]
fn totals_agree_across_flows_and_match_oracle() {
    let w = WorkloadSpec::new(vec![100.0, 250.0, 30.0], 2.0, 75.0);
    for scheme in [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks] {
        let ctx = desk_ctx(scheme);
        let t = ctx.plain_modulus().map(|m| m.value());
        let expect = oracle_total(&w, scheme, t).unwrap().as_f64();
        let mut totals = Vec::new();
        for kind in TransactionKind::ALL {
            totals.push(run(kind, scheme, &w, 11).total.as_f64());
        }
        for &v in &totals {
            let tol = if scheme == Scheme::Ckks { 2e-3 } else { 0.0 };
            assert!((v - expect).abs() <= tol, "{scheme:?}: {v} vs {expect}");
        }
    }
}

#[test]
fn op_multiset_is_identical_across_flows() {
    let w = WorkloadSpec::new(vec![10.0, 20.0, 30.0, 40.0], 3.0, 5.0);
    for scheme in [Scheme::Bgv, Scheme::Ckks] {
        let counts: Vec<_> = TransactionKind::ALL
            .iter()
            .map(|&k| run(k, scheme, &w, 5).op_counts())
            .collect();
        assert_eq!(counts[0], counts[1], "{scheme:?}");
        assert_eq!(counts[1], counts[2], "{scheme:?}");
        let p = w.providers();
        let get = |op: OpKind| {
            counts[0]
                .iter()
                .find(|(o, _)| *o == op)
                .map(|(_, c)| *c)
                .unwrap_or(0)
        };
        assert_eq!(get(OpKind::Encrypt), p + 2);
        assert_eq!(get(OpKind::Add), p - 1);
        assert_eq!(get(OpKind::Multiply), 1);
        assert_eq!(get(OpKind::Relinearize), 1);
        assert_eq!(get(OpKind::Subtract), 1);
        assert_eq!(get(OpKind::Decrypt), 1);
    }
}

#[test]
fn single_provider_edge_case() {
    let w = WorkloadSpec::new(vec![500.0], 1.0, 0.0);
    for scheme in [Scheme::Bfv, Scheme::Ckks] {
        for kind in TransactionKind::ALL {
            let o = run(kind, scheme, &w, 21);
            assert!((o.total.as_f64() - 500.0).abs() < 1e-2);
        }
    }
}

#[test]
fn integer_workloads_reject_fractions_and_out_of_range() {
    assert!(oracle_total(&WorkloadSpec::new(vec![10.5], 2.0, 0.0), Scheme::Bfv, Some(65537)).is_err());
    assert!(oracle_total(&WorkloadSpec::new(vec![10.0], 2.0, 70000.0), Scheme::Bgv, Some(65537)).is_err());
    assert!(oracle_total(&WorkloadSpec::new(vec![], 2.0, 0.0), Scheme::Bfv, Some(65537)).is_err());
    // The same values are fine for the approximate scheme.
    assert!(oracle_total(&WorkloadSpec::new(vec![10.5], 2.0, 0.0), Scheme::Ckks, None).is_ok());
}

#[test]
fn wrap_around_is_modular_for_integer_schemes() {
    // sum*d - b goes negative: 10*1 - 50 = -40 ≡ t - 40.
    let w = WorkloadSpec::new(vec![10.0], 1.0, 50.0);
    let o = run(TransactionKind::T1, Scheme::Bfv, &w, 31);
    assert_eq!(o.total.as_f64() as u64, 65537 - 40);
}

#[test]
fn clean_runs_have_no_audit_violations() {
    let w = WorkloadSpec::new(vec![100.0, 100.0], 2.0, 50.0);
    for scheme in [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks] {
        for kind in TransactionKind::ALL {
            let o = run(kind, scheme, &w, 41);
            assert_eq!(o.audit.violations, 0);
            assert!(o.audit.message_count() > 0);
            assert!(o.trace.iter().all(|e| e.category != DataCategory::Secret));
        }
    }
}

/// Mutating a clean trace must produce exactly the planted violation.
#[test]
fn fault_injection_is_caught_by_the_audit() {
    let w = WorkloadSpec::new(vec![100.0, 100.0], 2.0, 50.0);
    let clean = run(TransactionKind::T1, Scheme::Bfv, &w, 51);
    let matrix = AllowMatrix::default();
    let base = audit_trace(&clean.trace, &matrix);
    assert_eq!(base.violations, 0);

    // Plaintext sensitive data delivered to the platform.
    let mut t1 = clean.trace.clone();
    t1.push(TraceEntry {
        category: DataCategory::Sensitive,
        provenance: None,
        receiver: PartyRole::MobilityPlatform,
        ..clean.trace[0].clone()
    });
    let r = audit_trace(&t1, &matrix);
    assert_eq!(r.violations, 1);
    assert!(r.records.last().unwrap().reason.as_deref().unwrap().contains("sensitive"));

    // Secret key material on the wire.
    let mut t2 = clean.trace.clone();
    t2.push(TraceEntry {
        category: DataCategory::Secret,
        provenance: None,
        receiver: PartyRole::MobilityProvider,
        ..clean.trace[0].clone()
    });
    assert_eq!(audit_trace(&t2, &matrix).violations, 1);

    // Customer public key reaching the platform.
    let mut t3 = clean.trace.clone();
    let mut entry = clean
        .trace
        .iter()
        .find(|e| e.customer_key_material)
        .expect("customer key in T1 trace")
        .clone();
    entry.receiver = PartyRole::MobilityPlatform;
    t3.push(entry);
    let r = audit_trace(&t3, &matrix);
    assert_eq!(r.violations, 1);
    assert!(r
        .records
        .last()
        .unwrap()
        .reason
        .as_deref()
        .unwrap()
        .contains("public key"));
}

#[test]
fn strict_content_mode_flags_encrypted_sensitive_payloads() {
    let w = WorkloadSpec::new(vec![100.0, 100.0], 2.0, 50.0);
    let clean = run(TransactionKind::T1, Scheme::Bgv, &w, 61);
    let strict = AllowMatrix { strict_content: true };
    let r = audit_trace(&clean.trace, &strict);
    // Ciphertexts carrying sensitive content reach the platform, which the
    // readability audit allows but the content audit does not.
    assert!(r.violations > 0);
}
