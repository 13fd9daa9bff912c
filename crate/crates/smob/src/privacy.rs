//! Data categories, the role/category allow-matrix, and the trace auditor.
//!
//! The audit checks what a party can *read*: ciphertexts classify as
//! Insensitive with a provenance note recording the category of what they
//! encrypt. A strict mode audits provenance categories instead, for
//! content-level analysis.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataCategory {
    Insensitive,
    Identifier,
    Pseudonym,
    Sensitive,
    Secret,
}

impl DataCategory {
    pub const ALL: [DataCategory; 5] = [
        DataCategory::Insensitive,
        DataCategory::Identifier,
        DataCategory::Pseudonym,
        DataCategory::Sensitive,
        DataCategory::Secret,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DataCategory::Insensitive => "insensitive",
            DataCategory::Identifier => "identifier",
            DataCategory::Pseudonym => "pseudonym",
            DataCategory::Sensitive => "sensitive",
            DataCategory::Secret => "secret",
        }
    }

    pub fn from_byte(b: u8) -> Option<DataCategory> {
        DataCategory::ALL.get(b as usize).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartyRole {
    Customer,
    MobilityPlatform,
    MobilityProvider,
    BillingProvider,
}

impl PartyRole {
    pub const ALL: [PartyRole; 4] = [
        PartyRole::Customer,
        PartyRole::MobilityPlatform,
        PartyRole::MobilityProvider,
        PartyRole::BillingProvider,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartyRole::Customer => "customer",
            PartyRole::MobilityPlatform => "mobility_platform",
            PartyRole::MobilityProvider => "mobility_provider",
            PartyRole::BillingProvider => "billing_provider",
        }
    }

    pub fn from_byte(b: u8) -> Option<PartyRole> {
        PartyRole::ALL.get(b as usize).copied()
    }
}

/// The R1-R3 disclosure matrix, plus the customer row: service roles see
/// only what their requirement grants; the customer, as the data subject,
/// may receive anything except another party's secret key.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllowMatrix {
    /// Audit ciphertexts under the category of their *content* rather than
    /// what the receiver can read.
    pub strict_content: bool,
}

impl AllowMatrix {
    pub fn allowed(&self, role: PartyRole, cat: DataCategory) -> bool {
        use DataCategory::*;
        use PartyRole::*;
        match (role, cat) {
            (_, Secret) => false,
            (Customer, _) => true,
            (MobilityPlatform, Insensitive | Pseudonym) => true,
            (MobilityPlatform, Identifier | Sensitive) => false,
            (MobilityProvider, Insensitive | Pseudonym | Sensitive) => true,
            (MobilityProvider, Identifier) => false,
            (BillingProvider, _) => true,
        }
    }
}

/// What a message carries, as far as the auditor is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    /// One-time public key of a customer: itself a pseudonym.
    CustomerPublicKey,
    /// Platform public key: no personal linkage.
    PlatformPublicKey,
    /// Relinearization key derived from customer one-time key material.
    CustomerEvalKey,
    PlatformEvalKey,
    /// Encrypted value; `content` is the category of the plaintext inside.
    Ciphertext { content: DataCategory },
    /// Decrypted aggregate of an FHE computation.
    DecryptedAggregate,
    TransactionId,
    SecretKey,
    Control,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub category: DataCategory,
    /// For ciphertexts: the category of the encrypted content.
    pub provenance: Option<DataCategory>,
}

/// Category a receiving party is exposed to. Unknown kinds fail closed.
pub fn classify_payload(kind: PayloadKind) -> Classification {
    use DataCategory::*;
    let (category, provenance) = match kind {
        PayloadKind::CustomerPublicKey => (Pseudonym, None),
        PayloadKind::PlatformPublicKey => (Insensitive, None),
        PayloadKind::CustomerEvalKey => (Pseudonym, None),
        PayloadKind::PlatformEvalKey => (Insensitive, None),
        PayloadKind::Ciphertext { content } => (Insensitive, Some(content)),
        PayloadKind::DecryptedAggregate => (Insensitive, None),
        PayloadKind::TransactionId => (Pseudonym, None),
        PayloadKind::SecretKey => (Secret, None),
        PayloadKind::Control => (Insensitive, None),
        PayloadKind::Unknown => (Secret, None),
    };
    Classification { category, provenance }
}

/// One delivered message, as seen by the auditor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub txid: [u8; 16],
    pub sender: PartyRole,
    pub sender_index: u8,
    pub receiver: PartyRole,
    pub receiver_index: u8,
    pub msg_type: u8,
    pub category: DataCategory,
    pub provenance: Option<DataCategory>,
    /// Marks key-offer payloads carrying a customer's one-time public key.
    pub customer_key_material: bool,
    pub payload_len: usize,
    /// SHA-256 of the payload, hex.
    pub digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    Violation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditRecord {
    pub txid: [u8; 16],
    pub sender: PartyRole,
    pub receiver: PartyRole,
    pub category: DataCategory,
    pub verdict: Verdict,
    pub digest: String,
    /// Human-readable reason for a violation.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AuditReport {
    pub records: Vec<AuditRecord>,
    pub violations: usize,
    pub warnings: Vec<String>,
}

impl AuditReport {
    pub fn message_count(&self) -> usize {
        self.records.len()
    }
}

/// Audit a complete trace: one record per delivered message, allow-matrix
/// verdicts, key-hygiene checks, and pseudonym-reuse warnings. Never aborts.
pub fn audit_trace(trace: &[TraceEntry], matrix: &AllowMatrix) -> AuditReport {
    let mut report = AuditReport::default();
    // digest of each customer key payload -> transaction ids seen with it
    let mut key_sightings: HashMap<String, Vec<[u8; 16]>> = HashMap::new();

    for entry in trace {
        let effective = match (matrix.strict_content, entry.provenance) {
            (true, Some(content)) => content,
            _ => entry.category,
        };
        let mut reason = None;
        let mut verdict = if matrix.allowed(entry.receiver, effective) {
            Verdict::Ok
        } else {
            reason = Some(format!(
                "{} may not receive {} data",
                entry.receiver.name(),
                effective.name()
            ));
            Verdict::Violation
        };

        // Customer one-time key material must never reach the platform: the
        // platform could otherwise link the pseudonym across providers.
        if verdict == Verdict::Ok
            && entry.customer_key_material
            && entry.receiver == PartyRole::MobilityPlatform
        {
            reason = Some("customer one-time public key delivered to the platform".into());
            verdict = Verdict::Violation;
        }

        if entry.customer_key_material {
            key_sightings
                .entry(entry.digest.clone())
                .or_default()
                .push(entry.txid);
        }

        if verdict == Verdict::Violation {
            report.violations += 1;
        }
        report.records.push(AuditRecord {
            txid: entry.txid,
            sender: entry.sender,
            receiver: entry.receiver,
            category: effective,
            verdict,
            digest: entry.digest.clone(),
            reason,
        });
    }

    for (digest, txids) in &key_sightings {
        let mut ids: Vec<&[u8; 16]> = txids.iter().collect();
        ids.dedup();
        if ids.len() > 1 {
            report.warnings.push(format!(
                "one-time key {} reused across {} transactions",
                &digest[..16.min(digest.len())],
                ids.len()
            ));
        }
    }
    report
}
