//! Wire framing: 28-byte header + payload, little-endian.

use fhe::Scheme;

use crate::error::{Result, SmobError};
use crate::privacy::DataCategory;

pub const MAGIC: [u8; 4] = *b"FHSM";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 28;
pub const MAX_PAYLOAD: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MsgType {
    KeyOffer,
    EvalKey,
    CtPrice,
    CtPartial,
    CtResult,
    PlainResult,
    Control,
}

impl MsgType {
    pub fn to_byte(self) -> u8 {
        match self {
            MsgType::KeyOffer => 0,
            MsgType::EvalKey => 1,
            MsgType::CtPrice => 2,
            MsgType::CtPartial => 3,
            MsgType::CtResult => 4,
            MsgType::PlainResult => 5,
            MsgType::Control => 6,
        }
    }

    pub fn from_byte(b: u8) -> Option<MsgType> {
        use MsgType::*;
        [KeyOffer, EvalKey, CtPrice, CtPartial, CtResult, PlainResult, Control]
            .get(b as usize)
            .copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            MsgType::KeyOffer => "key_offer",
            MsgType::EvalKey => "eval_key",
            MsgType::CtPrice => "ct_price",
            MsgType::CtPartial => "ct_partial",
            MsgType::CtResult => "ct_result",
            MsgType::PlainResult => "plain_result",
            MsgType::Control => "control",
        }
    }
}

fn scheme_byte(s: Scheme) -> u8 {
    match s {
        Scheme::Bfv => 0,
        Scheme::Bgv => 1,
        Scheme::Ckks => 2,
    }
}

fn scheme_from_byte(b: u8) -> Option<Scheme> {
    [Scheme::Bfv, Scheme::Bgv, Scheme::Ckks].get(b as usize).copied()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedMessage {
    pub txid: [u8; 16],
    pub msg_type: MsgType,
    pub scheme: Scheme,
    pub category: DataCategory,
    pub payload: Vec<u8>,
}

pub fn encode_frame(msg: &TaggedMessage) -> Result<Vec<u8>> {
    if msg.payload.len() > MAX_PAYLOAD {
        return Err(SmobError::Frame(format!(
            "payload of {} bytes exceeds the {} MiB cap",
            msg.payload.len(),
            MAX_PAYLOAD >> 20
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + msg.payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg.msg_type.to_byte());
    out.push(scheme_byte(msg.scheme));
    out.push(msg.category as u8);
    out.extend_from_slice(&msg.txid);
    out.extend_from_slice(&(msg.payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&msg.payload);
    Ok(out)
}

/// Parse the fixed header; returns the message with payload attached.
pub fn decode_frame(frame: &[u8]) -> Result<TaggedMessage> {
    if frame.len() < HEADER_LEN {
        return Err(SmobError::Frame(format!("frame of {} bytes too short", frame.len())));
    }
    if frame[0..4] != MAGIC {
        return Err(SmobError::Frame("bad magic".into()));
    }
    if frame[4] != VERSION {
        return Err(SmobError::Frame(format!("unknown version {}", frame[4])));
    }
    let msg_type = MsgType::from_byte(frame[5])
        .ok_or_else(|| SmobError::Frame(format!("unknown msg type {}", frame[5])))?;
    let scheme = scheme_from_byte(frame[6])
        .ok_or_else(|| SmobError::Frame(format!("unknown scheme byte {}", frame[6])))?;
    let category = DataCategory::from_byte(frame[7])
        .ok_or_else(|| SmobError::Frame(format!("unknown category byte {}", frame[7])))?;
    let mut txid = [0u8; 16];
    txid.copy_from_slice(&frame[8..24]);
    let payload_len = u32::from_le_bytes(frame[24..28].try_into().unwrap()) as usize;
    if payload_len > MAX_PAYLOAD {
        return Err(SmobError::Frame(format!("payload length {payload_len} exceeds cap")));
    }
    if frame.len() != HEADER_LEN + payload_len {
        return Err(SmobError::Frame(format!(
            "frame length {} does not match header payload length {payload_len}",
            frame.len()
        )));
    }
    Ok(TaggedMessage {
        txid,
        msg_type,
        scheme,
        category,
        payload: frame[HEADER_LEN..].to_vec(),
    })
}
