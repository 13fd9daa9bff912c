//! Bit-exact serialization, wire framing, and the two transports.

pub mod net;
pub mod serial;
pub mod wire;

pub use net::{payload_kind, Endpoint, Network, PartyId, TransportKind};
pub use serial::{
    block_len, deserialize_ciphertext, deserialize_public_key, deserialize_relin_key,
    deserialize_secret_key, serialize_ciphertext, serialize_public_key, serialize_relin_key,
    serialize_secret_key,
};
pub use wire::{decode_frame, encode_frame, MsgType, TaggedMessage, HEADER_LEN, MAX_PAYLOAD};
