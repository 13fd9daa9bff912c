//! The three schemes: parameters, contexts, keys, encodings and operations.

pub mod ciphertext;
pub mod context;
pub mod encoding;
pub mod eval;
pub mod keys;
pub mod params;
pub mod plaintext;

pub use ciphertext::Ciphertext;
pub use context::Context;
pub use keys::{keygen, public_keygen, relin_keygen, secret_keygen, PublicKey, RelinKey, SecretKey};
pub use params::{
    EncryptionParameters, Preset, Scheme, CKKS_SCALE_BITS, DEFAULT_PLAIN_MODULUS,
    DEFAULT_RELIN_BASE_BITS,
};
pub use plaintext::{PlainData, Plaintext};
