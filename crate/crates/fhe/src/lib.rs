//! Desk-scale homomorphic encryption: BFV, BGV and CKKS over RLWE with
//! negacyclic NTT polynomial arithmetic, relinearization by base-2^w digit
//! decomposition, CKKS rescaling, BGV modulus switching, and noise-budget
//! diagnostics.

pub mod error;
pub mod ring;
pub mod scheme;

pub use error::{FheError, Result};
pub use scheme::{
    Ciphertext, Context, EncryptionParameters, Plaintext, Preset, PublicKey, RelinKey, Scheme,
    SecretKey,
};
