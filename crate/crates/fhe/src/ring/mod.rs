//! Exact modular arithmetic in R_q = Z_q[x]/(x^n+1): RNS ring elements,
//! negacyclic NTT, CRT composition, digit decomposition, and sampling.

pub mod crt;
pub mod element;
pub mod modulus;
pub mod ntt;
pub mod sampler;

pub use crt::{base_decompose, digit_count, CrtContext};
pub use element::{ring_mul, Domain, ModulusChain, RingElement};
pub use modulus::{generate_primes, is_prime, Modulus};
pub use ntt::NttTable;
pub use sampler::{Sampler, DEFAULT_ERROR_STDDEV};
