//! Multiparty smart-mobility transaction simulator over homomorphic
//! encryption: three transaction shapes (centralized, provider-chained,
//! customer-side), a disclosure-matrix privacy auditor, bit-exact transport,
//! and a benchmark harness with JSON reporting.

pub mod bench;
pub mod error;
pub mod privacy;
pub mod transactions;
pub mod transport;

pub use error::{Result, SmobError};
