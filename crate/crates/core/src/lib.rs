//! Exact arithmetic for close factorizations `n = AB = (A + a_i)(B - b_i)`:
//! verification, skew invariants, the Pell equations that govern four-way
//! close factorizations, the bounded case census, and a brute-force oracle.

pub(crate) mod decimal;

pub mod cases;
pub mod factorization;
pub mod oracle;
pub mod pell;
pub mod surd;
pub mod tables;

pub use factorization::{CloseFactorization, FactorizationError, Offset};
pub use surd::QuadraticSurd;
