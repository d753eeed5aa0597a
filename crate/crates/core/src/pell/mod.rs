//! Generalized Pell equations `K x^2 - M y^2 = tau`.
//!
//! Three kinds of evidence are produced: congruence certificates proving
//! there is no integer solution, explicit witnesses from a bounded search,
//! and fundamental units of `x^2 - D y^2 = 1` for generating solution
//! families. When neither a certificate nor a witness is found the verdict
//! is [`PellVerdict::Unknown`]; congruences are not a complete test.

mod obstruction;
mod search;
mod units;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use obstruction::{
    auto_obstruct, default_moduli, prime_power_obstruction, qnr_obstruction, residue_obstruction,
    ObstructionCertificate, LEMMA_PRIME_LIMIT,
};
pub use search::{bounded_search, DEFAULT_SEARCH_BOUND};
pub use units::{fundamental_solution, FundamentalUnit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PellError {
    #[error("coefficients must satisfy K >= 1, M >= 1 and tau != 0")]
    InvalidCoefficients,
    #[error("{0} is a perfect square")]
    PerfectSquare(u64),
    #[error("{0} is below 2")]
    TooSmall(u64),
}

/// `K x^2 - M y^2 = tau` with `K, M >= 1` and `tau != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PellEquation {
    #[serde(rename = "K")]
    k: i64,
    #[serde(rename = "M")]
    m: i64,
    tau: i64,
}

impl PellEquation {
    pub fn new(k: i64, m: i64, tau: i64) -> Result<Self, PellError> {
        if k < 1 || m < 1 || tau == 0 {
            return Err(PellError::InvalidCoefficients);
        }
        Ok(PellEquation { k, m, tau })
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn tau(&self) -> i64 {
        self.tau
    }

    /// `K x^2 - M y^2 - tau` in 128-bit arithmetic, `None` on overflow.
    pub fn residual(&self, x: i128, y: i128) -> Option<i128> {
        let kx = (self.k as i128).checked_mul(x.checked_mul(x)?)?;
        let my = (self.m as i128).checked_mul(y.checked_mul(y)?)?;
        kx.checked_sub(my)?.checked_sub(self.tau as i128)
    }

    pub fn is_solution(&self, x: u64, y: u64) -> bool {
        self.residual(x as i128, y as i128) == Some(0)
    }
}

impl fmt::Display for PellEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x^2 - {}y^2 = {}", self.k, self.m, self.tau)
    }
}

/// A prime number; constructing one checks primality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Option<Prime> {
        is_prime(p).then_some(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// All primes up to and including `limit`.
    pub fn up_to(limit: u64) -> impl Iterator<Item = Prime> {
        (2..=limit).filter_map(Prime::new)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Classification outcome for one equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PellVerdict {
    Obstructed { certificate: ObstructionCertificate },
    Solvable { witnesses: Vec<(u64, u64)> },
    Unknown { bound: u64 },
}

impl PellVerdict {
    pub fn is_solvable(&self) -> bool {
        matches!(self, PellVerdict::Solvable { .. })
    }

    pub fn is_obstructed(&self) -> bool {
        matches!(self, PellVerdict::Obstructed { .. })
    }

    pub fn witnesses(&self) -> &[(u64, u64)] {
        match self {
            PellVerdict::Solvable { witnesses } => witnesses,
            _ => &[],
        }
    }

    pub fn certificate(&self) -> Option<&ObstructionCertificate> {
        match self {
            PellVerdict::Obstructed { certificate } => Some(certificate),
            _ => None,
        }
    }
}

/// Tries every congruence certificate over `moduli`, then falls back to a
/// witness search up to `bound`.
pub fn classify_equation(eq: &PellEquation, moduli: &[u64], bound: u64) -> PellVerdict {
    if let Some(certificate) = auto_obstruct(eq, moduli) {
        return PellVerdict::Obstructed { certificate };
    }
    let witnesses = bounded_search(eq, bound);
    if witnesses.is_empty() {
        PellVerdict::Unknown { bound }
    } else {
        PellVerdict::Solvable { witnesses }
    }
}
