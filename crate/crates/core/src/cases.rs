//! The finite case census for four close factorizations with small skews.
//!
//! Every parameter tuple `(D21, D31, D32, d_a, d_b, k, m)` allowed by the
//! skew inequalities and the integrality of `km` yields one Pell-type
//! equation `d_b k x^2 - d_a m y^2 = D31 (D31 - D21)` in `x = beta_1`,
//! `y = alpha_1`. Solvable rows carry a limiting ratio `A / a_3^3`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::pell::{classify_equation, default_moduli, PellEquation, PellVerdict};
use crate::surd::QuadraticSurd;

/// Largest skew value considered; larger skews force the ratio below
/// [`large_skew_threshold`].
pub const MAX_SKEW: u64 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("all parameters must be positive")]
    NotPositive,
    #[error("skews violate D21 < D31 < D21 + D32")]
    SkewOrder,
    #[error("skews above {MAX_SKEW} are outside the census")]
    SkewTooLarge,
    #[error("D31 = D32 is handled by the equal-skew bound, not the census")]
    EqualSkews,
    #[error("(D31, D32) = (5, 4) is handled by its own bound, not the census")]
    ExcludedPair,
    #[error("d_a * d_b must divide D21")]
    GcdNotDividing,
    #[error("k * m * D21 must equal d_a d_b D32 D31 (D32 + D21 - D31)")]
    ProductMismatch,
    #[error("k * d_a must exceed m * d_b")]
    NotDominant,
}

/// One admissible parameter tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CaseParams {
    #[serde(rename = "D21")]
    pub d21: u64,
    #[serde(rename = "D31")]
    pub d31: u64,
    #[serde(rename = "D32")]
    pub d32: u64,
    pub d_a: u64,
    pub d_b: u64,
    pub k: u64,
    pub m: u64,
}

fn valid_skews(d21: u64, d31: u64, d32: u64) -> Result<(), CaseError> {
    if d21 == 0 || d31 == 0 || d32 == 0 {
        return Err(CaseError::NotPositive);
    }
    if d21.max(d31).max(d32) > MAX_SKEW {
        return Err(CaseError::SkewTooLarge);
    }
    if d31 <= d21 || d32 + d21 <= d31 {
        return Err(CaseError::SkewOrder);
    }
    if d31 == d32 {
        return Err(CaseError::EqualSkews);
    }
    if (d31, d32) == (5, 4) {
        return Err(CaseError::ExcludedPair);
    }
    Ok(())
}

/// `d_a d_b D32 D31 (D32 + D21 - D31) / D21` when integral.
fn km_product(d21: u64, d31: u64, d32: u64, d_a: u64, d_b: u64) -> Option<u64> {
    let num = d_a * d_b * d32 * d31 * (d32 + d21 - d31);
    (num % d21 == 0).then_some(num / d21)
}

impl CaseParams {
    pub fn new(d21: u64, d31: u64, d32: u64, d_a: u64, d_b: u64, k: u64, m: u64) -> Result<Self, CaseError> {
        valid_skews(d21, d31, d32)?;
        if d_a == 0 || d_b == 0 || k == 0 || m == 0 {
            return Err(CaseError::NotPositive);
        }
        if d21 % (d_a * d_b) != 0 {
            return Err(CaseError::GcdNotDividing);
        }
        if km_product(d21, d31, d32, d_a, d_b) != Some(k * m) {
            return Err(CaseError::ProductMismatch);
        }
        if k * d_a <= m * d_b {
            return Err(CaseError::NotDominant);
        }
        Ok(CaseParams { d21, d31, d32, d_a, d_b, k, m })
    }

    pub fn skews(&self) -> (u64, u64, u64) {
        (self.d21, self.d31, self.d32)
    }

    pub fn as_tuple(&self) -> [u64; 7] {
        [self.d21, self.d31, self.d32, self.d_a, self.d_b, self.k, self.m]
    }
}

impl fmt::Display for CaseParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{},{},{})",
            self.d21, self.d31, self.d32, self.d_a, self.d_b, self.k, self.m
        )
    }
}

/// Every admissible `(D21, D31, D32)`, lexicographically.
pub fn skew_groups() -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for d21 in 1..=MAX_SKEW {
        for d31 in d21 + 1..=MAX_SKEW {
            for d32 in 1..=MAX_SKEW {
                if valid_skews(d21, d31, d32).is_ok() {
                    out.push((d21, d31, d32));
                }
            }
        }
    }
    out
}

/// Rows of one skew group ordered by `(d_a, d_b)` then descending `k`.
/// Empty when the skews themselves are not admissible.
pub fn enumerate_group(d21: u64, d31: u64, d32: u64) -> Vec<CaseParams> {
    if valid_skews(d21, d31, d32).is_err() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for d_a in 1..=d21 {
        for d_b in 1..=d21 {
            if d21 % (d_a * d_b) != 0 {
                continue;
            }
            let Some(km) = km_product(d21, d31, d32, d_a, d_b) else {
                continue;
            };
            for k in (1..=km).rev().filter(|k| km % k == 0) {
                if let Ok(p) = CaseParams::new(d21, d31, d32, d_a, d_b, k, km / k) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// The full census in canonical order.
pub fn enumerate_cases() -> Vec<CaseParams> {
    skew_groups()
        .into_iter()
        .flat_map(|(a, b, c)| enumerate_group(a, b, c))
        .collect()
}

/// `d_b k x^2 - d_a m y^2 = D31 (D31 - D21)`.
pub fn build_pell(p: &CaseParams) -> PellEquation {
    PellEquation::new(
        (p.d_b * p.k) as i64,
        (p.d_a * p.m) as i64,
        (p.d31 * (p.d31 - p.d21)) as i64,
    )
    .expect("admissible parameters give positive coefficients")
}

fn int(n: u64) -> QuadraticSurd {
    QuadraticSurd::from_rational(BigRational::from_integer(BigInt::from(n)))
}

/// Limit of `A / a_3^3` along the solutions of the row's Pell equation,
/// exact in `Q(sqrt(km / (d_a d_b)))`.
pub fn ratio_limit(p: &CaseParams) -> QuadraticSurd {
    let s = QuadraticSurd::sqrt(&BigRational::new(
        BigInt::from(p.k * p.m),
        BigInt::from(p.d_a * p.d_b),
    ));
    let (d21, d31, d32) = (int(p.d21), int(p.d31), int(p.d32));
    let first = &d21 * &s + &d32 * &d31;
    // D32 - D31 + D21 > 0 by admissibility
    let second = (&d31 / &s) * int(p.d32 + p.d21 - p.d31) + &d21;
    let numerator = int(p.m * (p.d31 - p.d21)) * first * second;
    let denominator = int(p.d21 * p.d31 * p.d31 * p.d_a) * (&s + &d32).pow(3);
    numerator / denominator
}

/// `(6 + sqrt 6) / (9 (2 + sqrt 6)^2)`, the largest limiting ratio.
pub fn supremum_closed_form() -> QuadraticSurd {
    let r6 = QuadraticSurd::sqrt(&BigRational::from_integer(BigInt::from(6)));
    let num = int(6) + &r6;
    let den = int(9) * (int(2) + &r6).pow(2);
    num / den
}

/// `21/500`: the ratio ceiling when some skew exceeds [`MAX_SKEW`].
pub fn large_skew_threshold() -> BigRational {
    BigRational::new(21.into(), 500.into())
}

/// `1/25`: the ratio ceiling for `(D31, D32) = (5, 4)`.
pub fn excluded_pair_threshold() -> BigRational {
    BigRational::new(1.into(), 25.into())
}

/// One classified row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseRow {
    pub params: CaseParams,
    pub equation: PellEquation,
    pub verdict: PellVerdict,
    /// Present exactly when the verdict is solvable.
    pub ratio_limit: Option<QuadraticSurd>,
}

pub fn classify_with(params: &CaseParams, moduli: &[u64], bound: u64) -> CaseRow {
    let equation = build_pell(params);
    let verdict = classify_equation(&equation, moduli, bound);
    let ratio_limit = verdict.is_solvable().then(|| ratio_limit(params));
    CaseRow { params: *params, equation, verdict, ratio_limit }
}

pub fn classify(params: &CaseParams, bound: u64) -> CaseRow {
    classify_with(params, &default_moduli(), bound)
}

/// Classifies the whole census; rows are independent, so this runs them
/// on scoped threads and reassembles in canonical order.
pub fn classify_all(bound: u64) -> Vec<CaseRow> {
    let cases = enumerate_cases();
    let moduli = default_moduli();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let chunk = cases.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .chunks(chunk)
            .map(|part| {
                let moduli = &moduli;
                scope.spawn(move || {
                    part.iter()
                        .map(|p| classify_with(p, moduli, bound))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("classification worker panicked"))
            .collect()
    })
}

/// The solvable row with the largest limiting ratio. Ties keep the first
/// row in canonical order, so the answer does not depend on input order
/// beyond that.
pub fn supremum_ratio(rows: &[CaseRow]) -> Option<(CaseParams, QuadraticSurd)> {
    let mut best: Option<(CaseParams, QuadraticSurd)> = None;
    for row in rows {
        let Some(r) = &row.ratio_limit else { continue };
        let better = match &best {
            None => true,
            Some((bp, bv)) => r > bv || (r == bv && row.params < *bp),
        };
        if better {
            best = Some((row.params, r.clone()));
        }
    }
    best
}
