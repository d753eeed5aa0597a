//! Ground truth independent of the Pell reduction: exhaustive search for
//! close factorizations in a box, and the two explicit families.

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::factorization::{verify_quadruple, CloseFactorization, FactorizationError, Offset};
use crate::pell::{fundamental_solution, FundamentalUnit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search box needs A_max >= 2, C_max >= 1 and k >= 2")]
    InvalidBox,
    #[error("search box too large for 64-bit arithmetic")]
    BoxTooLarge,
    #[error("family index must be at least {0}")]
    IndexTooSmall(u64),
    #[error("no factorizations given")]
    Empty,
    #[error("expected exactly three offsets, found {0}")]
    WrongArity(usize),
    #[error(transparent)]
    Invalid(#[from] FactorizationError),
}

/// Every base pair `B <= A <= a_max` with offsets `a, b <= c_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBox {
    a_max: u64,
    c_max: u64,
    k_min: usize,
}

impl SearchBox {
    pub fn new(a_max: u64, c_max: u64, k_min: usize) -> Result<Self, OracleError> {
        if a_max < 2 || c_max < 1 || k_min < 2 {
            return Err(OracleError::InvalidBox);
        }
        // every product formed in the search is below (A + C)^3
        let side = a_max.checked_add(c_max).ok_or(OracleError::BoxTooLarge)?;
        side.checked_pow(3).ok_or(OracleError::BoxTooLarge)?;
        Ok(SearchBox { a_max, c_max, k_min })
    }

    pub fn a_max(&self) -> u64 {
        self.a_max
    }

    pub fn c_max(&self) -> u64 {
        self.c_max
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }
}

/// Offsets `(a, b)` of the base pair `(A, B)`: `b = aB / (A + a)` must be
/// a positive integer. `b` grows strictly with `a`, so the list is sorted.
fn offsets_of(big_a: u64, big_b: u64, c_max: u64) -> Vec<(u64, u64)> {
    (1..=c_max)
        .filter_map(|a| {
            let num = a.checked_mul(big_b)?;
            let den = big_a.checked_add(a)?;
            (num % den == 0).then(|| (a, num / den))
        })
        .filter(|&(_, b)| b >= 1 && b <= c_max)
        .collect()
}

fn search_slice(sbox: SearchBox, worker: u64, jobs: u64) -> Vec<(u64, u64, Vec<(u64, u64)>)> {
    let mut out = Vec::new();
    let mut big_a = 2 + worker;
    while big_a <= sbox.a_max {
        for big_b in 1..=big_a {
            let offs = offsets_of(big_a, big_b, sbox.c_max);
            if !offs.is_empty() && offs.len() + 1 >= sbox.k_min {
                out.push((big_a, big_b, offs));
            }
        }
        big_a += jobs;
    }
    out
}

/// All base pairs in the box with at least `k_min - 1` offsets, each
/// reported once with every offset it has, sorted by `(n, A)`. The A-range
/// is interleaved across `jobs` threads.
pub fn brute_force(sbox: SearchBox, jobs: usize) -> Vec<CloseFactorization> {
    let jobs = jobs.max(1) as u64;
    let mut raw: Vec<(u64, u64, Vec<(u64, u64)>)> = if jobs == 1 {
        search_slice(sbox, 0, 1)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|w| scope.spawn(move || search_slice(sbox, w, jobs)))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("search worker panicked"))
                .collect()
        })
    };
    raw.sort_by_key(|(a, b, _)| (a * b, *a));
    raw.into_iter()
        .map(|(a, b, offs)| {
            let offsets: Vec<Offset> = offs.into_iter().map(|(x, y)| Offset::new(x, y)).collect();
            verify_quadruple(&BigInt::from(a * b), &BigInt::from(a), &BigInt::from(b), &offsets)
                .expect("search only emits valid factorizations")
        })
        .collect()
}

/// A member of one of the explicit families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub index: u64,
    pub cf: CloseFactorization,
    /// `(x_i, y_i) = (5 + 2 sqrt 6)^i` for the four-factorization family.
    pub unit: Option<(BigInt, BigInt)>,
    /// `C (C - 1)^2 / 4` for the three-factorization family.
    pub bound: Option<BigRational>,
}

fn six_unit() -> FundamentalUnit {
    fundamental_solution(6).expect("6 is not a square")
}

/// The four-factorization family built from `(x, y) = (5 + 2 sqrt 6)^i`.
pub fn optimal_family(i: u64) -> Result<FamilyInstance, OracleError> {
    if i < 1 {
        return Err(OracleError::IndexTooSmall(1));
    }
    let exp = u32::try_from(i).map_err(|_| OracleError::BoxTooLarge)?;
    let (x, y) = six_unit().power(exp);
    let n = |v: i64| BigInt::from(v);
    let offsets = vec![
        Offset::new(n(3) * &y, x.clone()),
        Offset::new(&x + n(6) * &y, n(2) * &x + n(2) * &y),
        Offset::new(n(3) * &x + n(6) * &y, n(2) * &x + n(6) * &y),
    ];
    let big_a = n(3) * &y * (&x + n(2) * &y) * (&x + n(6) * &y);
    let big_b = n(2) * &x * (&x + &y) * (&x + n(3) * &y);
    let cf = verify_quadruple(&(&big_a * &big_b), &big_a, &big_b, &offsets)?;
    Ok(FamilyInstance { index: i, cf, unit: Some((x, y)), bound: None })
}

/// The three-factorization family with `C = 2N + 1`:
/// `A = (2N+1)(N^2-1)`, `B = (2N-1)N^2`, offsets `(N+1, N)` and
/// `(2N+1, 2N-1)`.
pub fn theorem0_family(big_n: u64) -> Result<FamilyInstance, OracleError> {
    if big_n < 2 {
        return Err(OracleError::IndexTooSmall(2));
    }
    let n = BigInt::from(big_n);
    let one = BigInt::from(1);
    let two_n = BigInt::from(2) * &n;
    let big_a = (&two_n + &one) * (&n * &n - &one);
    let big_b = (&two_n - &one) * &n * &n;
    let offsets = vec![
        Offset::new(&n + &one, n.clone()),
        Offset::new(&two_n + &one, &two_n - &one),
    ];
    let cf = verify_quadruple(&(&big_a * &big_b), &big_a, &big_b, &offsets)?;
    let c = cf.closeness().clone();
    let bound = BigRational::new(&c * (&c - &one) * (&c - &one), BigInt::from(4));
    Ok(FamilyInstance { index: big_n, cf, unit: None, bound: Some(bound) })
}

impl FamilyInstance {
    /// `A <= C (C - 1)^2 / 4`; `None` for the four-factorization family.
    pub fn within_bound(&self) -> Option<bool> {
        self.bound
            .as_ref()
            .map(|b| &BigRational::from_integer(self.cf.a().clone()) <= b)
    }
}

/// The largest `A / a_3^3` among three-offset tuples, with its witness.
pub fn max_ratio(results: &[CloseFactorization]) -> Result<(BigRational, &CloseFactorization), OracleError> {
    let mut best: Option<(BigRational, &CloseFactorization)> = None;
    for cf in results {
        if cf.offsets().len() != 3 {
            return Err(OracleError::WrongArity(cf.offsets().len()));
        }
        let r = cf.ratio();
        if best.as_ref().map_or(true, |(b, _)| &r > b) {
            best = Some((r, cf));
        }
    }
    best.ok_or(OracleError::Empty)
}

/// Every three-offset sub-tuple of every result.
pub fn quadruples(results: &[CloseFactorization]) -> Vec<CloseFactorization> {
    results.iter().flat_map(|cf| cf.sub_tuples(3)).collect()
}
