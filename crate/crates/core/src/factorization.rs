//! Close factorizations `n = A*B = (A + a_i)(B - b_i)` and the skew algebra
//! built on their offset pairs.
//!
//! Everything here is exact big-integer arithmetic. A [`CloseFactorization`]
//! can only be obtained through [`verify_quadruple`], so holding one means
//! every defining identity has been checked.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal;

/// One offset pair `(a, b)` with `(A + a)(B - b) = A*B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Offset {
    pub a: BigInt,
    pub b: BigInt,
}

impl Offset {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Offset {
            a: a.into(),
            b: b.into(),
        }
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorizationError {
    #[error("{0} must be a positive integer")]
    NotPositive(&'static str),
    #[error("n differs from A*B")]
    ProductMismatch,
    #[error("B exceeds A")]
    BaseOrder,
    #[error("at least one offset pair is required")]
    NoOffsets,
    #[error("offsets are not strictly increasing in both coordinates at position {0}")]
    NonMonotone(usize),
    #[error("offset pair {0} violates a*B - b*A = a*b")]
    OffsetIdentity(usize),
    #[error("B - b is below 1 for the last offset")]
    CofactorTooSmall,
    #[error("expected exactly {expected} offsets, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("skew {0} is not positive")]
    NonPositiveSkew(&'static str),
    #[error("skews violate D31 > D21")]
    SkewOrder,
    #[error("skews violate D32 + D21 > D31")]
    SkewTriangle,
    #[error("supplied skews do not match the offsets")]
    SkewMismatch,
    #[error("division by {0} is inexact")]
    InexactDivision(&'static str),
    #[error("the three reconstructions of {0} disagree")]
    InconsistentReconstruction(&'static str),
    #[error("equal-skew identity needs D31 = D32")]
    UnequalSkews,
}

impl FactorizationError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        use FactorizationError::*;
        match self {
            NotPositive(_) => "not_positive",
            ProductMismatch => "product_mismatch",
            BaseOrder => "base_order",
            NoOffsets => "no_offsets",
            NonMonotone(_) => "non_monotone",
            OffsetIdentity(_) => "offset_identity",
            CofactorTooSmall => "cofactor_too_small",
            WrongArity { .. } => "wrong_arity",
            NonPositiveSkew(_) => "non_positive_skew",
            SkewOrder => "skew_order",
            SkewTriangle => "skew_triangle",
            SkewMismatch => "skew_mismatch",
            InexactDivision(_) => "inexact_division",
            InconsistentReconstruction(_) => "inconsistent_reconstruction",
            UnequalSkews => "unequal_skews",
        }
    }
}

/// A validated integer `n` with base pair `(A, B)` and `k - 1` offset pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "UncheckedFactorization")]
pub struct CloseFactorization {
    #[serde(with = "decimal")]
    n: BigInt,
    #[serde(rename = "A", with = "decimal")]
    big_a: BigInt,
    #[serde(rename = "B", with = "decimal")]
    big_b: BigInt,
    #[serde(with = "decimal::pairs")]
    offsets: Vec<Offset>,
}

#[derive(Deserialize)]
struct UncheckedFactorization {
    #[serde(with = "decimal")]
    n: BigInt,
    #[serde(rename = "A", with = "decimal")]
    big_a: BigInt,
    #[serde(rename = "B", with = "decimal")]
    big_b: BigInt,
    #[serde(with = "decimal::pairs")]
    offsets: Vec<Offset>,
}

impl TryFrom<UncheckedFactorization> for CloseFactorization {
    type Error = FactorizationError;

    fn try_from(raw: UncheckedFactorization) -> Result<Self, Self::Error> {
        verify_quadruple(&raw.n, &raw.big_a, &raw.big_b, &raw.offsets)
    }
}

impl CloseFactorization {
    pub fn n(&self) -> &BigInt {
        &self.n
    }

    pub fn a(&self) -> &BigInt {
        &self.big_a
    }

    pub fn b(&self) -> &BigInt {
        &self.big_b
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.offsets
    }

    /// Number of distinct factorizations, counting `A*B` itself.
    pub fn k(&self) -> usize {
        self.offsets.len() + 1
    }

    /// The closeness parameter, i.e. the largest `a_i`.
    pub fn closeness(&self) -> &BigInt {
        &self.offsets.last().expect("validated non-empty").a
    }

    /// The explicit factor pairs, starting with `(A, B)`.
    pub fn factor_pairs(&self) -> Vec<(BigInt, BigInt)> {
        std::iter::once((self.big_a.clone(), self.big_b.clone()))
            .chain(
                self.offsets
                    .iter()
                    .map(|o| (&self.big_a + &o.a, &self.big_b - &o.b)),
            )
            .collect()
    }

    /// `A / a_{k-1}^3`.
    pub fn ratio(&self) -> BigRational {
        BigRational::new(self.big_a.clone(), self.closeness().pow(3))
    }

    /// All sub-tuples with exactly `count` offsets, in lexicographic order of
    /// the chosen indices. Each one is a valid factorization on its own.
    pub fn sub_tuples(&self, count: usize) -> Vec<CloseFactorization> {
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..count).collect();
        let len = self.offsets.len();
        if count == 0 || count > len {
            return out;
        }
        loop {
            out.push(CloseFactorization {
                n: self.n.clone(),
                big_a: self.big_a.clone(),
                big_b: self.big_b.clone(),
                offsets: idx.iter().map(|&i| self.offsets[i].clone()).collect(),
            });
            let Some(i) = (0..count).rev().find(|&i| idx[i] != i + len - count) else {
                return out;
            };
            idx[i] += 1;
            for j in i + 1..count {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

/// Checks every defining identity of a close factorization.
pub fn verify_quadruple(
    n: &BigInt,
    big_a: &BigInt,
    big_b: &BigInt,
    offsets: &[Offset],
) -> Result<CloseFactorization, FactorizationError> {
    use FactorizationError::*;
    for (name, v) in [("n", n), ("A", big_a), ("B", big_b)] {
        if !v.is_positive() {
            return Err(NotPositive(name));
        }
    }
    if offsets.is_empty() {
        return Err(NoOffsets);
    }
    for o in offsets {
        if !o.a.is_positive() {
            return Err(NotPositive("a_i"));
        }
        if !o.b.is_positive() {
            return Err(NotPositive("b_i"));
        }
    }
    if &(big_a * big_b) != n {
        return Err(ProductMismatch);
    }
    if big_b > big_a {
        return Err(BaseOrder);
    }
    for (i, w) in offsets.windows(2).enumerate() {
        if w[1].a <= w[0].a || w[1].b <= w[0].b {
            return Err(NonMonotone(i + 1));
        }
    }
    if big_b - &offsets[offsets.len() - 1].b < BigInt::one() {
        return Err(CofactorTooSmall);
    }
    for (i, o) in offsets.iter().enumerate() {
        if &o.a * big_b - &o.b * big_a != &o.a * &o.b {
            return Err(OffsetIdentity(i));
        }
    }
    Ok(CloseFactorization {
        n: n.clone(),
        big_a: big_a.clone(),
        big_b: big_b.clone(),
        offsets: offsets.to_vec(),
    })
}

/// The three skews `D21, D31, D32` of a three-offset tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SkewTriple {
    #[serde(with = "decimal")]
    pub d21: BigInt,
    #[serde(with = "decimal")]
    pub d31: BigInt,
    #[serde(with = "decimal")]
    pub d32: BigInt,
}

impl SkewTriple {
    /// Raw determinants without any sign or ordering checks.
    pub fn raw(offsets: &[Offset; 3]) -> SkewTriple {
        let [o1, o2, o3] = offsets;
        SkewTriple {
            d21: &o2.a * &o1.b - &o1.a * &o2.b,
            d31: &o3.a * &o1.b - &o1.a * &o3.b,
            d32: &o3.a * &o2.b - &o2.a * &o3.b,
        }
    }

    pub fn as_tuple(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.d21, &self.d31, &self.d32)
    }
}

impl fmt::Display for SkewTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.d21, self.d31, self.d32)
    }
}

fn three(offsets: &[Offset]) -> Result<&[Offset; 3], FactorizationError> {
    offsets
        .try_into()
        .map_err(|_| FactorizationError::WrongArity {
            expected: 3,
            got: offsets.len(),
        })
}

pub fn compute_skews(offsets: &[Offset]) -> Result<SkewTriple, FactorizationError> {
    use FactorizationError::*;
    let offs = three(offsets)?;
    for (i, w) in offs.windows(2).enumerate() {
        if w[1].a <= w[0].a || w[1].b <= w[0].b {
            return Err(NonMonotone(i + 1));
        }
    }
    let s = SkewTriple::raw(offs);
    for (name, d) in [("D21", &s.d21), ("D31", &s.d31), ("D32", &s.d32)] {
        if !d.is_positive() {
            return Err(NonPositiveSkew(name));
        }
    }
    if s.d31 <= s.d21 {
        return Err(SkewOrder);
    }
    if &s.d32 + &s.d21 <= s.d31 {
        return Err(SkewTriangle);
    }
    Ok(s)
}

fn exact_div(num: BigInt, den: &BigInt, what: &'static str) -> Result<BigInt, FactorizationError> {
    let (q, r) = num.div_rem(den);
    if r.is_zero() {
        Ok(q)
    } else {
        Err(FactorizationError::InexactDivision(what))
    }
}

/// Recovers `(A, B)` from three offsets and their skews, cross-checking all
/// three index pairs.
pub fn reconstruct_ab(
    offsets: &[Offset],
    skews: &SkewTriple,
) -> Result<(BigInt, BigInt), FactorizationError> {
    let offs = three(offsets)?;
    if &SkewTriple::raw(offs) != skews {
        return Err(FactorizationError::SkewMismatch);
    }
    let [o1, o2, o3] = offs;
    let pairs = [(o2, o1, &skews.d21, "D21"), (o3, o1, &skews.d31, "D31"), (o3, o2, &skews.d32, "D32")];
    let mut bs = Vec::with_capacity(3);
    let mut as_ = Vec::with_capacity(3);
    for (hi, lo, d, name) in pairs {
        if !d.is_positive() {
            return Err(FactorizationError::NonPositiveSkew(name));
        }
        bs.push(exact_div(&hi.b * &lo.b * (&hi.a - &lo.a), d, name)?);
        as_.push(exact_div(&hi.a * &lo.a * (&hi.b - &lo.b), d, name)?);
    }
    if bs.iter().any(|b| b != &bs[0]) {
        return Err(FactorizationError::InconsistentReconstruction("B"));
    }
    if as_.iter().any(|a| a != &as_[0]) {
        return Err(FactorizationError::InconsistentReconstruction("A"));
    }
    Ok((as_.swap_remove(0), bs.swap_remove(0)))
}

/// Outcome of the structural checks on a validated factorization.
///
/// The skew-based fields are `None` unless the tuple has exactly three
/// offsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    /// `a_i > b_i` for every offset.
    pub offsets_dominate: bool,
    /// `a_i - a_j > b_i - b_j` for every `i > j`.
    pub gaps_dominate: bool,
    /// `D31 a2 - D21 a3 = D32 a1`.
    pub skew_identity_a: Option<bool>,
    /// `D31 b2 - D21 b3 = D32 b1`.
    pub skew_identity_b: Option<bool>,
    /// `D31 > D21`.
    pub skew_order: Option<bool>,
    /// `D32 + D21 > D31`.
    pub skew_triangle: Option<bool>,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.offsets_dominate
            && self.gaps_dominate
            && [
                self.skew_identity_a,
                self.skew_identity_b,
                self.skew_order,
                self.skew_triangle,
            ]
            .iter()
            .all(|c| c.unwrap_or(true))
    }
}

pub fn check_structure(cf: &CloseFactorization) -> StructureReport {
    let offs = cf.offsets();
    let offsets_dominate = offs.iter().all(|o| o.a > o.b);
    let gaps_dominate = offs.iter().enumerate().all(|(i, hi)| {
        offs[..i]
            .iter()
            .all(|lo| &hi.a - &lo.a > &hi.b - &lo.b)
    });
    let mut report = StructureReport {
        offsets_dominate,
        gaps_dominate,
        skew_identity_a: None,
        skew_identity_b: None,
        skew_order: None,
        skew_triangle: None,
    };
    if let Ok(t) = three(offs) {
        let s = SkewTriple::raw(t);
        let [o1, o2, o3] = t;
        report.skew_identity_a = Some(&s.d31 * &o2.a - &s.d21 * &o3.a == &s.d32 * &o1.a);
        report.skew_identity_b = Some(&s.d31 * &o2.b - &s.d21 * &o3.b == &s.d32 * &o1.b);
        report.skew_order = Some(s.d31 > s.d21);
        report.skew_triangle = Some(&s.d32 + &s.d21 > s.d31);
    }
    report
}

/// `base (base + s3) == (base + s1)(base + s2)`.
pub fn shifted_product_identity(base: &BigInt, s1: &BigInt, s2: &BigInt, s3: &BigInt) -> bool {
    base * (base + s3) == (base + s1) * (base + s2)
}

/// For a tuple with `D31 = D32`: both product identities hold and
/// `4A <= C^2` with `C = a3`.
pub fn equal_skew_identity(cf: &CloseFactorization) -> Result<bool, FactorizationError> {
    let t = three(cf.offsets())?;
    let s = SkewTriple::raw(t);
    if s.d31 != s.d32 {
        return Err(FactorizationError::UnequalSkews);
    }
    let [o1, o2, o3] = t;
    let a_side = shifted_product_identity(cf.a(), &o1.a, &o2.a, &o3.a);
    let b_side = shifted_product_identity(cf.b(), &-&o1.b, &-&o2.b, &-&o3.b);
    let bound = BigInt::from(4) * cf.a() <= &o3.a * &o3.a;
    Ok(a_side && b_side && bound)
}

/// `lambda C^3 / (D (1 + lambda)^2)`: the upper bound on `A` when
/// `a_i = (1 + lambda) a_j`, `C` bounds every offset and `D = D_ij`.
pub fn skew_ratio_bound(lambda: &BigRational, c: &BigInt, skew: &BigInt) -> BigRational {
    assert!(lambda.is_positive(), "lambda must be positive");
    assert!(skew.is_positive(), "skew must be positive");
    let one_plus = BigRational::one() + lambda;
    lambda * BigRational::from_integer(c.pow(3))
        / (BigRational::from_integer(skew.clone()) * &one_plus * &one_plus)
}

/// `C^3 / 24`, valid whenever some skew exceeds 5.
pub fn large_skew_bound(c: &BigInt, skew: &BigInt) -> Option<BigRational> {
    (skew > &BigInt::from(5)).then(|| BigRational::new(c.pow(3), BigInt::from(24)))
}

/// `d_a = gcd(a1, a2)`, `d_b = gcd(b1, b2)` and the coprime cofactors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdDecomposition {
    #[serde(with = "decimal")]
    pub d_a: BigInt,
    #[serde(with = "decimal")]
    pub d_b: BigInt,
    #[serde(with = "decimal")]
    pub alpha1: BigInt,
    #[serde(with = "decimal")]
    pub alpha2: BigInt,
    #[serde(with = "decimal")]
    pub beta1: BigInt,
    #[serde(with = "decimal")]
    pub beta2: BigInt,
}

impl GcdDecomposition {
    pub fn from_offsets(first: &Offset, second: &Offset) -> Self {
        let d_a = first.a.gcd(&second.a);
        let d_b = first.b.gcd(&second.b);
        GcdDecomposition {
            alpha1: &first.a / &d_a,
            alpha2: &second.a / &d_a,
            beta1: &first.b / &d_b,
            beta2: &second.b / &d_b,
            d_a,
            d_b,
        }
    }
}

/// The Pell parameters a concrete three-offset tuple falls under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedCase {
    pub skews: SkewTriple,
    pub decomposition: GcdDecomposition,
    #[serde(with = "decimal")]
    pub k: BigInt,
    #[serde(with = "decimal")]
    pub m: BigInt,
}

impl DerivedCase {
    /// `k m D21 = d_a d_b D32 D31 (D32 + D21 - D31)`.
    pub fn km_identity_holds(&self) -> bool {
        let s = &self.skews;
        let g = &self.decomposition;
        &self.k * &self.m * &s.d21 == &g.d_a * &g.d_b * &s.d32 * &s.d31 * (&s.d32 + &s.d21 - &s.d31)
    }

    /// `k d_a > d_b m`.
    pub fn k_dominates(&self) -> bool {
        &self.k * &self.decomposition.d_a > &self.decomposition.d_b * &self.m
    }

    /// `d_a d_b` divides `D21`.
    pub fn gcd_divides_skew(&self) -> bool {
        let g = &self.decomposition;
        (&self.skews.d21 % (&g.d_a * &g.d_b)).is_zero()
    }

    /// `d_b k beta1^2 - d_a m alpha1^2 = D31 (D31 - D21)`.
    pub fn pell_holds(&self) -> bool {
        let g = &self.decomposition;
        let s = &self.skews;
        &g.d_b * &self.k * &g.beta1 * &g.beta1 - &g.d_a * &self.m * &g.alpha1 * &g.alpha1
            == &s.d31 * (&s.d31 - &s.d21)
    }
}

/// Derives `(k, m)` from `beta1 k = D31 (a3 - a2)` and
/// `alpha1 m = D31 (b3 - b2)`; errors if either division is inexact.
pub fn derive_case(cf: &CloseFactorization) -> Result<DerivedCase, FactorizationError> {
    let t = three(cf.offsets())?;
    let skews = compute_skews(t)?;
    let [o1, o2, o3] = t;
    let decomposition = GcdDecomposition::from_offsets(o1, o2);
    let k = exact_div(&skews.d31 * (&o3.a - &o2.a), &decomposition.beta1, "beta1")?;
    let m = exact_div(&skews.d31 * (&o3.b - &o2.b), &decomposition.alpha1, "alpha1")?;
    Ok(DerivedCase {
        skews,
        decomposition,
        k,
        m,
    })
}
