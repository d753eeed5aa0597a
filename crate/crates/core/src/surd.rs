//! Exact arithmetic in a real quadratic field `Q(sqrt(r))`.
//!
//! Limits of the form `p + q*sqrt(r)` with rational `p`, `q` are kept exact
//! until the very end, where [`QuadraticSurd::approximate`] produces a binary
//! fixed-point value at a caller-chosen precision. Ordering is decided
//! exactly, so thresholds such as `0.042` never depend on rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `rational + coeff * sqrt(radicand)` with `radicand` square-free.
///
/// A purely rational value has `coeff == 0` and `radicand == 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    rational: BigRational,
    coeff: BigRational,
    radicand: BigInt,
}

fn square_free_split(n: &BigInt) -> (BigInt, BigInt) {
    // n = outer^2 * inner, inner square-free. Trial division is plenty for
    // the radicands that show up here (products of small case parameters).
    let mut rest = n.clone();
    let mut outer = BigInt::one();
    let mut inner = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            outer *= &p;
        }
        if e % 2 == 1 {
            inner *= &p;
        }
        p += 1u32;
    }
    inner *= rest;
    (outer, inner)
}

impl QuadraticSurd {
    pub fn from_rational(q: BigRational) -> Self {
        QuadraticSurd {
            rational: q,
            coeff: BigRational::zero(),
            radicand: BigInt::one(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    /// The square root of a non-negative rational, normalised so the
    /// radicand is a square-free integer.
    pub fn sqrt(q: &BigRational) -> Self {
        assert!(!q.is_negative(), "square root of a negative rational");
        if q.is_zero() {
            return Self::from_integer(0);
        }
        // sqrt(n/d) = sqrt(n*d)/d
        let (outer, inner) = square_free_split(&(q.numer() * q.denom()));
        let scale = BigRational::new(outer, q.denom().clone());
        if inner.is_one() {
            Self::from_rational(scale)
        } else {
            QuadraticSurd {
                rational: BigRational::zero(),
                coeff: scale,
                radicand: inner,
            }
        }
    }

    /// Builds `p + q*sqrt(r)` for a square-free `r > 1`.
    pub fn new(p: BigRational, q: BigRational, r: BigInt) -> Self {
        let (outer, inner) = square_free_split(&r);
        let q = q * BigRational::from_integer(outer);
        if inner.is_one() || q.is_zero() {
            let folded = if inner.is_one() { q } else { BigRational::zero() };
            Self::from_rational(p + folded)
        } else {
            QuadraticSurd {
                rational: p,
                coeff: q,
                radicand: inner,
            }
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn irrational_coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    fn normalized(mut self) -> Self {
        if self.coeff.is_zero() {
            self.radicand = BigInt::one();
        }
        self
    }

    fn common_radicand(&self, other: &Self) -> BigInt {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => other.radicand.clone(),
            (_, true) => self.radicand.clone(),
            _ => {
                assert_eq!(
                    self.radicand, other.radicand,
                    "mixing different quadratic fields"
                );
                self.radicand.clone()
            }
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadraticSurd {
            rational: self.rational.clone(),
            coeff: -self.coeff.clone(),
            radicand: self.radicand.clone(),
        }
    }

    /// Field norm `p^2 - r q^2`.
    pub fn norm(&self) -> BigRational {
        &self.rational * &self.rational
            - &self.coeff * &self.coeff * BigRational::from_integer(self.radicand.clone())
    }

    pub fn signum(&self) -> Ordering {
        let p = self.rational.sign_ord();
        let q = self.coeff.sign_ord();
        if q == Ordering::Equal {
            return p;
        }
        if p == Ordering::Equal || p == q {
            return q;
        }
        // opposite signs: compare p^2 with r q^2
        let lhs = &self.rational * &self.rational;
        let rhs = &self.coeff * &self.coeff * BigRational::from_integer(self.radicand.clone());
        match lhs.cmp(&rhs) {
            Ordering::Greater => p,
            Ordering::Less => q,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::from_integer(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Fixed-point approximation with `bits` fractional bits; the error is
    /// below `2^(1 - bits)`.
    pub fn approximate(&self, bits: u32) -> Fixed {
        let scale = BigInt::one() << bits;
        let rat = (self.rational.numer() * &scale).div_floor(self.rational.denom());
        let irr = if self.coeff.is_zero() {
            BigInt::zero()
        } else {
            // |q| sqrt(r) 2^bits = sqrt(q^2 r 4^bits)
            let num = self.coeff.numer() * self.coeff.numer() * &self.radicand;
            let den = self.coeff.denom() * self.coeff.denom();
            let root = ((num << (2 * bits)) / den).sqrt();
            if self.coeff.is_negative() {
                -root
            } else {
                root
            }
        };
        Fixed {
            mantissa: rat + irr,
            bits,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.approximate(128).to_f64()
    }
}

trait SignOrd {
    fn sign_ord(&self) -> Ordering;
}

impl SignOrd for BigRational {
    fn sign_ord(&self) -> Ordering {
        match self.numer().sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

impl PartialOrd for QuadraticSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticSurd {
    /// Exact comparison, also between different quadratic fields.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.is_rational() || other.is_rational() || self.radicand == other.radicand {
            return (self - other).signum();
        }
        // sign of u + v sqrt(r) + w sqrt(s)
        let u = &self.rational - &other.rational;
        let v = &self.coeff;
        let w = -other.coeff.clone();
        let vr = v * v * BigRational::from_integer(self.radicand.clone());
        let ws = &w * &w * BigRational::from_integer(other.radicand.clone());
        let surd_sign = match (v.sign_ord(), w.sign_ord()) {
            (a, b) if a == b => a,
            (a, _) => match vr.cmp(&ws) {
                Ordering::Greater => a,
                Ordering::Less => a.reverse(),
                Ordering::Equal => Ordering::Equal,
            },
        };
        let u_sign = u.sign_ord();
        if u_sign == Ordering::Equal || surd_sign == Ordering::Equal || u_sign == surd_sign {
            return if u_sign == Ordering::Equal { surd_sign } else { u_sign };
        }
        // opposite signs: compare u^2 with (v sqrt r + w sqrt s)^2
        let cross = QuadraticSurd::new(
            &u * &u - vr - ws,
            BigRational::from_integer(BigInt::from(-2)) * v * &w,
            &self.radicand * &other.radicand,
        );
        match cross.signum() {
            Ordering::Greater => u_sign,
            Ordering::Less => surd_sign,
            Ordering::Equal => Ordering::Equal,
        }
    }
}

impl From<BigRational> for QuadraticSurd {
    fn from(q: BigRational) -> Self {
        Self::from_rational(q)
    }
}

impl Neg for QuadraticSurd {
    type Output = QuadraticSurd;
    fn neg(self) -> QuadraticSurd {
        QuadraticSurd {
            rational: -self.rational,
            coeff: -self.coeff,
            radicand: self.radicand,
        }
    }
}

impl<'a> Add<&'a QuadraticSurd> for &'a QuadraticSurd {
    type Output = QuadraticSurd;
    fn add(self, rhs: &QuadraticSurd) -> QuadraticSurd {
        let radicand = self.common_radicand(rhs);
        QuadraticSurd {
            rational: &self.rational + &rhs.rational,
            coeff: &self.coeff + &rhs.coeff,
            radicand,
        }
        .normalized()
    }
}

impl<'a> Sub<&'a QuadraticSurd> for &'a QuadraticSurd {
    type Output = QuadraticSurd;
    fn sub(self, rhs: &QuadraticSurd) -> QuadraticSurd {
        let radicand = self.common_radicand(rhs);
        QuadraticSurd {
            rational: &self.rational - &rhs.rational,
            coeff: &self.coeff - &rhs.coeff,
            radicand,
        }
        .normalized()
    }
}

impl<'a> Mul<&'a QuadraticSurd> for &'a QuadraticSurd {
    type Output = QuadraticSurd;
    fn mul(self, rhs: &QuadraticSurd) -> QuadraticSurd {
        let radicand = self.common_radicand(rhs);
        let r = BigRational::from_integer(radicand.clone());
        QuadraticSurd {
            rational: &self.rational * &rhs.rational + &self.coeff * &rhs.coeff * r,
            coeff: &self.rational * &rhs.coeff + &self.coeff * &rhs.rational,
            radicand,
        }
        .normalized()
    }
}

impl<'a> Div<&'a QuadraticSurd> for &'a QuadraticSurd {
    type Output = QuadraticSurd;
    fn div(self, rhs: &QuadraticSurd) -> QuadraticSurd {
        let norm = rhs.norm();
        assert!(!norm.is_zero(), "division by zero in quadratic field");
        let num = self * &rhs.conjugate();
        QuadraticSurd {
            rational: num.rational / &norm,
            coeff: num.coeff / &norm,
            radicand: num.radicand,
        }
        .normalized()
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<QuadraticSurd> for QuadraticSurd {
            type Output = QuadraticSurd;
            fn $m(self, rhs: QuadraticSurd) -> QuadraticSurd {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadraticSurd> for QuadraticSurd {
            type Output = QuadraticSurd;
            fn $m(self, rhs: &QuadraticSurd) -> QuadraticSurd {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.rational)
        } else {
            write!(f, "{} + {}*sqrt({})", self.rational, self.coeff, self.radicand)
        }
    }
}

/// A binary fixed-point number `mantissa / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    pub mantissa: BigInt,
    pub bits: u32,
}

impl Fixed {
    pub fn to_f64(&self) -> f64 {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.bits)
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    /// Plain decimal rendering rounded half-up to `sig` significant digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        assert!(sig > 0);
        if self.mantissa.is_zero() {
            return "0".to_string();
        }
        let neg = self.mantissa.is_negative();
        // Enough extra decimal places that the first `sig` significant
        // digits are present even for small values.
        let extra = sig + (self.bits as usize) * 3 / 10 + 2;
        let scaled = (self.mantissa.abs() * BigInt::from(10u32).pow(extra as u32)) >> self.bits;
        let mut digits: Vec<u8> = scaled.to_str_radix(10).into_bytes();
        // position of the decimal point counted from the left of `digits`
        let mut point = digits.len() as isize - extra as isize;
        if digits.len() > sig {
            let round_up = digits[sig] >= b'5';
            digits.truncate(sig);
            if round_up {
                let mut i = sig;
                loop {
                    if i == 0 {
                        digits.insert(0, b'1');
                        point += 1;
                        break;
                    }
                    i -= 1;
                    if digits[i] == b'9' {
                        digits[i] = b'0';
                    } else {
                        digits[i] += 1;
                        break;
                    }
                }
                digits.truncate(sig);
            }
        }
        let digits = String::from_utf8(digits).expect("ascii digits");
        let body = if point <= 0 {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        } else if point as usize >= digits.len() {
            format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
        } else {
            let (int, frac) = digits.split_at(point as usize);
            format!("{int}.{frac}")
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}
