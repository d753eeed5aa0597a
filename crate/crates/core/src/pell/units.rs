use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::One;
use serde::Serialize;

use super::PellError;
use crate::decimal;

/// The minimal positive solution of `x^2 - D y^2 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FundamentalUnit {
    pub d: u64,
    #[serde(with = "decimal")]
    pub x: BigInt,
    #[serde(with = "decimal")]
    pub y: BigInt,
}

/// Continued-fraction expansion of `sqrt(D)`: the convergent at the end of
/// the period (or of two periods, for odd period length) is the
/// fundamental solution.
pub fn fundamental_solution(d: u64) -> Result<FundamentalUnit, PellError> {
    if d < 2 {
        return Err(PellError::TooSmall(d));
    }
    let a0 = d.sqrt();
    if a0 * a0 == d {
        return Err(PellError::PerfectSquare(d));
    }
    // partial quotients a_1 .. a_r, the last one equal to 2 a0
    let mut period = Vec::new();
    let (mut m, mut den, mut a) = (0u64, 1u64, a0);
    loop {
        m = den * a - m;
        den = (d - m * m) / den;
        a = (a0 + m) / den;
        period.push(a);
        if a == 2 * a0 {
            break;
        }
    }
    let r = period.len();
    let steps = if r % 2 == 0 { r - 1 } else { 2 * r - 1 };
    let (mut p_prev, mut p) = (BigInt::one(), BigInt::from(a0));
    let (mut q_prev, mut q) = (BigInt::from(0), BigInt::one());
    for &term in period.iter().cycle().take(steps) {
        let p_next = BigInt::from(term) * &p + &p_prev;
        let q_next = BigInt::from(term) * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    assert!(
        &p * &p - BigInt::from(d) * &q * &q == BigInt::one(),
        "convergent failed the Pell identity for D = {d}"
    );
    Ok(FundamentalUnit { d, x: p, y: q })
}

impl FundamentalUnit {
    /// Coefficients of `(x + y sqrt(D))^i`; `i = 0` gives `(1, 0)`.
    pub fn power(&self, i: u32) -> (BigInt, BigInt) {
        let d = BigInt::from(self.d);
        let (mut x, mut y) = (BigInt::one(), BigInt::from(0));
        for _ in 0..i {
            let nx = &self.x * &x + &d * &self.y * &y;
            let ny = &self.x * &y + &self.y * &x;
            x = nx;
            y = ny;
        }
        (x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_discriminants() {
        let u = fundamental_solution(6).unwrap();
        assert_eq!((u.x.clone(), u.y.clone()), (BigInt::from(5), BigInt::from(2)));
        let u = fundamental_solution(2).unwrap();
        assert_eq!((u.x, u.y), (BigInt::from(3), BigInt::from(2)));
        let u = fundamental_solution(3).unwrap();
        assert_eq!((u.x, u.y), (BigInt::from(2), BigInt::from(1)));
        // odd period length
        let u = fundamental_solution(13).unwrap();
        assert_eq!((u.x, u.y), (BigInt::from(649), BigInt::from(180)));
        let u = fundamental_solution(61).unwrap();
        assert_eq!(u.x, BigInt::from(1766319049u64));
    }

    #[test]
    fn rejects_squares() {
        assert_eq!(fundamental_solution(49), Err(PellError::PerfectSquare(49)));
        assert_eq!(fundamental_solution(1), Err(PellError::TooSmall(1)));
    }

    #[test]
    fn powers_of_six_unit() {
        let u = fundamental_solution(6).unwrap();
        assert_eq!(u.power(1), (BigInt::from(5), BigInt::from(2)));
        assert_eq!(u.power(2), (BigInt::from(49), BigInt::from(20)));
        assert_eq!(u.power(3), (BigInt::from(485), BigInt::from(198)));
        assert_eq!(u.power(0), (BigInt::from(1), BigInt::from(0)));
    }
}
