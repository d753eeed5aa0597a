//! Congruence certificates of insolvability.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{is_prime, PellEquation, Prime};

/// Largest prime tried by the two divisibility-based certificates inside
/// [`auto_obstruct`].
pub const LEMMA_PRIME_LIMIT: u64 = 13;

/// Evidence that `K x^2 - M y^2 = tau` has no integer solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObstructionCertificate {
    /// No `u` in `x_residues` and `v` in `y_residues` satisfy
    /// `u - v = target (mod modulus)`, where the residue sets are the values
    /// of `K x^2` and `M y^2` mod `modulus`.
    ResidueSweep {
        modulus: u64,
        x_residues: Vec<u64>,
        y_residues: Vec<u64>,
        target: u64,
    },
    /// `v_p(tau) = b` is odd, `p^(b+1) | K` and `p` does not divide `M`.
    PrimePowerLemma { prime: u64, exponent: u32 },
    /// `p || K`, `p | tau`, `p` does not divide `M`, and
    /// `(K/p)^-1 (tau/p)` is the quadratic non-residue `residue` mod `p`.
    NonResidueLemma { prime: u64, residue: u64 },
}

impl ObstructionCertificate {
    /// The modulus at which the certificate is a congruence argument:
    /// `p^(b+1)` and `p^2` for the two lemma kinds.
    pub fn modulus(&self) -> u64 {
        match *self {
            ObstructionCertificate::ResidueSweep { modulus, .. } => modulus,
            ObstructionCertificate::PrimePowerLemma { prime, exponent } => prime.pow(exponent + 1),
            ObstructionCertificate::NonResidueLemma { prime, .. } => prime * prime,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ObstructionCertificate::ResidueSweep { .. } => "residue_sweep",
            ObstructionCertificate::PrimePowerLemma { .. } => "prime_power_lemma",
            ObstructionCertificate::NonResidueLemma { .. } => "non_residue_lemma",
        }
    }

    /// Re-checks the certificate from scratch against `eq`, without reusing
    /// any of the code paths that produced it.
    pub fn verify(&self, eq: &PellEquation) -> bool {
        match *self {
            ObstructionCertificate::ResidueSweep {
                modulus,
                ref x_residues,
                ref y_residues,
                target,
            } => {
                if modulus < 2 {
                    return false;
                }
                let m = modulus as i128;
                let (k, mm, tau) = (eq.k() as i128, eq.m() as i128, eq.tau() as i128);
                let no_pair = (0..m).all(|x| (0..m).all(|y| (k * x * x - mm * y * y - tau).rem_euclid(m) != 0));
                let xs: BTreeSet<u64> = (0..m).map(|x| (k * x * x).rem_euclid(m) as u64).collect();
                let ys: BTreeSet<u64> = (0..m).map(|y| (mm * y * y).rem_euclid(m) as u64).collect();
                no_pair
                    && xs.into_iter().eq(x_residues.iter().copied())
                    && ys.into_iter().eq(y_residues.iter().copied())
                    && target == tau.rem_euclid(m) as u64
            }
            ObstructionCertificate::PrimePowerLemma { prime, exponent } => {
                if !is_prime(prime) || exponent % 2 == 0 {
                    return false;
                }
                let (Some(pb), Some(pb1)) = (
                    (prime as i128).checked_pow(exponent),
                    (prime as i128).checked_pow(exponent + 1),
                ) else {
                    return false;
                };
                let (k, mm, tau) = (eq.k() as i128, eq.m() as i128, eq.tau() as i128);
                tau % pb == 0 && k % pb1 == 0 && mm % prime as i128 != 0 && tau % pb1 != 0
            }
            ObstructionCertificate::NonResidueLemma { prime, residue } => {
                if prime == 2 || !is_prime(prime) {
                    return false;
                }
                let p = prime as i128;
                let (k, mm, tau) = (eq.k() as i128, eq.m() as i128, eq.tau() as i128);
                if k % p != 0 || k % (p * p) == 0 || tau % p != 0 || mm % p == 0 {
                    return false;
                }
                let k1 = (k / p).rem_euclid(p);
                let t1 = (tau / p).rem_euclid(p);
                // residue * K' = tau' (mod p), and Euler's criterion gives -1
                (residue as i128 * k1 - t1).rem_euclid(p) == 0
                    && pow_mod(residue as u128, (prime as u128 - 1) / 2, prime as u128) == prime as u128 - 1
            }
        }
    }
}

fn pow_mod(mut base: u128, mut exp: u128, modulus: u128) -> u128 {
    let mut acc = 1 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Prime powers up to 64, ascending.
pub fn default_moduli() -> Vec<u64> {
    let mut out: Vec<u64> = Prime::up_to(64)
        .flat_map(|p| {
            std::iter::successors(Some(p.get()), move |q| Some(q * p.get())).take_while(|&q| q <= 64)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Exhaustive check of all residue pairs mod `modulus`.
pub fn residue_obstruction(eq: &PellEquation, modulus: u64) -> Option<ObstructionCertificate> {
    assert!(modulus >= 2, "modulus must be at least 2");
    let m = modulus as i128;
    let squares = |c: i64| -> BTreeSet<u64> {
        (0..m)
            .map(|x| ((c as i128).rem_euclid(m) * (x * x % m) % m) as u64)
            .collect()
    };
    let xs = squares(eq.k());
    let ys = squares(eq.m());
    let target = (eq.tau() as i128).rem_euclid(m) as u64;
    let hit = xs
        .iter()
        .any(|&u| ys.contains(&((u as i128 - target as i128).rem_euclid(m) as u64)));
    (!hit).then(|| ObstructionCertificate::ResidueSweep {
        modulus,
        x_residues: xs.into_iter().collect(),
        y_residues: ys.into_iter().collect(),
        target,
    })
}

fn valuation(mut n: i64, p: u64) -> u32 {
    let p = p as i64;
    let mut v = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Certificate when `p^b` exactly divides `tau` for odd `b`, `p^(b+1)`
/// divides `K` and `p` does not divide `M`.
pub fn prime_power_obstruction(eq: &PellEquation, p: Prime) -> Option<ObstructionCertificate> {
    let p = p.get();
    let b = valuation(eq.tau(), p);
    (b % 2 == 1 && valuation(eq.k(), p) > b && eq.m() % p as i64 != 0)
        .then_some(ObstructionCertificate::PrimePowerLemma { prime: p, exponent: b })
}

/// Certificate when `p` exactly divides `K`, `p | tau`, `p` does not divide
/// `M` and `(K/p)^-1 (tau/p)` is a quadratic non-residue mod `p`.
pub fn qnr_obstruction(eq: &PellEquation, p: Prime) -> Option<ObstructionCertificate> {
    let p = p.get();
    if p == 2 || valuation(eq.k(), p) != 1 || eq.tau() % p as i64 != 0 || eq.m() % p as i64 == 0 {
        return None;
    }
    let pi = p as i64;
    let k1 = (eq.k() / pi).rem_euclid(pi);
    let t1 = (eq.tau() / pi).rem_euclid(pi);
    let inv = (1..pi).find(|&c| c * k1 % pi == 1)?;
    let residue = inv * t1 % pi;
    let squares: BTreeSet<i64> = (0..pi).map(|x| x * x % pi).collect();
    (!squares.contains(&residue)).then_some(ObstructionCertificate::NonResidueLemma {
        prime: p,
        residue: residue as u64,
    })
}

/// The certificate with the smallest modulus among residue sweeps over
/// `moduli` and both lemma kinds for primes up to [`LEMMA_PRIME_LIMIT`].
/// On a tie the residue sweep wins.
pub fn auto_obstruct(eq: &PellEquation, moduli: &[u64]) -> Option<ObstructionCertificate> {
    let sweeps = moduli
        .iter()
        .filter(|&&m| m >= 2)
        .filter_map(|&m| residue_obstruction(eq, m))
        .map(|c| (c.modulus(), 0u8, c));
    let lemmas = Prime::up_to(LEMMA_PRIME_LIMIT).flat_map(|p| {
        [
            prime_power_obstruction(eq, p).map(|c| (c.modulus(), 1u8, c)),
            qnr_obstruction(eq, p).map(|c| (c.modulus(), 2u8, c)),
        ]
        .into_iter()
        .flatten()
    });
    sweeps
        .chain(lemmas)
        .min_by_key(|(m, rank, _)| (*m, *rank))
        .map(|(_, _, c)| c)
}
