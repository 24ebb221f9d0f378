//! Exact residue arithmetic modulo prime powers.
//!
//! Everything here works on `u64` residues with `u128` intermediates, which
//! covers every modulus below `2^63`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest modulus accepted anywhere in the crate.
pub const MAX_MODULUS: u64 = 1 << 63;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    let (a, b) = (a % m, b % m);
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Reduces a signed integer into `[0, m)`.
#[inline]
pub fn reduce_signed(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(reduce_signed(old_s, m))
}

/// `p^e`, failing if the result reaches [`MAX_MODULUS`].
pub fn checked_pow(p: u64, e: u32) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc
            .checked_mul(p)
            .filter(|v| *v < MAX_MODULUS)
            .ok_or(Error::ModulusTooLarge { p, exponent: e })?;
    }
    Ok(acc)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime divisors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// p-adic valuation of a non-zero residue; `None` for zero.
#[inline]
pub fn valuation(mut a: u64, p: u64) -> Option<u32> {
    if a == 0 {
        return None;
    }
    let mut v = 0;
    while a.is_multiple_of(p) {
        a /= p;
        v += 1;
    }
    Some(v)
}

/// Rejects `p = 2` and composites; every construction here needs an odd prime.
pub fn require_odd_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    Ok(())
}

/// Smallest generator of `(Z/p^n)^*`.
///
/// Candidates are certified by checking `g^(phi/q) != 1` for every prime
/// `q | phi(p^n)`.
pub fn primitive_root(p: u64, n: u32) -> Result<u64> {
    require_odd_prime(p)?;
    if n == 0 {
        return Err(Error::InvalidArgument("exponent must be positive".into()));
    }
    let m = checked_pow(p, n)?;
    let phi = (m / p) * (p - 1);
    let mut qs = prime_factors(p - 1);
    if n > 1 {
        qs.push(p);
    }
    (2..m)
        .find(|&g| g % p != 0 && qs.iter().all(|&q| pow_mod(g, phi / q, m) != 1))
        .ok_or_else(|| Error::Internal(format!("no primitive root modulo {p}^{n}")))
}

/// `xi = gamma^(p^(n-1))` for a primitive root `gamma` mod `p^n`.
///
/// `xi` has multiplicative order exactly `p - 1`, so it acts on `Z/p^n` as a
/// lift of a generator of `(Z/p)^*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EngelUnit {
    pub p: u64,
    pub n: u32,
    pub gamma: u64,
    pub xi: u64,
}

impl EngelUnit {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        let gamma = primitive_root(p, n)?;
        let m = checked_pow(p, n)?;
        let xi = pow_mod(gamma, m / p, m);
        let unit = EngelUnit { p, n, gamma, xi };
        if !unit.certify() {
            return Err(Error::Internal(format!(
                "Engel unit certification failed for p={p}, n={n}"
            )));
        }
        Ok(unit)
    }

    pub fn modulus(&self) -> u64 {
        checked_pow(self.p, self.n).expect("checked at construction")
    }

    /// `xi^(p-1) = 1 mod p^n` and `xi^j != 1 mod p` for `0 < j < p-1`.
    pub fn certify(&self) -> bool {
        let m = self.modulus();
        if pow_mod(self.xi, self.p - 1, m) != 1 {
            return false;
        }
        (1..self.p - 1).all(|j| pow_mod(self.xi, j, self.p) != 1)
    }

    /// `xi^e` reduced modulo `p^n`.
    pub fn power(&self, e: u64) -> u64 {
        pow_mod(self.xi, e, self.modulus())
    }
}

pub fn engel_unit(p: u64, n: u32) -> Result<EngelUnit> {
    EngelUnit::new(p, n)
}

/// `C(j, i) mod p^m`, computed exactly and then reduced.
pub fn binom_reduced(j: u64, i: u64, p: u64, m: u32) -> Result<u64> {
    if i > j {
        return Err(Error::InvalidArgument(format!("binomial C({j}, {i}) with i > j")));
    }
    let modulus = checked_pow(p, m)?;
    let i = i.min(j - i);
    let mut acc = BigUint::one();
    for t in 0..i {
        acc *= BigUint::from(j - t);
        acc /= BigUint::from(t + 1);
    }
    Ok((acc % BigUint::from(modulus))
        .to_u64()
        .expect("residue fits in u64"))
}

/// Exact binomial coefficient, for oracles and small cases.
pub fn binom_exact(j: u64, i: u64) -> BigUint {
    if i > j {
        return BigUint::zero();
    }
    let i = i.min(j - i);
    let mut acc = BigUint::one();
    for t in 0..i {
        acc *= BigUint::from(j - t);
        acc /= BigUint::from(t + 1);
    }
    acc
}

/// The residue `u` with `u * i! = 1 mod p^m`; only defined for `i < p`.
pub fn inv_factorial(i: u64, p: u64, m: u32) -> Result<u64> {
    if i >= p {
        return Err(Error::FactorialNotInvertible { i, p });
    }
    let modulus = checked_pow(p, m)?;
    let fact = (1..=i).fold(1u64, |acc, t| mul_mod(acc, t, modulus));
    inv_mod(fact, modulus).ok_or(Error::FactorialNotInvertible { i, p })
}
