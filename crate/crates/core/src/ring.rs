//! Residue arithmetic in Z/ℓᵐZ and a few number-theoretic helpers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ring Z/ℓᵐZ for a prime ℓ ≥ 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingSpec {
    ell: u32,
    m: u32,
    modulus: u32,
}

impl RingSpec {
    pub fn new(ell: u32, m: u32) -> Result<Self> {
        if !is_prime(ell as u64) {
            return Err(Error::NotPrime(ell as u64));
        }
        if ell < 5 {
            return Err(Error::PrimeTooSmall { ell, min: 5 });
        }
        if m == 0 {
            return Err(Error::ZeroPower);
        }
        let mut modulus: u64 = 1;
        for _ in 0..m {
            modulus *= ell as u64;
            if modulus > u32::MAX as u64 {
                return Err(Error::ModulusTooLarge { ell, m });
            }
        }
        Ok(RingSpec { ell, m, modulus: modulus as u32 })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// The same prime with a smaller (or equal) power.
    pub fn with_power(&self, m: u32) -> Result<Self> {
        RingSpec::new(self.ell, m)
    }

    /// The residue field F_ℓ.
    pub fn residue_field(&self) -> Self {
        RingSpec { ell: self.ell, m: 1, modulus: self.ell }
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.modulus as i64) as u32
    }

    #[inline]
    pub fn reduce_u64(&self, x: u64) -> u32 {
        (x % self.modulus as u64) as u32
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u32 {
        x.rem_euclid(self.modulus as i128) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let m = self.modulus as u64;
        (if s >= m { s - m } else { s }) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.modulus as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.modulus as u64) as u32
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.modulus;
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: u32) -> bool {
        a % self.ell != 0
    }

    /// ℓ-adic valuation of a residue, capped at m (the valuation of zero).
    pub fn valuation(&self, a: u32) -> u32 {
        if a == 0 {
            return self.m;
        }
        let mut v = 0;
        let mut x = a;
        while x % self.ell == 0 {
            x /= self.ell;
            v += 1;
        }
        v
    }

    /// ℓ^e as a residue (zero once e ≥ m).
    pub fn ell_pow(&self, e: u32) -> u32 {
        if e >= self.m {
            0
        } else {
            self.ell.pow(e)
        }
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        res_inv(a as i64, *self)
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.ell, self.m)
    }
}

/// Inverse of `a` modulo ℓᵐ.
pub fn res_inv(a: i64, ring: RingSpec) -> Result<u32> {
    let n = ring.modulus() as i64;
    let x = a.rem_euclid(n);
    if x % ring.ell() as i64 == 0 {
        return Err(Error::NotAUnit(a));
    }
    let (mut r0, mut r1) = (n, x);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    Ok(t0.rem_euclid(n) as u32)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Floor division for a positive divisor.
#[inline]
pub fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// Ceiling division for a positive divisor.
#[inline]
pub fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// The Kronecker symbol (a / n).
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        n >>= twos;
    }
    // Jacobi symbol (a / n) for odd positive n.
    let mut a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// χ₁₂(n) = (12 / n).
pub fn chi12(n: i64) -> i32 {
    kronecker(12, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi12_rule(n: i64) -> i32 {
        match n.rem_euclid(12) {
            1 | 11 => 1,
            5 | 7 => -1,
            _ => 0,
        }
    }

    #[test]
    fn inverse_examples() {
        let r5 = RingSpec::new(5, 1).unwrap();
        assert_eq!(res_inv(1, r5).unwrap(), 1);
        assert_eq!(res_inv(24, r5).unwrap(), 4);
        let r169 = RingSpec::new(13, 2).unwrap();
        assert_eq!(res_inv(24, r169).unwrap(), 162);
        assert_eq!(res_inv(26, r169), Err(Error::NotAUnit(26)));
    }

    #[test]
    fn inverse_is_inverse() {
        let r = RingSpec::new(7, 3).unwrap();
        for a in 1..343u32 {
            match r.inv(a) {
                Ok(u) => assert_eq!(r.mul(a, u), 1),
                Err(_) => assert_eq!(a % 7, 0),
            }
        }
    }

    #[test]
    fn ring_validation() {
        assert_eq!(RingSpec::new(99, 1), Err(Error::NotPrime(99)));
        assert!(matches!(RingSpec::new(3, 1), Err(Error::PrimeTooSmall { .. })));
        assert!(matches!(RingSpec::new(37, 7), Err(Error::ModulusTooLarge { .. })));
        assert_eq!(RingSpec::new(37, 4).unwrap().modulus(), 1_874_161);
    }

    #[test]
    fn chi12_matches_rule() {
        assert_eq!(chi12(11), 1);
        assert_eq!(chi12(5), -1);
        assert_eq!(chi12(6), 0);
        for n in -200..200 {
            assert_eq!(chi12(n), chi12_rule(n), "n = {n}");
        }
    }

    #[test]
    fn kronecker_is_legendre_for_odd_primes() {
        for p in [5i64, 7, 11, 13, 17] {
            for a in -40i64..40 {
                let euler = {
                    let x = a.rem_euclid(p);
                    if x == 0 {
                        0
                    } else {
                        let mut acc = 1i64;
                        for _ in 0..(p - 1) / 2 {
                            acc = acc * x % p;
                        }
                        if acc == 1 { 1 } else { -1 }
                    }
                };
                assert_eq!(kronecker(a, p), euler, "({a}/{p})");
            }
        }
    }

    #[test]
    fn valuation_and_divs() {
        let r = RingSpec::new(5, 3).unwrap();
        assert_eq!(r.valuation(0), 3);
        assert_eq!(r.valuation(50), 2);
        assert_eq!(r.valuation(7), 0);
        assert_eq!(ceil_div(-7, 3), -2);
        assert_eq!(floor_div(-7, 3), -3);
        assert_eq!(ceil_div(7, 3), 3);
    }
}
