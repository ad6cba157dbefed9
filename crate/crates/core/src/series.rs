//! Truncated Laurent series over Z/ℓᵐZ with exponents measured in 24ths.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ntt;
use crate::ring::{ceil_div, gcd, RingSpec};

/// A truncated series `Σ c_k q^{(offset24 + k·step24)/24}`.
///
/// Every exponent strictly below `prec24` is known: either it is a stored
/// grid point, or it lies off the grid or below `offset24`, where the
/// coefficient is zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidueSeries {
    ring: RingSpec,
    offset24: i64,
    step24: i64,
    coeffs: Vec<u32>,
    prec24: i64,
}

/// Number of grid points `offset + k·step` strictly below `prec`.
fn grid_len(offset24: i64, step24: i64, prec24: i64) -> usize {
    if prec24 <= offset24 {
        0
    } else {
        ceil_div(prec24 - offset24, step24) as usize
    }
}

impl ResidueSeries {
    /// Builds a series from stored grid values. `coeffs` may be shorter than
    /// the grid only if `pad` is set, in which case the tail is taken as zero.
    fn build(
        ring: RingSpec,
        offset24: i64,
        step24: i64,
        mut coeffs: Vec<u32>,
        prec24: i64,
        pad: bool,
    ) -> Result<Self> {
        if step24 <= 0 {
            return Err(Error::Invalid(format!("step24 must be positive, got {step24}")));
        }
        let len = grid_len(offset24, step24, prec24);
        if coeffs.len() > len {
            coeffs.truncate(len);
        } else if coeffs.len() < len {
            if !pad {
                return Err(Error::Invalid(format!(
                    "expected {len} coefficients below prec24 {prec24}, got {}",
                    coeffs.len()
                )));
            }
            coeffs.resize(len, 0);
        }
        let m = ring.modulus();
        if coeffs.iter().any(|&c| c >= m) {
            return Err(Error::Invalid("coefficient not reduced".into()));
        }
        Ok(ResidueSeries { ring, offset24, step24, coeffs, prec24 })
    }

    /// A series from reduced residues filling the grid below `prec24`.
    pub fn new(ring: RingSpec, offset24: i64, step24: i64, coeffs: Vec<u32>, prec24: i64) -> Result<Self> {
        Self::build(ring, offset24, step24, coeffs, prec24, false)
    }

    /// An exact finite sum, known to any precision `prec24`.
    pub fn from_poly(ring: RingSpec, offset24: i64, step24: i64, coeffs: &[i64], prec24: i64) -> Result<Self> {
        let c = coeffs.iter().map(|&x| ring.reduce(x)).collect();
        Self::build(ring, offset24, step24, c, prec24, true)
    }

    /// Integer-q series `Σ coeffs[n] qⁿ` known for n < `prec`.
    pub fn integral(ring: RingSpec, coeffs: Vec<u32>, prec: i64) -> Result<Self> {
        Self::build(ring, 0, 24, coeffs, 24 * prec, false)
    }

    /// Exact integer-q polynomial, known for n < `prec`.
    pub fn integral_poly(ring: RingSpec, coeffs: &[i64], prec: i64) -> Result<Self> {
        Self::from_poly(ring, 0, 24, coeffs, 24 * prec)
    }

    pub fn zero(ring: RingSpec, prec24: i64) -> Self {
        let len = grid_len(0, 24, prec24);
        ResidueSeries { ring, offset24: 0, step24: 24, coeffs: vec![0; len], prec24 }
    }

    pub fn one(ring: RingSpec, prec24: i64) -> Self {
        let mut s = Self::zero(ring, prec24);
        if let Some(c) = s.coeffs.first_mut() {
            *c = 1 % ring.modulus();
        }
        s
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn offset24(&self) -> i64 {
        self.offset24
    }

    pub fn step24(&self) -> i64 {
        self.step24
    }

    pub fn prec24(&self) -> i64 {
        self.prec24
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent (24ths) of stored slot `k`.
    pub fn exponent24(&self, k: usize) -> i64 {
        self.offset24 + k as i64 * self.step24
    }

    /// Coefficient of q^{e/24}; `None` if the exponent is at or beyond precision.
    pub fn coeff(&self, e24: i64) -> Option<u32> {
        if e24 >= self.prec24 {
            return None;
        }
        if e24 < self.offset24 || (e24 - self.offset24) % self.step24 != 0 {
            return Some(0);
        }
        Some(self.coeffs[((e24 - self.offset24) / self.step24) as usize])
    }

    /// Coefficient of qⁿ.
    pub fn coeff_int(&self, n: i64) -> Option<u32> {
        self.coeff(24 * n)
    }

    /// Whether all support lies on integer exponents.
    pub fn has_integral_grid(&self) -> bool {
        self.offset24 % 24 == 0 && self.step24 % 24 == 0
    }

    /// Number of integer exponents known (n < result).
    pub fn integral_prec(&self) -> i64 {
        ceil_div(self.prec24, 24)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Nonzero terms as (exponent24, residue).
    pub fn terms(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(k, &c)| (self.exponent24(k), c))
    }

    /// Drops leading zero slots, raising `offset24`.
    pub fn normalized(&self) -> Self {
        let lead = self.coeffs.iter().position(|&c| c != 0).unwrap_or(self.coeffs.len());
        ResidueSeries {
            ring: self.ring,
            offset24: self.offset24 + lead as i64 * self.step24,
            step24: self.step24,
            coeffs: self.coeffs[lead..].to_vec(),
            prec24: self.prec24,
        }
    }

    /// Re-expresses the series on grid `step24`, which must either divide
    /// the current step or leave all nonzero terms on the new grid.
    pub fn regrid(&self, step24: i64) -> Result<Self> {
        if step24 <= 0 {
            return Err(Error::Invalid("nonpositive step".into()));
        }
        if step24 == self.step24 {
            return Ok(self.clone());
        }
        let len = grid_len(self.offset24, step24, self.prec24);
        let mut out = vec![0u32; len];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let d = k as i64 * self.step24;
            if d % step24 != 0 {
                if c != 0 {
                    return Err(Error::Invalid(format!("term at offset {d} is off grid {step24}")));
                }
                continue;
            }
            out[(d / step24) as usize] = c;
        }
        Ok(ResidueSeries { coeffs: out, step24, ..self.clone() })
    }

    /// The series on the integer grid (offset and step multiples of 24).
    pub fn to_integral(&self) -> Result<Self> {
        if self.has_integral_grid() {
            return if self.step24 == 24 { Ok(self.clone()) } else { self.regrid(24) };
        }
        let s = self.normalized();
        if s.coeffs.is_empty() {
            let off = 24 * ceil_div(s.offset24, 24);
            let len = grid_len(off, 24, s.prec24);
            return Ok(ResidueSeries { ring: s.ring, offset24: off, step24: 24, coeffs: vec![0; len], prec24: s.prec24 });
        }
        if s.offset24 % 24 != 0 {
            return Err(Error::FractionalSupport);
        }
        s.regrid(24).map_err(|_| Error::FractionalSupport)
    }

    /// Dense coefficients of qⁿ for n in [start, start+len).
    pub fn window(&self, start: i64, len: usize) -> Result<Vec<u32>> {
        let end = start + len as i64;
        if 24 * (end - 1) >= self.prec24 && len > 0 {
            return Err(Error::InsufficientPrecision { needed: 24 * end, available: self.prec24 });
        }
        Ok((start..end).map(|n| self.coeff_int(n).unwrap_or(0)).collect())
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        Ok(())
    }

    /// Truncates to a lower precision.
    pub fn truncate(&self, prec24: i64) -> Result<Self> {
        if prec24 > self.prec24 {
            return Err(Error::InsufficientPrecision { needed: prec24, available: self.prec24 });
        }
        let len = grid_len(self.offset24, self.step24, prec24);
        Ok(ResidueSeries { coeffs: self.coeffs[..len].to_vec(), prec24, ..self.clone() })
    }

    /// Reduction to Z/ℓ^{m'}Z for m' ≤ m.
    pub fn reduce_power(&self, m: u32) -> Result<Self> {
        let ring = self.ring.with_power(m)?;
        if m > self.ring.m() {
            return Err(Error::Invalid(format!("cannot lift from {} to {}", self.ring, ring)));
        }
        let coeffs = self.coeffs.iter().map(|&c| c % ring.modulus()).collect();
        Ok(ResidueSeries { ring, coeffs, ..self.clone() })
    }

    /// Multiplication by q^{delta/24}.
    pub fn shift(&self, delta24: i64) -> Self {
        ResidueSeries {
            offset24: self.offset24 + delta24,
            prec24: self.prec24 + delta24,
            ..self.clone()
        }
    }

    /// The substitution q ↦ q^t.
    pub fn dilate(&self, t: u32) -> Self {
        let t = t as i64;
        ResidueSeries {
            ring: self.ring,
            offset24: self.offset24 * t,
            step24: self.step24 * t,
            coeffs: self.coeffs.clone(),
            prec24: self.prec24 * t,
        }
    }

    pub fn scale(&self, c: u32) -> Self {
        let r = self.ring;
        ResidueSeries {
            coeffs: self.coeffs.iter().map(|&x| r.mul(x, c)).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        let r = self.ring;
        ResidueSeries { coeffs: self.coeffs.iter().map(|&x| r.neg(x)).collect(), ..self.clone() }
    }

    fn combine(&self, other: &Self, f: impl Fn(u32, u32) -> u32) -> Result<Self> {
        self.check_ring(other)?;
        let prec24 = self.prec24.min(other.prec24);
        let offset24 = self.offset24.min(other.offset24);
        let step24 = gcd(gcd(self.step24, other.step24), self.offset24 - other.offset24);
        let len = grid_len(offset24, step24, prec24);
        let mut out = vec![0u32; len];
        for (k, slot) in out.iter_mut().enumerate() {
            let e = offset24 + k as i64 * step24;
            let a = self.coeff(e).unwrap_or(0);
            let b = other.coeff(e).unwrap_or(0);
            *slot = f(a, b);
        }
        Ok(ResidueSeries { ring: self.ring, offset24, step24, coeffs: out, prec24 })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let r = self.ring;
        self.combine(other, |a, b| r.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let r = self.ring;
        self.combine(other, |a, b| r.sub(a, b))
    }

    /// Precision of the exact product of two truncated series.
    pub fn product_prec24(&self, other: &Self) -> i64 {
        (self.prec24 + other.offset24).min(other.prec24 + self.offset24)
    }

    /// Product at its natural precision.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let p = self.product_prec24(other);
        self.mul_to(other, p)
    }

    /// Product truncated at `prec24`, which may not exceed the natural precision.
    pub fn mul_to(&self, other: &Self, prec24: i64) -> Result<Self> {
        self.check_ring(other)?;
        let natural = self.product_prec24(other);
        if prec24 > natural {
            return Err(Error::InsufficientPrecision { needed: prec24, available: natural });
        }
        let step = gcd(self.step24, other.step24);
        let offset24 = self.offset24 + other.offset24;
        let len = grid_len(offset24, step, prec24);
        let spread = |s: &Self| -> Vec<u32> {
            let f = (s.step24 / step) as usize;
            if f == 1 {
                return s.coeffs[..s.coeffs.len().min(len)].to_vec();
            }
            let n = s.coeffs.len().saturating_sub(1) * f + 1;
            let n = n.min(len);
            let mut v = vec![0u32; n];
            for (k, &c) in s.coeffs.iter().enumerate() {
                let i = k * f;
                if i >= n {
                    break;
                }
                v[i] = c;
            }
            v
        };
        let coeffs = if len == 0 {
            Vec::new()
        } else {
            ntt::convolve(&spread(self), &spread(other), self.ring.modulus(), len)
        };
        Ok(ResidueSeries { ring: self.ring, offset24, step24: step, coeffs, prec24 })
    }

    /// Multiplicative inverse known up to `prec24`.
    ///
    /// The leading stored slot is taken as the leading term; zero slots in
    /// front are skipped first.
    pub fn inv_to(&self, prec24: i64) -> Result<Self> {
        let s = self.normalized();
        let lead = *s.coeffs.first().ok_or(Error::LeadingNotUnit)?;
        if !s.ring.is_unit(lead) {
            return Err(Error::LeadingNotUnit);
        }
        // f = q^o · g(q^step), 1/f = q^{-o} · (1/g)(q^step)
        let out_off = -s.offset24;
        let n = grid_len(out_off, s.step24, prec24);
        // g is known to (s.prec24 - s.offset24)/step slots, which bounds 1/g
        let avail = s.coeffs.len();
        if n > avail {
            let available = out_off + avail as i64 * s.step24;
            return Err(Error::InsufficientPrecision { needed: prec24, available });
        }
        let g = inv_dense(&s.coeffs, n, s.ring)?;
        Ok(ResidueSeries { ring: s.ring, offset24: out_off, step24: s.step24, coeffs: g, prec24 })
    }

    /// Inverse at the natural precision.
    pub fn inv(&self) -> Result<Self> {
        let s = self.normalized();
        let p = s.prec24 - 2 * s.offset24;
        s.inv_to(p)
    }

    /// `self^e` at the natural precision.
    pub fn pow(&self, e: u64) -> Result<Self> {
        if e == 0 {
            return Ok(ResidueSeries::one(self.ring, self.prec24 - self.offset24));
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base)?;
        }
        Ok(acc.expect("e > 0"))
    }

    /// `self^e` truncated at `prec24`.
    pub fn pow_to(&self, e: u64, prec24: i64) -> Result<Self> {
        if e == 0 {
            return Ok(ResidueSeries::one(self.ring, prec24));
        }
        // Work with the unit part so truncation stays simple.
        let s = self.normalized();
        let shift = s.offset24 * e as i64;
        let unit = s.shift(-s.offset24);
        let need = prec24 - shift;
        let unit = if unit.prec24 > need { unit.truncate(need.max(0))? } else { unit };
        let mut base = unit;
        let mut acc: Option<Self> = None;
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => {
                        let p = a.product_prec24(&base).min(need);
                        a.mul_to(&base, p)?
                    }
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            let p = base.product_prec24(&base).min(need);
            base = base.mul_to(&base, p)?;
        }
        let out = acc.expect("e > 0").shift(shift);
        if out.prec24 < prec24 {
            return Err(Error::InsufficientPrecision { needed: prec24, available: out.prec24 });
        }
        out.truncate(prec24)
    }
}

/// Newton iteration for the inverse of a dense power series with unit constant term.
fn inv_dense(f: &[u32], n: usize, ring: RingSpec) -> Result<Vec<u32>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = ring.modulus();
    let mut g = vec![ring.inv(f[0])?];
    let mut cur = 1usize;
    while cur < n {
        let next = (2 * cur).min(n);
        // g <- g (2 - f g)
        let fg = ntt::convolve(&f[..next.min(f.len())], &g, m, next);
        let mut t: Vec<u32> = fg.iter().map(|&x| ring.neg(x)).collect();
        t[0] = ring.add(t[0], 2 % m);
        g = ntt::convolve(&g, &t, m, next);
        cur = next;
    }
    Ok(g)
}

/// Two series are equal when they have the same ring, the same precision
/// and the same coefficients, whatever grid they are stored on.
impl PartialEq for ResidueSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.prec24 == other.prec24 && self.terms().eq(other.terms())
    }
}

impl Eq for ResidueSeries {}

impl fmt::Display for ResidueSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms().take(12) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e % 24 == 0 {
                write!(f, "{c}q^{}", e / 24)?;
            } else {
                write!(f, "{c}q^({e}/24)")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^({}/24)) mod {}", self.prec24, self.ring.modulus())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(l: u32, m: u32) -> RingSpec {
        RingSpec::new(l, m).unwrap()
    }

    fn euler_naive(n: usize, r: RingSpec) -> ResidueSeries {
        let mut c = vec![0i64; n];
        c[0] = 1;
        for k in 1..n {
            for i in (k..n).rev() {
                c[i] -= c[i - k];
            }
        }
        ResidueSeries::integral_poly(r, &c, n as i64).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let r = ring(7, 1);
        let a = ResidueSeries::integral_poly(r, &[1, 1], 10).unwrap();
        let b = ResidueSeries::integral_poly(r, &[1, -1], 10).unwrap();
        let c = a.mul_to(&b, 240).unwrap();
        assert_eq!(c, ResidueSeries::integral_poly(r, &[1, 0, -1], 10).unwrap());
    }

    #[test]
    fn euler_times_inverse_is_one() {
        let r = ring(13, 2);
        let e = euler_naive(300, r);
        let p = e.inv().unwrap();
        assert_eq!(p.coeff_int(4), Some(5));
        assert_eq!(e.mul(&p).unwrap(), ResidueSeries::one(r, 300 * 24));
    }

    #[test]
    fn geometric_inverse() {
        let r = ring(5, 1);
        let f = ResidueSeries::integral_poly(r, &[1, -1], 50).unwrap();
        let g = f.inv().unwrap();
        assert!(g.coeffs().iter().all(|&c| c == 1));
        assert_eq!(g.integral_prec(), 50);
    }

    #[test]
    fn inverse_is_involution() {
        let r = ring(7, 1);
        let f = ResidueSeries::integral_poly(r, &[1, 3, 0, 1], 40).unwrap();
        assert_eq!(f.inv().unwrap().inv().unwrap(), f);
    }

    #[test]
    fn inverse_of_shifted_series() {
        let r = ring(5, 2);
        let f = ResidueSeries::from_poly(r, 3, 24, &[2, 1, 4], 24 * 20).unwrap();
        let g = f.inv().unwrap();
        assert_eq!(g.offset24(), -3);
        let one = f.mul(&g).unwrap().to_integral().unwrap();
        assert_eq!(one.coeffs()[0], 1);
        assert!(one.coeffs()[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn leading_non_unit_rejected() {
        let r = ring(5, 1);
        let f = ResidueSeries::integral_poly(r, &[5, 1], 10).unwrap();
        // 5 ≡ 0 mod 5, so the leading term is q
        assert_eq!(f.inv().unwrap().offset24(), -24);
        let r2 = ring(5, 2);
        let g = ResidueSeries::integral_poly(r2, &[5, 1], 10).unwrap();
        assert_eq!(g.inv(), Err(Error::LeadingNotUnit));
    }

    #[test]
    fn power_examples() {
        let r = ring(11, 1);
        let e = euler_naive(60, r);
        assert_eq!(e.pow(0).unwrap().coeff_int(0), Some(1));
        let e2 = e.pow(2).unwrap();
        assert_eq!(e2.coeff_int(2), Some(10));
        assert_eq!(e.pow_to(2, 24 * 60).unwrap(), e2);
        let e24 = e.shift(1).pow_to(24, 24 * 30).unwrap();
        assert_eq!(e24.offset24(), 24);
    }

    #[test]
    fn dilation() {
        let r = ring(5, 1);
        let a = ResidueSeries::integral_poly(r, &[1, 1], 10).unwrap();
        let d = a.dilate(3);
        assert_eq!(d.coeff_int(3), Some(1));
        assert_eq!(d.coeff_int(1), Some(0));
        assert_eq!(d.integral_prec(), 30);
        assert_eq!(a.dilate(2).dilate(3), a.dilate(6));
    }

    #[test]
    fn mixed_grid_product() {
        let r = ring(7, 1);
        let a = ResidueSeries::from_poly(r, 1, 24, &[1, 1], 24 * 10 + 1).unwrap();
        let b = ResidueSeries::from_poly(r, -1, 24, &[1, 2], 24 * 10 - 1).unwrap();
        let c = a.mul(&b).unwrap();
        assert_eq!(c.offset24(), 0);
        assert_eq!(c.prec24(), 240);
        let c = c.to_integral().unwrap();
        assert_eq!(&c.coeffs()[..3], &[1, 3, 2]);
    }

    #[test]
    fn truncation_checks() {
        let r = ring(5, 1);
        let a = ResidueSeries::integral_poly(r, &[1, 2, 3], 5).unwrap();
        assert!(a.truncate(24 * 6).is_err());
        assert_eq!(a.truncate(48).unwrap().len(), 2);
        assert!(a.window(0, 6).is_err());
        assert_eq!(a.window(1, 3).unwrap(), vec![2, 3, 0]);
    }

    #[test]
    fn fractional_support_detected() {
        let r = ring(5, 1);
        let a = ResidueSeries::from_poly(r, 1, 24, &[1], 100).unwrap();
        assert_eq!(a.to_integral(), Err(Error::FractionalSupport));
        let b = ResidueSeries::from_poly(r, 0, 12, &[1, 0, 3], 100).unwrap();
        assert_eq!(b.to_integral().unwrap().coeff_int(1), Some(3));
    }
}
