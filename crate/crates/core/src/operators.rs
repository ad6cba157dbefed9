//! U(ℓ), D_r(ℓ), X_r(ℓ), Y_r(ℓ) and Hecke operators on q-series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::phi_ell;
use crate::ring::{ceil_div, is_prime, kronecker, RingSpec};
use crate::series::ResidueSeries;

/// A Dirichlet character given by a Kronecker symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Character {
    Trivial,
    /// n ↦ (d / n)
    Kronecker(i64),
}

impl Character {
    pub const CHI12: Character = Character::Kronecker(12);

    pub fn value(&self, n: i64) -> i32 {
        match self {
            Character::Trivial => 1,
            Character::Kronecker(d) => kronecker(*d, n),
        }
    }
}

/// A named operator with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorTag {
    U { ell: u32 },
    D { ell: u32, r: u32 },
    X { ell: u32, r: u32 },
    Y { ell: u32, r: u32 },
    Hecke { c: u32, k: u32, chi: Character },
    HeckeHalf { c: u32, lambda: u32, chi: Character },
}

impl OperatorTag {
    /// Applies the operator at the natural output precision.
    pub fn apply(&self, f: &ResidueSeries) -> Result<ResidueSeries> {
        match *self {
            OperatorTag::U { ell } => u_ell(f, ell),
            OperatorTag::D { ell, r } => d_r(f, ell, r),
            OperatorTag::X { ell, r } => x_r(f, ell, r),
            OperatorTag::Y { ell, r } => y_r(f, ell, r),
            OperatorTag::Hecke { c, k, chi } => hecke_integral(f, c, k, chi),
            OperatorTag::HeckeHalf { c, lambda, chi } => hecke_half(f, c, lambda, chi),
        }
    }
}

fn integral(f: &ResidueSeries) -> Result<(ResidueSeries, i64)> {
    let g = f.to_integral()?;
    let start = g.offset24() / 24;
    Ok((g, start))
}

/// Σ a(n)qⁿ ↦ Σ a(ℓn)qⁿ. The output is known for n < ⌈N/ℓ⌉ when the input
/// is known for n < N.
pub fn u_ell(f: &ResidueSeries, ell: u32) -> Result<ResidueSeries> {
    if ell == 0 {
        return Err(Error::Invalid("U(0)".into()));
    }
    let (g, start) = integral(f)?;
    let ell = ell as i64;
    let n_prec = g.integral_prec();
    let out_start = ceil_div(start, ell);
    let out_prec = ceil_div(n_prec, ell);
    let len = (out_prec - out_start).max(0) as usize;
    let coeffs = (0..len)
        .map(|k| g.coeff_int(ell * (out_start + k as i64)).expect("within precision"))
        .collect();
    ResidueSeries::new(g.ring(), 24 * out_start, 24, coeffs, 24 * out_prec.max(out_start))
}

/// f ↦ (f·Φ_ℓ^r)|U(ℓ) with a caller-supplied expansion of Φ_ℓ^r.
pub fn d_r_with(f: &ResidueSeries, phi_r: &ResidueSeries, ell: u32) -> Result<ResidueSeries> {
    let (g, _) = integral(f)?;
    let prod = g.mul(phi_r)?;
    u_ell(&prod, ell)
}

/// Precision of Φ_ℓ^r that makes f·Φ_ℓ^r as precise as f allows.
pub fn phi_prec_for(f: &ResidueSeries, r: u32, ell: u32) -> i64 {
    let v24 = r as i64 * (ell as i64 * ell as i64 - 1);
    // product precision is min(P_f + v, P_phi + o_f)
    f.prec24() + v24 - f.offset24()
}

/// f ↦ (f·Φ_ℓ^r)|U(ℓ).
pub fn d_r(f: &ResidueSeries, ell: u32, r: u32) -> Result<ResidueSeries> {
    let (g, _) = integral(f)?;
    let ring = g.ring();
    if ring.ell() != ell {
        return Err(Error::Invalid(format!("D_r({ell}) applied over {ring}")));
    }
    let p = phi_prec_for(&g, r, ell);
    let phi = phi_ell(ring, r, p)?.series;
    d_r_with(&g, &phi, ell)
}

/// X_r = U(ℓ) then D_r(ℓ).
pub fn x_r(f: &ResidueSeries, ell: u32, r: u32) -> Result<ResidueSeries> {
    d_r(&u_ell(f, ell)?, ell, r)
}

/// Y_r = D_r(ℓ) then U(ℓ).
pub fn y_r(f: &ResidueSeries, ell: u32, r: u32) -> Result<ResidueSeries> {
    u_ell(&d_r(f, ell, r)?, ell)
}

fn check_prime(c: u32) -> Result<()> {
    if !is_prime(c as u64) {
        return Err(Error::NotPrime(c as u64));
    }
    Ok(())
}

/// c^e χ(c) mod the ring, with the sign of the character applied.
fn twisted_power(ring: RingSpec, c: u32, e: u64, sign: i32) -> u32 {
    let p = ring.pow(ring.reduce_u64(c as u64), e);
    match sign {
        0 => 0,
        1 => p,
        _ => ring.neg(p),
    }
}

/// Integral-weight Hecke operator T(c): a(nc) + c^{k−1}χ(c)a(n/c).
///
/// The output is known for n < ⌈N/c⌉, so every reported coefficient is exact.
pub fn hecke_integral(f: &ResidueSeries, c: u32, k: u32, chi: Character) -> Result<ResidueSeries> {
    check_prime(c)?;
    if k == 0 {
        return Err(Error::Invalid("weight must be positive".into()));
    }
    let (g, start) = integral(f)?;
    let ring = g.ring();
    let ci = c as i64;
    let back = twisted_power(ring, c, (k - 1) as u64, chi.value(ci));
    let out_prec = ceil_div(g.integral_prec(), ci);
    let out_start = ceil_div(start, ci).min(start * ci).min(start);
    let len = (out_prec - out_start).max(0) as usize;
    let coeffs = (0..len)
        .map(|k| {
            let n = out_start + k as i64;
            let mut x = g.coeff_int(n * ci).unwrap_or(0);
            if n % ci == 0 {
                let y = g.coeff_int(n / ci).unwrap_or(0);
                x = ring.add(x, ring.mul(back, y));
            }
            x
        })
        .collect();
    ResidueSeries::new(ring, 24 * out_start, 24, coeffs, 24 * out_prec.max(out_start))
}

/// Half-integral weight Hecke operator T(c²) for weight λ + 1/2:
/// a(c²n) + c^{λ−1}((−1)^λ n / c)χ(c)a(n) + c^{2λ−1}a(n/c²).
///
/// Applied to a series in integer exponents (the 24z-rescaled form). The
/// output is known for n < ⌈N/c²⌉.
pub fn hecke_half(f: &ResidueSeries, c: u32, lambda: u32, chi: Character) -> Result<ResidueSeries> {
    check_prime(c)?;
    if lambda == 0 {
        return Err(Error::Invalid("lambda must be positive".into()));
    }
    let (g, start) = integral(f)?;
    let ring = g.ring();
    let ci = c as i64;
    let c2 = ci * ci;
    let chi_c = chi.value(ci);
    let mid = twisted_power(ring, c, (lambda - 1) as u64, chi_c);
    let back = twisted_power(ring, c, (2 * lambda - 1) as u64, 1);
    let sign = if lambda % 2 == 0 { 1 } else { -1 };
    let out_prec = ceil_div(g.integral_prec(), c2);
    let out_start = ceil_div(start, c2).min(start * c2).min(start);
    let len = (out_prec - out_start).max(0) as usize;
    let coeffs = (0..len)
        .map(|k| {
            let n = out_start + k as i64;
            let mut x = g.coeff_int(c2 * n).unwrap_or(0);
            let a = g.coeff_int(n).unwrap_or(0);
            if a != 0 {
                let t = match kronecker(sign * n, ci) {
                    0 => 0,
                    1 => mid,
                    _ => ring.neg(mid),
                };
                x = ring.add(x, ring.mul(t, a));
            }
            if n % c2 == 0 {
                let y = g.coeff_int(n / c2).unwrap_or(0);
                x = ring.add(x, ring.mul(back, y));
            }
            x
        })
        .collect();
    ResidueSeries::new(ring, 24 * out_start, 24, coeffs, 24 * out_prec.max(out_start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{delta, euler_series, filtration, Filtration};

    fn ring(l: u32, m: u32) -> RingSpec {
        RingSpec::new(l, m).unwrap()
    }

    #[test]
    fn decimating_geometric_series() {
        let r = ring(5, 1);
        let g = ResidueSeries::integral(r, vec![1; 100], 100).unwrap();
        let u = u_ell(&g, 5).unwrap();
        assert_eq!(u.integral_prec(), 20);
        assert!(u.coeffs().iter().all(|&c| c == 1));
    }

    #[test]
    fn u_commutes_with_dilated_factor() {
        for &l in &[5u32, 7] {
            let r = ring(l, 2);
            let n = 50 * l as i64;
            let e = euler_series(r, 24 * n);
            let d = delta(r, 24 * n).unwrap();
            let lhs = u_ell(&e.truncate(24 * ((n + l as i64 - 1) / l as i64)).unwrap().dilate(l).mul(&d).unwrap(), l).unwrap();
            let rhs = e.mul(&u_ell(&d, l).unwrap()).unwrap();
            let p = lhs.prec24().min(rhs.prec24());
            assert!(p >= 24 * 49);
            assert_eq!(lhs.truncate(p).unwrap(), rhs.truncate(p).unwrap());
        }
    }

    #[test]
    fn fractional_input_rejected() {
        let r = ring(5, 1);
        let f = ResidueSeries::from_poly(r, 1, 24, &[1], 240).unwrap();
        assert_eq!(u_ell(&f, 5), Err(Error::FractionalSupport));
    }

    #[test]
    fn delta_u5_vanishes_mod_5() {
        // τ(5n) ≡ 0 (mod 5), so the filtration is −∞
        let r = ring(5, 1);
        let d = delta(r, 24 * 200).unwrap();
        let u = u_ell(&d, 5).unwrap();
        assert!(u.is_zero());
        assert_eq!(filtration(&u, 12).unwrap(), Filtration::NegInfinity);
    }

    #[test]
    fn d1_of_delta_mod_5() {
        let r = ring(5, 1);
        let d = delta(r, 24 * 200).unwrap();
        let img = d_r(&d, 5, 1).unwrap();
        match filtration(&img, 12).unwrap() {
            Filtration::NegInfinity => {}
            Filtration::Weight(w) => assert!(w <= 6),
        }
    }

    #[test]
    fn one_under_d_is_phi_under_u() {
        let r = ring(13, 1);
        let one = ResidueSeries::one(r, 24 * 500);
        let lhs = d_r(&one, 13, 2).unwrap();
        let phi = phi_ell(r, 2, 24 * 500).unwrap().series;
        let rhs = u_ell(&phi, 13).unwrap();
        assert_eq!(lhs.truncate(rhs.prec24()).unwrap(), rhs);
        // valuation at least ⌈r(ℓ²−1)/(24ℓ)⌉ = 2
        assert_eq!(lhs.normalized().offset24(), 24 * 2);
    }

    #[test]
    fn hecke_t2_on_delta() {
        let r = ring(13, 1);
        let d = delta(r, 24 * 40).unwrap();
        let t = hecke_integral(&d, 2, 12, Character::Trivial).unwrap();
        assert_eq!(t.coeff_int(1), Some(r.reduce(-24)));
        // Δ is an eigenform: T(2)Δ = τ(2)Δ
        assert_eq!(t, d.truncate(t.prec24()).unwrap().scale(r.reduce(-24)));
    }

    #[test]
    fn hecke_half_support_classes() {
        let r = ring(17, 1);
        let coeffs: Vec<u32> = (0..2400).map(|n| if n % 24 == 23 { (n % 17) as u32 } else { 0 }).collect();
        let f = ResidueSeries::integral(r, coeffs, 2400).unwrap();
        let t = hecke_half(&f, 5, 17, Character::CHI12).unwrap();
        assert!(t.terms().all(|(e, _)| (e / 24) % 24 == 23));
        let z = ResidueSeries::zero(r, 2400 * 24);
        assert!(hecke_half(&z, 5, 17, Character::CHI12).unwrap().is_zero());
    }
}
