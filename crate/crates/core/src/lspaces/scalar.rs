use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{k_spt, LiftedTower};
use crate::error::{Error, Result};
use crate::operators::{hecke_half, Character};
use crate::partitions::{extract_from_level, p_series_direct, PSeries, TowerKind};
use crate::ring::RingSpec;
use crate::series::ResidueSeries;

/// f ≡ C·g modulo ℓᵐ, with C determined modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarRelation {
    pub c: u32,
    /// C is unique modulo this power of ℓ (ℓᵐ when g has a unit coefficient).
    pub modulus: u32,
    pub unique: bool,
    /// Both sides vanish on the window; C = 0 is reported by convention.
    pub degenerate: bool,
    /// Number of coefficients compared.
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ScalarOutcome {
    Scalar(ScalarRelation),
    NoScalar { first_mismatch: Option<usize> },
}

impl ScalarOutcome {
    pub fn scalar(&self) -> Option<&ScalarRelation> {
        match self {
            ScalarOutcome::Scalar(s) => Some(s),
            ScalarOutcome::NoScalar { .. } => None,
        }
    }
}

/// Solves f ≡ C·g on aligned coefficient vectors.
pub fn scalar_relation_vec(f: &[u32], g: &[u32], ring: RingSpec) -> ScalarOutcome {
    let n = f.len().min(g.len());
    let (f, g) = (&f[..n], &g[..n]);
    let m = ring.m();
    let Some((i, v)) = g.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, ring.valuation(x))).min_by_key(|&(_, v)| v)
    else {
        return if f.iter().all(|&x| x == 0) {
            ScalarOutcome::Scalar(ScalarRelation { c: 0, modulus: 1, unique: false, degenerate: true, checked: n })
        } else {
            ScalarOutcome::NoScalar { first_mismatch: f.iter().position(|&x| x != 0) }
        };
    };
    let pv = ring.ell_pow(v);
    if f[i] % pv != 0 {
        return ScalarOutcome::NoScalar { first_mismatch: Some(i) };
    }
    let sub = ring.with_power(m - v).expect("v < m for a nonzero residue");
    let gi = sub.reduce_u64((g[i] / pv) as u64);
    let fi = sub.reduce_u64((f[i] / pv) as u64);
    let c = sub.mul(fi, sub.inv(gi).expect("unit part"));
    match (0..n).find(|&k| f[k] != ring.mul(c, g[k])) {
        Some(k) => ScalarOutcome::NoScalar { first_mismatch: Some(k) },
        None => ScalarOutcome::Scalar(ScalarRelation { c, modulus: sub.modulus(), unique: v == 0, degenerate: false, checked: n }),
    }
}

/// Coefficient pairs of two series at every exponent both determine.
fn aligned(f: &ResidueSeries, g: &ResidueSeries) -> Result<(Vec<u32>, Vec<u32>)> {
    if f.ring() != g.ring() {
        return Err(Error::RingMismatch(f.ring().to_string(), g.ring().to_string()));
    }
    let prec = f.prec24().min(g.prec24());
    let exps: BTreeSet<i64> = f.terms().chain(g.terms()).map(|(e, _)| e).filter(|&e| e < prec).collect();
    let at = |s: &ResidueSeries, e: i64| s.coeff(e).unwrap_or(0);
    Ok(exps.iter().map(|&e| (at(f, e), at(g, e))).unzip())
}

/// Finds C with f ≡ C·g below the smaller of the two precisions.
pub fn scalar_relation(f: &ResidueSeries, g: &ResidueSeries) -> Result<ScalarOutcome> {
    let (a, b) = aligned(f, g)?;
    Ok(scalar_relation_vec(&a, &b, f.ring()))
}

/// Result of testing P(24z) against a Hecke operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenResult {
    pub c: u32,
    /// Weight is λ + 1/2.
    pub lambda: u32,
    pub chi: Character,
    pub outcome: ScalarOutcome,
    /// Image of P(24z) under the operator.
    pub image: ResidueSeries,
    /// Coefficients of P(24z) that are units in the compared window.
    pub unit_coefficients: usize,
}

/// Minimum number of unit coefficients for an eigenvalue fit to count.
pub const MIN_UNITS: usize = 5;

/// Grid points that must vanish before P(24z) is reported as zero.
pub const MIN_ZERO_WINDOW: usize = 40;

/// Applies T(c²) of weight λ + 1/2 to P(24z) and fits the eigenvalue.
///
/// Fails with `InsufficientPrecision` when the window holds fewer than
/// [`MIN_UNITS`] unit coefficients of P(24z), unless P(24z) vanishes there.
pub fn hecke_eigenvalue(p: &PSeries, c: u32, lambda: u32, chi: Character) -> Result<EigenResult> {
    let f = p.rescaled_24z().to_integral()?;
    let image = hecke_half(&f, c, lambda, chi)?;
    let base = f.truncate(image.prec24())?;
    let ring = f.ring();
    let units = base.terms().filter(|&(_, x)| ring.is_unit(x)).count();
    // a vanishing window counts as a degenerate relation once it is wide enough
    if units < MIN_UNITS && !(base.is_zero() && base.len() >= MIN_ZERO_WINDOW) {
        let have = image.prec24();
        return Err(Error::InsufficientPrecision { needed: have * 2, available: have });
    }
    let outcome = scalar_relation(&image, &base)?;
    Ok(EigenResult { c, lambda, chi, outcome, image, unit_coefficients: units })
}

/// Nebentypus of P_ℓ(spt, b; 24z): χ₁₂ on even levels, χ₁₂·(ℓ/·) on odd ones.
pub fn spt_character(ell: u32, b: u32) -> Character {
    if b % 2 == 0 {
        Character::CHI12
    } else {
        Character::Kronecker(12 * ell as i64)
    }
}

/// Eigenvalue of T(c²) on P_ℓ(spt, b; 24z) computed from spt values,
/// doubling the window until enough unit coefficients are available.
/// `slots` is the number of output coefficients wanted.
///
/// The weight is k(spt, m) − 1/2 with nebentypus [`spt_character`].
pub fn hecke_eigenvalue_direct(ring: RingSpec, b: u32, c: u32, slots: usize) -> Result<(PSeries, EigenResult)> {
    let lambda = k_spt(ring.ell(), ring.m()) - 1;
    let mut slots = (c as usize).pow(2) * slots.max(1) + 1;
    for _ in 0..6 {
        let p = p_series_direct(TowerKind::Spt, ring, b, slots)?;
        match hecke_eigenvalue(&p, c, lambda, spt_character(ring.ell(), b)) {
            Err(Error::InsufficientPrecision { .. }) => slots *= 2,
            other => return other.map(|e| (p, e)),
        }
    }
    Err(Error::InsufficientPrecision { needed: 24 * slots as i64, available: 24 * (slots / 2) as i64 })
}

/// Eigenvalue of T(c²) of weight λ + 1/2 on P(b; 24z) read off a lifted
/// tower. `slots` is the number of output coefficients wanted.
pub fn hecke_eigenvalue_lifted(
    tower: &mut LiftedTower,
    b: u32,
    c: u32,
    lambda: u32,
    chi: Character,
    slots: usize,
) -> Result<(PSeries, EigenResult)> {
    let kind = tower.kind();
    let mut prec = (c as i64 * c as i64 * slots.max(1) as i64 + 1).max(8);
    for _ in 0..6 {
        let level = tower.level_series(b, prec)?;
        let p = extract_from_level(kind, &level, b)?;
        match hecke_eigenvalue(&p, c, lambda, chi) {
            Err(Error::InsufficientPrecision { .. }) => prec *= 2,
            other => return other.map(|e| (p, e)),
        }
    }
    Err(Error::InsufficientPrecision { needed: 24 * prec, available: 12 * prec })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(l: u32, m: u32) -> RingSpec {
        RingSpec::new(l, m).unwrap()
    }

    #[test]
    fn unit_scalar() {
        let r = ring(13, 1);
        let g = vec![1, 4, 1, 0, 7];
        let f: Vec<u32> = g.iter().map(|&x| r.mul(10, x)).collect();
        let s = scalar_relation_vec(&f, &g, r);
        assert_eq!(s.scalar().unwrap().c, 10);
        assert!(s.scalar().unwrap().unique);
    }

    #[test]
    fn non_unit_scalar_is_flagged() {
        let r = ring(5, 2);
        let g = vec![0, 5, 10];
        let f = vec![0, 15, 5];
        let s = scalar_relation_vec(&f, &g, r);
        let rel = s.scalar().unwrap();
        assert_eq!((rel.c, rel.modulus, rel.unique), (3, 5, false));
    }

    #[test]
    fn degenerate_and_failures() {
        let r = ring(7, 1);
        assert!(scalar_relation_vec(&[0, 0], &[0, 0], r).scalar().unwrap().degenerate);
        assert_eq!(scalar_relation_vec(&[1, 0], &[0, 0], r), ScalarOutcome::NoScalar { first_mismatch: Some(0) });
        assert_eq!(scalar_relation_vec(&[1, 1], &[1, 2], r), ScalarOutcome::NoScalar { first_mismatch: Some(1) });
        // f has lower valuation than g
        assert_eq!(scalar_relation_vec(&[1], &[0], ring(7, 2)), ScalarOutcome::NoScalar { first_mismatch: Some(0) });
        assert_eq!(scalar_relation_vec(&[1, 7], &[7, 0], ring(7, 2)), ScalarOutcome::NoScalar { first_mismatch: Some(0) });
    }

    #[test]
    fn series_alignment_uses_common_exponents() {
        let r = ring(11, 1);
        let f = ResidueSeries::from_poly(r, -1, 24, &[4, 7, 7], 24 * 5).unwrap();
        let g = ResidueSeries::from_poly(r, -1, 12, &[4, 0, 7, 0, 7], 24 * 3).unwrap();
        let s = scalar_relation(&f, &g).unwrap();
        assert_eq!(s.scalar().unwrap().c, 1);
        assert_eq!(s.scalar().unwrap().checked, 3);
    }
}
