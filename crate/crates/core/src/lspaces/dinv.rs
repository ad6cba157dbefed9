use serde::{Deserialize, Serialize};

use super::{d_prime_order, k_odd};
use crate::error::{Error, Result};
use crate::forms::{basis_mk, sturm, FormBasis};
use crate::linalg::{stable_image, vec_mat, StableSubspace};
use crate::operators::{d_r, x_r, y_r};
use crate::partitions::TowerKind;
use crate::ring::RingSpec;
use crate::series::ResidueSeries;

/// The mod-ℓ invariants controlling how fast the spans stabilize.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DInvariants {
    pub kind: TowerKind,
    pub ell: u32,
    /// d_ℓ(spt) or d_ℓ(r).
    pub d: u32,
    /// d′_ℓ(r); absent for spt.
    pub d_prime: Option<u32>,
    /// Dimension of the stable subspace reached by odd levels.
    pub stable_dim_odd: usize,
    /// Dimension of the stable subspace reached by even levels (p_r only).
    pub stable_dim_even: Option<usize>,
}

/// Images of the rows of `src` under `op`, as coordinates in `tgt`.
fn images(
    src: &FormBasis,
    rows: impl Iterator<Item = usize>,
    tgt: &FormBasis,
    window: usize,
    op: impl Fn(&ResidueSeries) -> Result<ResidueSeries>,
) -> Result<Vec<Vec<u32>>> {
    rows.map(|i| {
        let g = op(&src.rows()[i])?;
        tgt.coordinates(&g, window)?
            .ok_or(Error::NotInAmbientSpace { weight: tgt.weight, level: 1 })
    })
    .collect()
}

/// Least t with every vector times Tᵗ inside the stable subspace.
fn settle(mut vs: Vec<Vec<u32>>, t: &[Vec<u32>], stable: &StableSubspace, ring: RingSpec) -> Result<u32> {
    let dim = t.len();
    for steps in 0..=dim as u32 {
        if vs.iter().all(|v| stable.contains(v)) {
            return Ok(steps);
        }
        vs = vs.iter().map(|v| vec_mat(v, t, ring)).collect();
    }
    Err(Error::NonTermination(dim))
}

pub fn d_invariants(kind: TowerKind, ell: u32) -> Result<DInvariants> {
    let ring = RingSpec::new(ell, 1)?;
    kind.validate(ring)?;
    let l2 = (ell * ell) as usize;
    match kind {
        TowerKind::Spt => {
            let k = ell + 1;
            let w = sturm(k) + 8;
            let prec = (l2 * w) as i64;
            let s = basis_mk(k, true, prec, ring)?;
            let m = basis_mk(k, false, prec, ring)?;
            let x = images(&s, 0..s.dim(), &s, w, |f| x_r(f, ell, 1))?;
            let stable = stable_image(&x, ell)?;
            let starts = images(&m, 0..m.dim(), &s, w, |f| d_r(f, ell, 1))?;
            let d = settle(starts, &x, &stable, ring)?;
            Ok(DInvariants { kind, ell, d, d_prime: None, stable_dim_odd: stable.dim(), stable_dim_even: None })
        }
        TowerKind::Pr(r) => {
            let ke = ell - 1;
            let ko = k_odd(r, ell, 1);
            let w = sturm(ke.max(ko)) + 8;
            let prec = (l2 * w) as i64;
            let so = basis_mk(ko, true, prec, ring)?;
            let se = basis_mk(ke, true, prec, ring)?;
            let me = basis_mk(ke, false, prec, ring)?;
            let x = images(&so, 0..so.dim(), &so, w, |f| x_r(f, ell, r))?;
            let y = images(&se, 0..se.dim(), &se, w, |f| y_r(f, ell, r))?;
            let odd = stable_image(&x, ell)?;
            let even = stable_image(&y, ell)?;
            let starts = images(&me, 0..me.dim(), &so, w, |f| d_r(f, ell, r))?;
            let d = settle(starts, &x, &odd, ring)?;
            // forms of M_{ℓ−1} vanishing to the required order: diagonal rows from that pivot on
            let c = d_prime_order(r, ell);
            let from = (0..me.dim()).filter(|&i| me.pivot(i) >= c);
            let starts = images(&me, from, &se, w, |f| Ok(f.clone()))?;
            let d_prime = settle(starts, &y, &even, ring)?;
            Ok(DInvariants {
                kind,
                ell,
                d,
                d_prime: Some(d_prime),
                stable_dim_odd: odd.dim(),
                stable_dim_even: Some(even.dim()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases_vanish() {
        for ell in [5u32, 7, 11, 13, 17] {
            let d = d_invariants(TowerKind::Spt, ell).unwrap();
            assert_eq!(d.d, 0, "ell = {ell}");
            assert!(d.stable_dim_odd <= crate::forms::dim_sk(ell + 1));
        }
        let d = d_invariants(TowerKind::Pr(2), 13).unwrap();
        assert_eq!(d.d, 0);
        let dp = d.d_prime.unwrap();
        assert!(dp <= d.d + 1 && d.d <= dp + 1);
    }

    #[test]
    fn prime_must_exceed_r_plus_four() {
        assert!(matches!(d_invariants(TowerKind::Pr(3), 7), Err(Error::PrimeTooSmall { .. })));
    }
}
