//! Linear algebra on coefficient vectors over F_ℓ and Z/ℓᵐZ.
//!
//! Vectors are rows; an operator matrix `T` acts by `v ↦ v·T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::RingSpec;

/// Which series coefficients make up a vector: exponents
/// `start24 + k·step24` for `k < len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start24: i64,
    pub len: usize,
    pub step24: i64,
}

impl Window {
    /// The integer exponents `0..len`.
    pub fn integral(len: usize) -> Self {
        Window { start24: 0, len, step24: 24 }
    }
}

/// A submodule of (Z/ℓᵐZ)ⁿ in Howell normal form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpan {
    pub ring: RingSpec,
    pub window: Window,
    /// Canonical generators; row i has pivot `ℓ^{pivots[i].1}` in column `pivots[i].0`.
    pub rows: Vec<Vec<u32>>,
    pub pivots: Vec<(usize, u32)>,
}

/// Reduced row echelon form over F_ℓ. Returns the nonzero rows and the rank.
pub fn echelon_fl(vectors: &[Vec<u32>], ell: u32) -> (Vec<Vec<u32>>, usize) {
    let f = RingSpec::new(ell, 1).expect("ell is a prime >= 5");
    let mut rows: Vec<Vec<u32>> = vectors.iter().map(|v| v.iter().map(|&x| x % ell).collect()).collect();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = f.inv(rows[r][c]).expect("nonzero in a field");
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let factor = rows[i][c];
                let (pivot, other) = pick(&mut rows, r, i);
                axpy(other, pivot, f.neg(factor), f);
            }
        }
        r += 1;
    }
    rows.truncate(r);
    (rows, r)
}

/// Borrow rows `a` (shared) and `b` (mutable) of a matrix simultaneously.
fn pick(rows: &mut [Vec<u32>], a: usize, b: usize) -> (&Vec<u32>, &mut Vec<u32>) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = rows.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

/// y += c·x
fn axpy(y: &mut [u32], x: &[u32], c: u32, ring: RingSpec) {
    if c == 0 {
        return;
    }
    for (a, &b) in y.iter_mut().zip(x) {
        *a = ring.add(*a, ring.mul(b, c));
    }
}

/// Canonical Howell form of the span of `vectors`.
pub fn howell(vectors: &[Vec<u32>], ring: RingSpec, window: Window) -> ModuleSpan {
    let q = ring.modulus();
    let mut rows: Vec<Vec<u32>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x % q).collect())
        .filter(|v: &Vec<u32>| v.iter().any(|&x| x != 0))
        .collect();
    let ncols = window.len;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let best = (r..rows.len())
            .filter(|&i| rows[i][c] != 0)
            .min_by_key(|&i| ring.valuation(rows[i][c]));
        let Some(p) = best else { continue };
        rows.swap(r, p);
        let e = ring.valuation(rows[r][c]);
        let pe = ring.ell_pow(e);
        // scale so the pivot is exactly ℓ^e
        let unit = rows[r][c] / pe;
        let uinv = ring.inv(unit).expect("unit part");
        for x in rows[r].iter_mut() {
            *x = ring.mul(*x, uinv);
        }
        debug_assert_eq!(rows[r][c], pe);
        for i in (r + 1)..rows.len() {
            let x = rows[i][c];
            if x != 0 {
                let factor = x / pe;
                let (pivot, other) = pick(&mut rows, r, i);
                axpy(other, pivot, ring.neg(factor), ring);
            }
        }
        // saturation: ℓ^{m-e}·row has a zero in column c but may be new
        if e > 0 {
            let k = ring.ell_pow(ring.m() - e);
            let extra: Vec<u32> = rows[r].iter().map(|&x| ring.mul(x, k)).collect();
            if extra.iter().any(|&x| x != 0) {
                rows.push(extra);
            }
        }
        pivots.push((c, e));
        r += 1;
    }
    rows.truncate(r);
    // reduce entries above pivots into [0, ℓ^e)
    for (pr, &(c, e)) in pivots.iter().enumerate() {
        let pe = ring.ell_pow(e);
        for i in 0..pr {
            let x = rows[i][c];
            if x >= pe {
                let factor = x / pe;
                let (pivot, other) = pick(&mut rows, pr, i);
                axpy(other, pivot, ring.neg(factor), ring);
            }
        }
    }
    ModuleSpan { ring, window, rows, pivots }
}

impl ModuleSpan {
    pub fn zero(ring: RingSpec, window: Window) -> Self {
        ModuleSpan { ring, window, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Coordinates of `v` with respect to the canonical rows, if `v` lies in the span.
    pub fn member(&self, v: &[u32]) -> Option<Vec<u32>> {
        let ring = self.ring;
        let mut w: Vec<u32> = v.iter().map(|&x| x % ring.modulus()).collect();
        let mut coords = Vec::with_capacity(self.rows.len());
        for (row, &(c, e)) in self.rows.iter().zip(&self.pivots) {
            let x = w[c];
            let pe = ring.ell_pow(e);
            if x % pe != 0 {
                return None;
            }
            let k = x / pe;
            axpy(&mut w, row, ring.neg(k), ring);
            coords.push(k);
        }
        if w.iter().all(|&x| x == 0) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.member(v).is_some()
    }

    pub fn contains_span(&self, other: &ModuleSpan) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// The span enlarged by one vector.
    pub fn with(&self, v: &[u32]) -> ModuleSpan {
        let mut rows = self.rows.clone();
        rows.push(v.to_vec());
        howell(&rows, self.ring, self.window)
    }

    /// Minimal number of generators.
    pub fn rank(&self) -> usize {
        min_generators(&self.rows, self.ring)
    }

    /// Dimension over F_ℓ of the reduction of the span modulo ℓ.
    pub fn rank_mod_ell(&self) -> usize {
        echelon_fl(&self.rows, self.ring.ell()).1
    }
}

/// Number of nonzero invariant factors (Smith form) of the row module.
pub fn min_generators(rows: &[Vec<u32>], ring: RingSpec) -> usize {
    let mut a: Vec<Vec<u32>> = rows.to_vec();
    let mut count = 0;
    loop {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in a.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x != 0 {
                    let v = ring.valuation(x);
                    if best.map_or(true, |b| v < b.2) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((pi, pj, e)) = best else { break };
        count += 1;
        a.swap(0, pi);
        let pe = ring.ell_pow(e);
        let unit = a[0][pj] / pe;
        let uinv = ring.inv(unit).expect("unit part");
        for x in a[0].iter_mut() {
            *x = ring.mul(*x, uinv);
        }
        // clear the pivot column below (row ops), then drop pivot row/column;
        // column ops are implicit since the pivot divides the whole row.
        for i in 1..a.len() {
            let x = a[i][pj];
            if x != 0 {
                let factor = x / pe;
                let (pivot, other) = pick(&mut a, 0, i);
                axpy(other, pivot, ring.neg(factor), ring);
            }
        }
        a.remove(0);
        for row in a.iter_mut() {
            row.remove(pj);
        }
    }
    count
}

/// Square matrix product over a ring.
pub fn mat_mul(a: &[Vec<u32>], b: &[Vec<u32>], ring: RingSpec) -> Vec<Vec<u32>> {
    a.iter().map(|row| vec_mat(row, b, ring)).collect()
}

/// Row vector times matrix.
pub fn vec_mat(v: &[u32], m: &[Vec<u32>], ring: RingSpec) -> Vec<u32> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut out = vec![0u32; ncols];
    for (&x, row) in v.iter().zip(m) {
        axpy(&mut out, row, x, ring);
    }
    out
}

/// The subspace of F_ℓⁿ on which an operator acts invertibly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableSubspace {
    pub ell: u32,
    pub ambient_dim: usize,
    /// Row-reduced basis.
    pub basis: Vec<Vec<u32>>,
}

impl StableSubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        echelon_fl(&rows, self.ell).1 == self.basis.len()
    }
}

/// Image of `Tⁿ` for n = dim: the stable part of the Fitting decomposition.
pub fn stable_image(t: &[Vec<u32>], ell: u32) -> Result<StableSubspace> {
    let n = t.len();
    if t.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("operator matrix is not square".into()));
    }
    let f = RingSpec::new(ell, 1)?;
    let mut power: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|j| u32::from(i == j)).collect()).collect();
    let mut base: Vec<Vec<u32>> = t.iter().map(|r| r.iter().map(|&x| x % ell).collect()).collect();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            power = mat_mul(&power, &base, f);
        }
        base = mat_mul(&base, &base, f);
        e >>= 1;
    }
    let (basis, _) = echelon_fl(&power, ell);
    Ok(StableSubspace { ell, ambient_dim: n, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn naive_rank(mut a: Vec<Vec<i64>>, p: i64) -> usize {
        // plain elimination without normalization
        let mut rank = 0;
        let cols = a.first().map_or(0, |r| r.len());
        for c in 0..cols {
            let Some(pr) = (rank..a.len()).find(|&i| a[i][c].rem_euclid(p) != 0) else { continue };
            a.swap(rank, pr);
            for i in rank + 1..a.len() {
                let (x, y) = (a[i][c], a[rank][c]);
                for k in 0..cols {
                    a[i][k] = (a[i][k] * y - a[rank][k] * x).rem_euclid(p);
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn echelon_examples() {
        assert_eq!(echelon_fl(&[vec![1, 0], vec![0, 1]], 5).1, 2);
        assert_eq!(echelon_fl(&[vec![1, 2], vec![2, 4]], 5).1, 1);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let a: Vec<Vec<u32>> = (0..10)
                .map(|_| (0..10).map(|_| if rng.gen_bool(0.3) { rng.gen_range(0..13) } else { 0 }).collect())
                .collect();
            let ai: Vec<Vec<i64>> = a.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
            assert_eq!(echelon_fl(&a, 13).1, naive_rank(ai, 13));
        }
    }

    fn span_set(gens: &[Vec<u32>], q: u32) -> std::collections::BTreeSet<Vec<u32>> {
        // all combinations of the generators with coefficients in Z/q
        let mut set = std::collections::BTreeSet::new();
        let n = gens[0].len();
        let k = gens.len();
        let total = (q as usize).pow(k as u32);
        for idx in 0..total {
            let mut v = vec![0u32; n];
            let mut t = idx;
            for g in gens {
                let c = (t % q as usize) as u32;
                t /= q as usize;
                for j in 0..n {
                    v[j] = (v[j] + c * g[j]) % q;
                }
            }
            set.insert(v);
        }
        set
    }

    #[test]
    fn howell_is_canonical_against_enumeration() {
        let ring = RingSpec::new(5, 2).unwrap();
        let w = Window::integral(2);
        let a = vec![vec![1, 1], vec![0, 5]];
        let b = vec![vec![1, 6], vec![0, 5]];
        assert_eq!(span_set(&a, 25), span_set(&b, 25));
        assert_eq!(howell(&a, ring, w), howell(&b, ring, w));
        // exhaustive: random pairs agree on spans iff Howell forms agree
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..60 {
            let g1: Vec<Vec<u32>> = (0..2).map(|_| (0..2).map(|_| 5 * rng.gen_range(0..5) + rng.gen_range(0..2)).collect()).collect();
            let g2: Vec<Vec<u32>> = (0..2).map(|_| (0..2).map(|_| 5 * rng.gen_range(0..5) + rng.gen_range(0..2)).collect()).collect();
            let same = span_set(&g1, 25) == span_set(&g2, 25);
            assert_eq!(same, howell(&g1, ring, w).rows == howell(&g2, ring, w).rows, "{g1:?} {g2:?}");
            let h = howell(&g1, ring, w);
            for v in span_set(&g1, 25) {
                let c = h.member(&v).expect("element of span");
                let mut back = vec![0u32; 2];
                for (row, k) in h.rows.iter().zip(c) {
                    axpy(&mut back, row, k, ring);
                }
                assert_eq!(back, v);
            }
        }
    }

    #[test]
    fn howell_examples() {
        let ring = RingSpec::new(7, 2).unwrap();
        let w = Window::integral(2);
        let h = howell(&[vec![7, 0]], ring, w);
        assert_eq!(h.rows, vec![vec![7, 0]]);
        assert!(h.member(&[1, 0]).is_none());
        assert_eq!(h.member(&[0, 0]), Some(vec![0]));
        assert_eq!(h.member(&[7, 0]), Some(vec![1]));
        assert_eq!(h.rank(), 1);
        assert_eq!(h.rank_mod_ell(), 0);
        // saturation: 7·(7, 1) = (0, 7) joins the generators
        let h2 = howell(&[vec![7, 1]], ring, w);
        assert_eq!(h2.rows, vec![vec![7, 1], vec![0, 7]]);
        let h3 = howell(&[vec![7, 7]], ring, w);
        assert_eq!(h3.rows, vec![vec![7, 7]]);
        let h4 = howell(&[vec![1, 7]], ring, w);
        assert!(h4.contains(&[0, 0]));
        assert!(!h4.contains(&[0, 7]));
    }

    #[test]
    fn howell_mod_ell_matches_echelon() {
        let ring = RingSpec::new(11, 1).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..30 {
            let a: Vec<Vec<u32>> = (0..6).map(|_| (0..8).map(|_| rng.gen_range(0..3)).collect()).collect();
            let h = howell(&a, ring, Window::integral(8));
            let (e, rank) = echelon_fl(&a, 11);
            assert_eq!(h.rows, e);
            assert_eq!(h.rank(), rank);
        }
    }

    #[test]
    fn stable_image_examples() {
        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(stable_image(&id, 5).unwrap().dim(), 2);
        let nil = vec![vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]];
        assert_eq!(stable_image(&nil, 5).unwrap().dim(), 0);
        let d = vec![vec![1, 0], vec![0, 0]];
        let s = stable_image(&d, 5).unwrap();
        assert_eq!(s.basis, vec![vec![1, 0]]);
    }
}
