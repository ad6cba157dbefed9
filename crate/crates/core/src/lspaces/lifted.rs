use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ambient_weight, b_bound, d_invariants, r_bound, DInvariants, Parity};
use crate::error::{Error, Result};
use crate::forms::{basis_mk, phi_ell, sturm, FormBasis};
use crate::linalg::{howell, ModuleSpan, Window};
use crate::operators::{d_r_with, u_ell};
use crate::partitions::{l_spt_one, TowerKind};
use crate::precision::TowerStep;
use crate::ring::RingSpec;
use crate::series::ResidueSeries;

/// How many times a parity's weight may be raised when a level falls
/// outside the expected space.
const MAX_ESCALATIONS: u32 = 3;

/// A tower whose levels are stored as coordinates in a level-one basis.
///
/// Each level modulo ℓᵐ is a modular form of a fixed weight per parity, so
/// a level is determined by Sturm-many coefficients. The next level is
/// obtained by re-expanding the current one to ℓ times the next window and
/// applying the step; deep levels cost no more than shallow ones.
#[derive(Debug, Clone)]
pub struct LiftedTower {
    kind: TowerKind,
    ring: RingSpec,
    min_window: usize,
    weights: [u32; 2],
    windows: [usize; 2],
    bases: [Arc<FormBasis>; 2],
    phi: ResidueSeries,
    levels: Vec<Vec<u32>>,
    escalations: Vec<(Parity, u32)>,
}

fn ix(b: u32) -> usize {
    Parity::of(b).index()
}

impl LiftedTower {
    /// `min_window` raises the coefficient window used for membership tests.
    pub fn new(kind: TowerKind, ring: RingSpec, min_window: usize) -> Result<Self> {
        kind.validate(ring)?;
        let (ell, m) = (ring.ell(), ring.m());
        let weights = [
            ambient_weight(kind, Parity::Odd, ell, m),
            ambient_weight(kind, Parity::Even, ell, m),
        ];
        let mut t = Self::with_weights(kind, ring, min_window, weights)?;
        t.ensure(kind.base_level() + 3)?;
        Ok(t)
    }

    fn with_weights(kind: TowerKind, ring: RingSpec, min_window: usize, weights: [u32; 2]) -> Result<Self> {
        let ell = ring.ell() as usize;
        let windows = weights.map(|k| (sturm(k) + 8).max(min_window));
        let prec = |p: usize| (windows[p]).max(ell * windows[1 - p]) as i64;
        let bases = [basis_mk(weights[0], false, prec(0), ring)?, basis_mk(weights[1], false, prec(1), ring)?];
        let r = kind.eta_exponent();
        // D steps land in odd levels, whose window is windows[0]
        let phi_prec = 24 * (ell * windows[0]) as i64 + r as i64 * (ell as i64 * ell as i64 - 1);
        let phi = phi_ell(ring, r, phi_prec)?.series;
        let mut t = LiftedTower {
            kind,
            ring,
            min_window,
            weights,
            windows,
            bases,
            phi,
            levels: Vec::new(),
            escalations: Vec::new(),
        };
        t.push_base()?;
        Ok(t)
    }

    fn push_base(&mut self) -> Result<()> {
        let b = self.kind.base_level();
        let p = ix(b);
        let w = self.windows[p];
        let s = match self.kind {
            TowerKind::Pr(_) => ResidueSeries::one(self.ring, 24 * w as i64),
            TowerKind::Spt => l_spt_one(self.ring, 24 * w as i64)?,
        };
        match self.bases[p].coordinates(&s, w)? {
            Some(c) => {
                self.levels.push(c);
                Ok(())
            }
            None => Err(Error::NotInAmbientSpace { weight: self.weights[p], level: b }),
        }
    }

    pub fn kind(&self) -> TowerKind {
        self.kind
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn weight(&self, parity: Parity) -> u32 {
        self.weights[parity.index()]
    }

    pub fn window(&self, parity: Parity) -> usize {
        self.windows[parity.index()]
    }

    /// Weight increases that were needed, as (parity, new weight).
    pub fn escalations(&self) -> &[(Parity, u32)] {
        &self.escalations
    }

    fn top(&self) -> u32 {
        self.kind.base_level() + self.levels.len() as u32 - 1
    }

    fn step(&self, b: u32) -> Result<Option<Vec<u32>>> {
        let ell = self.ring.ell();
        let (p, q) = (ix(b), ix(b + 1));
        let cur = &self.levels[(b - self.kind.base_level()) as usize];
        let f = self.bases[p].combine(cur, ell as i64 * self.windows[q] as i64)?;
        let g = match self.kind.step_into(b + 1) {
            TowerStep::U => u_ell(&f, ell)?,
            TowerStep::D { .. } => d_r_with(&f, &self.phi, ell)?,
        };
        self.bases[q].coordinates(&g, self.windows[q])
    }

    /// Computes levels up to `b`, raising a weight and starting over when a
    /// level is not found in its space.
    fn ensure(&mut self, b: u32) -> Result<()> {
        while self.top() < b {
            let cur = self.top();
            match self.step(cur)? {
                Some(c) => self.levels.push(c),
                None => {
                    let p = Parity::of(cur + 1);
                    let bumps = self.escalations.iter().filter(|e| e.0 == p).count() as u32;
                    if bumps >= MAX_ESCALATIONS {
                        return Err(Error::NotInAmbientSpace { weight: self.weights[p.index()], level: cur + 1 });
                    }
                    let (ell, m) = (self.ring.ell(), self.ring.m());
                    let mut weights = self.weights;
                    weights[p.index()] += ell.pow(m - 1) * (ell - 1);
                    let mut escalations = std::mem::take(&mut self.escalations);
                    escalations.push((p, weights[p.index()]));
                    *self = Self::with_weights(self.kind, self.ring, self.min_window, weights)?;
                    self.escalations = escalations;
                }
            }
        }
        Ok(())
    }

    /// Coordinates of level `b` in the basis of its parity's space.
    pub fn coords(&mut self, b: u32) -> Result<&[u32]> {
        let base = self.kind.base_level();
        if b < base {
            return Err(Error::Invalid(format!("tower for {} starts at level {base}", self.kind)));
        }
        self.ensure(b)?;
        Ok(&self.levels[(b - base) as usize])
    }

    /// Level `b` known for integer exponents below `prec`.
    pub fn level_series(&mut self, b: u32, prec: i64) -> Result<ResidueSeries> {
        let k = self.weights[ix(b)];
        let c = self.coords(b)?.to_vec();
        basis_mk(k, false, prec, self.ring)?.combine(&c, prec)
    }

    /// The first `window(parity)` coefficients of level `b`.
    pub fn window_vector(&mut self, b: u32) -> Result<Vec<u32>> {
        let w = self.windows[ix(b)];
        let c = self.coords(b)?.to_vec();
        Ok(self.bases[ix(b)].combine(&c, w as i64)?.coeffs().to_vec())
    }

    /// Λ(b): the span of all levels β ≥ b with β ≡ b (mod 2).
    ///
    /// The two-level step is linear on series, so once a level lies in the
    /// span of the earlier ones every later level does too.
    pub fn span(&mut self, b: u32) -> Result<ModuleSpan> {
        let p = Parity::of(b);
        let w = self.windows[p.index()];
        let window = Window::integral(w);
        let dim = self.bases[p.index()].dim();
        let limit = self.ring.m() as usize * dim + 2;
        let mut span = howell(&[], self.ring, window);
        let mut beta = b;
        for _ in 0..=limit {
            let v = self.window_vector(beta)?;
            if span.contains(&v) {
                return Ok(span);
            }
            span = span.with(&v);
            beta += 2;
        }
        Err(Error::NonTermination(limit))
    }
}

/// Rank data of Λ(b) at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanStep {
    pub b: u32,
    pub rank: usize,
    pub rank_mod_ell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationResult {
    pub kind: TowerKind,
    pub parity: Parity,
    pub ell: u32,
    pub m: u32,
    /// Weight of the space holding this parity's levels.
    pub weight: u32,
    /// First b of this parity with Λ(b) = Λ(b + 2).
    pub first_stable: u32,
    /// Least b after which both parities are constant, when both stabilized by `b_max`.
    pub b_ell: Option<u32>,
    pub omega: ModuleSpan,
    /// Minimal number of generators of Ω.
    pub rank: usize,
    /// Dimension of Ω mod ℓ.
    pub rank_mod_ell: usize,
    pub bound_r: i64,
    pub bound_b: u32,
    pub d: DInvariants,
    /// Set when the examined levels stop short of `bound_b`.
    pub tentative: bool,
    pub spans: Vec<SpanStep>,
}

/// First b of `parity` (up to `b_max`) with Λ(b) = Λ(b+2), and the spans seen.
fn first_stable(t: &mut LiftedTower, parity: Parity, b_max: u32) -> Result<(Option<(u32, ModuleSpan)>, Vec<SpanStep>)> {
    let mut b = parity.first_level(t.kind());
    let mut steps = Vec::new();
    let mut cur = t.span(b)?;
    while b <= b_max {
        steps.push(SpanStep { b, rank: cur.rank(), rank_mod_ell: cur.rank_mod_ell() });
        let next = t.span(b + 2)?;
        if next == cur {
            return Ok((Some((b, cur)), steps));
        }
        cur = next;
        b += 2;
    }
    Ok((None, steps))
}

pub fn stabilize(kind: TowerKind, parity: Parity, ring: RingSpec, b_max: u32) -> Result<StabilizationResult> {
    stabilize_with(kind, parity, ring, b_max, 0)
}

/// Stabilization with a minimum coefficient window.
pub fn stabilize_with(
    kind: TowerKind,
    parity: Parity,
    ring: RingSpec,
    b_max: u32,
    min_window: usize,
) -> Result<StabilizationResult> {
    let mut t = LiftedTower::new(kind, ring, min_window)?;
    let (mine, spans) = first_stable(&mut t, parity, b_max)?;
    let Some((o_p, omega)) = mine else {
        return Err(Error::NotStabilized(b_max));
    };
    let (other, _) = first_stable(&mut t, parity.other(), b_max)?;
    let b_ell = other.map(|(o_q, _)| o_p.max(o_q).saturating_sub(1));
    let d = d_invariants(kind, ring.ell())?;
    let bound_b = b_bound(kind, ring.m(), &d);
    Ok(StabilizationResult {
        kind,
        parity,
        ell: ring.ell(),
        m: ring.m(),
        weight: t.weight(parity),
        first_stable: o_p,
        b_ell,
        rank: omega.rank(),
        rank_mod_ell: omega.rank_mod_ell(),
        omega,
        bound_r: r_bound(kind, ring.ell()),
        bound_b,
        d,
        tentative: b_max < bound_b,
        spans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::build_tower;

    fn ring(l: u32, m: u32) -> RingSpec {
        RingSpec::new(l, m).unwrap()
    }

    #[test]
    fn lifted_levels_match_direct_tower() {
        for (kind, l, m, b_max) in [
            (TowerKind::Spt, 5, 1, 4),
            (TowerKind::Spt, 11, 1, 3),
            (TowerKind::Spt, 7, 2, 3),
            (TowerKind::Pr(2), 13, 1, 3),
            (TowerKind::Pr(1), 7, 2, 3),
        ] {
            let r = ring(l, m);
            let mut lt = LiftedTower::new(kind, r, 0).unwrap();
            let direct = build_tower(kind, r, b_max, 24 * 40).unwrap();
            for (b, s) in direct.levels() {
                let n = s.integral_prec().min(40);
                let lifted = lt.level_series(b, n).unwrap();
                assert_eq!(lifted, s.truncate(24 * n).unwrap().to_integral().unwrap(), "{kind} l={l} m={m} b={b}");
            }
        }
    }

    #[test]
    fn spans_are_nested() {
        let mut lt = LiftedTower::new(TowerKind::Spt, ring(11, 2), 0).unwrap();
        for b in 1..6 {
            let big = lt.span(b).unwrap();
            let small = lt.span(b + 2).unwrap();
            assert!(big.contains_span(&small), "b = {b}");
        }
    }

    #[test]
    fn small_spt_ranks() {
        for (l, want) in [(5u32, 0usize), (7, 0), (11, 1)] {
            let s = stabilize(TowerKind::Spt, Parity::Odd, ring(l, 1), 9).unwrap();
            assert_eq!(s.rank, want, "ell = {l}");
            assert!(s.rank as i64 <= s.bound_r);
            assert!(!s.tentative);
        }
    }

    #[test]
    fn rank_zero_means_levels_vanish() {
        let mut lt = LiftedTower::new(TowerKind::Spt, ring(7, 1), 0).unwrap();
        let s = stabilize(TowerKind::Spt, Parity::Odd, ring(7, 1), 9).unwrap();
        let b = s.first_stable;
        assert!(lt.level_series(b, 200).unwrap().is_zero());
    }
}
