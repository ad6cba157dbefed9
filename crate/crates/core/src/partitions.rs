//! Partition functions mod ℓᵐ, the towers L_ℓ(·, b; z) and extracted P-series.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{euler_power, eta_power, phi_ell};
use crate::operators::u_ell;
use crate::precision::{plan_precision, PrecisionPlan, TowerStep};
use crate::ring::{ceil_div, chi12, RingSpec};
use crate::series::ResidueSeries;

/// Σ p_r(n)qⁿ = ∏(1 − qⁿ)^{−r}, known below `prec24`.
pub fn pr_series(r: u32, prec24: i64, ring: RingSpec) -> Result<ResidueSeries> {
    let n = ceil_div(prec24, 24);
    euler_power(ring, -(r as i64), n)?.truncate(prec24)
}

/// The auxiliary series Σσ(N)q^N + Σ_{n≥1}(−1)ⁿ q^{n(3n+1)/2}(1+qⁿ)/(1−qⁿ)²,
/// whose product with Σp(n)qⁿ is Σ spt(n)qⁿ.
fn spt_kernel(ring: RingSpec, n: usize) -> Vec<u32> {
    let mut s = vec![0u32; n];
    for d in 1..n {
        let dr = ring.reduce_u64(d as u64);
        let mut k = d;
        while k < n {
            s[k] = ring.add(s[k], dr);
            k += d;
        }
    }
    let mut j = 1usize;
    while j * (3 * j + 1) / 2 < n {
        let base = j * (3 * j + 1) / 2;
        let odd = j % 2 == 1;
        // (1 + x)/(1 − x)² = Σ (2i + 1) xⁱ
        let mut i = 0usize;
        let mut pos = base;
        while pos < n {
            let c = ring.reduce_u64(2 * i as u64 + 1);
            s[pos] = if odd { ring.sub(s[pos], c) } else { ring.add(s[pos], c) };
            i += 1;
            pos += j;
        }
        j += 1;
    }
    s
}

/// Σ spt(n)qⁿ known below `prec24`, in O(N log N) operations.
pub fn spt_series(prec24: i64, ring: RingSpec) -> Result<ResidueSeries> {
    let n = ceil_div(prec24, 24).max(0);
    let p = pr_series(1, 24 * n, ring)?;
    let k = ResidueSeries::integral(ring, spt_kernel(ring, n as usize), n)?;
    p.mul_to(&k, 24 * n)?.truncate(prec24)
}

/// Σ spt(n)qⁿ from the generating function
/// (Σp(n)qⁿ)·Σ_{n≥1} qⁿ ∏_{m<n}(1 − q^m)/(1 − qⁿ), accumulated term by term.
/// Quadratic; kept as an independent cross-check.
pub fn spt_series_running_product(prec24: i64, ring: RingSpec) -> Result<ResidueSeries> {
    let n = ceil_div(prec24, 24).max(0) as usize;
    let mut inner = vec![0u32; n];
    // running = ∏_{m<k}(1 − q^m), truncated below n − k
    let mut running = vec![0u32; n];
    if n > 0 {
        running[0] = 1;
    }
    for k in 1..n {
        if k > 1 {
            let m = k - 1;
            for i in (m..n).rev() {
                running[i] = ring.sub(running[i], running[i - m]);
            }
        }
        // term = q^k·running/(1 − q^k): divide by (1 − q^k) with a strided prefix sum
        let lim = n - k;
        let mut term = running[..lim].to_vec();
        for i in k..lim {
            term[i] = ring.add(term[i], term[i - k]);
        }
        for (i, &t) in term.iter().enumerate() {
            inner[i + k] = ring.add(inner[i + k], t);
        }
    }
    let p = pr_series(1, 24 * n as i64, ring)?;
    let inner = ResidueSeries::integral(ring, inner, n as i64)?;
    p.mul_to(&inner, 24 * n as i64)?.truncate(prec24)
}

/// Σ a(n)qⁿ with a(n) = 12 spt(n) + (24n − 1)p(n).
pub fn a_series(prec24: i64, ring: RingSpec) -> Result<ResidueSeries> {
    let s = spt_series(prec24, ring)?;
    let p = pr_series(1, prec24, ring)?;
    let coeffs = s
        .coeffs()
        .iter()
        .zip(p.coeffs())
        .enumerate()
        .map(|(n, (&sn, &pn))| ring.add(ring.mul(12, sn), ring.mul(ring.reduce(24 * n as i64 - 1), pn)))
        .collect();
    ResidueSeries::new(ring, 0, 24, coeffs, s.prec24())
}

/// Recovers spt(n) = 12⁻¹(a(n) − (24n − 1)p(n)).
pub fn spt_from_a(a: &ResidueSeries, p: &ResidueSeries) -> Result<ResidueSeries> {
    let ring = a.ring();
    let inv12 = ring.inv(12)?;
    let a = a.to_integral()?;
    let p = p.to_integral()?;
    let n = a.integral_prec().min(p.integral_prec());
    let coeffs = (0..n)
        .map(|k| {
            let an = a.coeff_int(k).unwrap_or(0);
            let pn = p.coeff_int(k).unwrap_or(0);
            ring.mul(inv12, ring.sub(an, ring.mul(ring.reduce(24 * k - 1), pn)))
        })
        .collect();
    ResidueSeries::integral(ring, coeffs, n)
}

/// Value of a series at an argument, with zero for negative arguments.
fn at(s: &ResidueSeries, x: i64) -> Result<u32> {
    if x < 0 {
        return Ok(0);
    }
    s.coeff_int(x).ok_or(Error::InsufficientPrecision { needed: 24 * (x + 1), available: s.prec24() })
}

/// α_ℓ = Σ_n (a(ℓn − (ℓ²−1)/24) − χ₁₂(ℓ)ℓ·a(n/ℓ)) q^{n − ℓ/24}, known below `prec24`.
pub fn alpha_ell(ring: RingSpec, prec24: i64) -> Result<ResidueSeries> {
    let ell = ring.ell() as i64;
    let shift = (ell * ell - 1) / 24;
    // slots n with 24n − ℓ < prec24
    let slots = ceil_div(prec24 + ell, 24).max(0);
    let need = (ell * (slots - 1) - shift + 1).max(1);
    let a = a_series(24 * need, ring)?;
    let tw = ring.reduce(-(chi12(ell) as i64) * ell);
    let coeffs = (0..slots)
        .map(|n| {
            let mut v = at(&a, ell * n - shift)?;
            if n % ell == 0 {
                v = ring.add(v, ring.mul(tw, at(&a, n / ell)?));
            }
            Ok(v)
        })
        .collect::<Result<Vec<u32>>>()?;
    ResidueSeries::new(ring, -ell, 24, coeffs, prec24)
}

/// L_ℓ(spt, 1; z) = η(ℓz)·α_ℓ(z) as an integer-q series known below `prec24`.
pub fn l_spt_one(ring: RingSpec, prec24: i64) -> Result<ResidueSeries> {
    let ell = ring.ell() as i64;
    let alpha = alpha_ell(ring, prec24 + ell)?;
    let eta = eta_power(ring.ell(), 1, prec24 + ell, ring)?.series;
    alpha.mul_to(&eta, prec24)?.to_integral()
}

/// Which partition function a tower refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TowerKind {
    /// r-colored partitions p_r.
    Pr(u32),
    /// Smallest parts function spt.
    Spt,
}

impl TowerKind {
    /// The η-exponent used in extraction (r for p_r, 1 for spt).
    pub fn eta_exponent(&self) -> u32 {
        match self {
            TowerKind::Pr(r) => *r,
            TowerKind::Spt => 1,
        }
    }

    /// The first level of the tower.
    pub fn base_level(&self) -> u32 {
        match self {
            TowerKind::Pr(_) => 0,
            TowerKind::Spt => 1,
        }
    }

    /// The step producing level `b` from level `b − 1`.
    pub fn step_into(&self, b: u32) -> TowerStep {
        if b % 2 == 0 {
            TowerStep::U
        } else {
            TowerStep::D { r: self.eta_exponent() }
        }
    }

    pub fn validate(&self, ring: RingSpec) -> Result<()> {
        if let TowerKind::Pr(r) = self {
            if *r == 0 {
                return Err(Error::Invalid("r must be positive".into()));
            }
            if ring.ell() < r + 5 {
                return Err(Error::PrimeTooSmall { ell: ring.ell(), min: r + 5 });
            }
        }
        Ok(())
    }

    /// Short identifier used in file names and reports.
    pub fn tag(&self) -> String {
        match self {
            TowerKind::Pr(r) => format!("p{r}"),
            TowerKind::Spt => "spt".into(),
        }
    }
}

impl fmt::Display for TowerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerKind::Pr(r) => write!(f, "p_{r}"),
            TowerKind::Spt => write!(f, "spt"),
        }
    }
}

/// Levels L_ℓ(·, b; z) for b from the base level up to `max_level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    pub kind: TowerKind,
    pub ring: RingSpec,
    pub plan: PrecisionPlan,
    levels: Vec<ResidueSeries>,
}

impl Tower {
    /// Assembles a tower from precomputed levels starting at the base level.
    pub fn from_levels(kind: TowerKind, ring: RingSpec, plan: PrecisionPlan, levels: Vec<ResidueSeries>) -> Self {
        Tower { kind, ring, plan, levels }
    }

    pub fn max_level(&self) -> u32 {
        self.kind.base_level() + self.levels.len() as u32 - 1
    }

    pub fn level(&self, b: u32) -> Option<&ResidueSeries> {
        b.checked_sub(self.kind.base_level()).and_then(|i| self.levels.get(i as usize))
    }

    pub fn levels(&self) -> impl Iterator<Item = (u32, &ResidueSeries)> {
        let base = self.kind.base_level();
        self.levels.iter().enumerate().map(move |(i, s)| (base + i as u32, s))
    }
}

/// Schedule of steps from the base level up to `b_max`.
pub fn tower_schedule(kind: TowerKind, b_max: u32) -> Vec<TowerStep> {
    (kind.base_level() + 1..=b_max).map(|b| kind.step_into(b)).collect()
}

/// Precision plan for a tower so that level `b_max` is known below `target_prec24`.
pub fn tower_plan(kind: TowerKind, ring: RingSpec, b_max: u32, target_prec24: i64) -> PrecisionPlan {
    plan_precision(ring.ell(), &tower_schedule(kind, b_max), target_prec24)
}

/// The base level at precision `prec24`.
pub fn base_level(kind: TowerKind, ring: RingSpec, prec24: i64) -> Result<ResidueSeries> {
    match kind {
        TowerKind::Pr(_) => Ok(ResidueSeries::one(ring, prec24)),
        TowerKind::Spt => l_spt_one(ring, prec24),
    }
}

/// Continues a tower from `start` (level `b0`, known at least to the plan's
/// requirement) up to `b_max`, calling `sink` on each new level.
pub fn extend_levels(
    kind: TowerKind,
    ring: RingSpec,
    plan: &PrecisionPlan,
    b0: u32,
    start: ResidueSeries,
    mut sink: impl FnMut(u32, &ResidueSeries) -> Result<()>,
) -> Result<Vec<ResidueSeries>> {
    let base = kind.base_level();
    let need = |b: u32| plan.levels[(b - base) as usize];
    let ell = ring.ell();
    let mut cur = start.truncate(need(b0))?;
    let b_max = base + plan.steps.len() as u32;
    let phi = if b0 < b_max {
        let first_d = (b0 + 1..=b_max).find(|&b| b % 2 == 1);
        match first_d {
            Some(b) => Some(phi_ell(ring, kind.eta_exponent(), need(b - 1) + 24 * kind.eta_exponent() as i64 * (ell as i64 * ell as i64 - 1) / 24)?.series),
            None => None,
        }
    } else {
        None
    };
    let mut out = vec![cur.clone()];
    for b in b0 + 1..=b_max {
        let next = match kind.step_into(b) {
            TowerStep::U => u_ell(&cur, ell)?,
            TowerStep::D { .. } => {
                let phi = phi.as_ref().expect("phi expanded for odd steps");
                u_ell(&cur.mul(phi)?, ell)?
            }
        };
        let target = need(b);
        if next.prec24() < target {
            return Err(Error::InsufficientPrecision { needed: target, available: next.prec24() });
        }
        cur = next.truncate(target)?;
        sink(b, &cur)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Builds L_ℓ(·, b; z) for every b up to `b_max`, with level `b_max` known
/// below `target_prec24`.
pub fn build_tower(kind: TowerKind, ring: RingSpec, b_max: u32, target_prec24: i64) -> Result<Tower> {
    kind.validate(ring)?;
    let base = kind.base_level();
    if b_max < base {
        return Err(Error::Invalid(format!("tower for {kind} starts at level {base}")));
    }
    let plan = tower_plan(kind, ring, b_max, target_prec24);
    let start = base_level(kind, ring, plan.input())?;
    let levels = extend_levels(kind, ring, &plan, base, start, |_, _| Ok(()))?;
    Ok(Tower { kind, ring, plan, levels })
}

/// ℓ^e as an exact integer.
fn ipow(ell: u32, e: u32) -> i128 {
    (ell as i128).pow(e)
}

/// δ_ℓ(b): the least nonnegative residue of 24⁻¹ modulo ℓᵇ.
pub fn delta_ell(ell: u32, b: u32) -> Result<u128> {
    let n = ipow(ell, b);
    if n > i64::MAX as i128 {
        return Err(Error::Invalid(format!("{ell}^{b} is too large")));
    }
    if b == 0 {
        return Ok(0);
    }
    let n = n as i64;
    let (mut r0, mut r1) = (n, 24i64.rem_euclid(n));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q as i128 * t1);
    }
    if r0 != 1 {
        return Err(Error::NotAUnit(24));
    }
    Ok(t0.rem_euclid(n as i128) as u128)
}

/// P_ℓ(r, b; z) or P_ℓ(spt, b; z) in q^{1/24} units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PSeries {
    pub kind: TowerKind,
    pub ell: u32,
    pub b: u32,
    pub series: ResidueSeries,
}

/// One coefficient of a P-series together with the argument(s) it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PValue {
    /// Exponent n of q^{n/24}.
    pub n: i64,
    /// Argument (ℓᵇn + r)/24 of the partition function.
    pub arg: i128,
    pub value: u32,
}

impl PSeries {
    /// The argument (ℓᵇn + r)/24 if it is a nonnegative integer.
    pub fn argument(&self, n: i64) -> Option<i128> {
        let num = ipow(self.ell, self.b) * n as i128 + self.kind.eta_exponent() as i128;
        (num >= 0 && num % 24 == 0).then_some(num / 24)
    }

    /// Coefficients at exponents whose argument is a nonnegative integer, in order.
    pub fn values(&self) -> Vec<PValue> {
        let s = &self.series;
        (0..s.len())
            .filter_map(|k| {
                let n = s.exponent24(k);
                self.argument(n).map(|arg| PValue { n, arg, value: s.coeffs()[k] })
            })
            .collect()
    }

    /// Coefficients at exponents with no valid argument that are nonzero.
    pub fn defects(&self) -> Vec<i64> {
        self.series.terms().filter(|(n, _)| self.argument(*n).is_none()).map(|(n, _)| n).collect()
    }

    /// P(24z): the same coefficients indexed by integer exponents n.
    pub fn rescaled_24z(&self) -> ResidueSeries {
        self.series.dilate(24)
    }
}

/// Divides level b of a tower by η(z)^r (b even) or η(ℓz)^r (b odd).
pub fn extract_p(tower: &Tower, b: u32) -> Result<PSeries> {
    let l = tower
        .level(b)
        .ok_or_else(|| Error::Invalid(format!("level {b} is not in the tower")))?;
    extract_from_level(tower.kind, l, b)
}

/// Extraction from a single level.
pub fn extract_from_level(kind: TowerKind, l: &ResidueSeries, b: u32) -> Result<PSeries> {
    let ring = l.ring();
    let r = kind.eta_exponent() as i64;
    let t = if b % 2 == 0 { 1 } else { ring.ell() };
    let shift = r * t as i64;
    let eta_inv = eta_power(t, -r, l.prec24() - shift, ring)?.series;
    let series = l.mul(&eta_inv)?;
    Ok(PSeries { kind, ell: ring.ell(), b, series })
}

/// P-series computed straight from the partition function values, with at
/// least `slots` grid coefficients. Independent of the tower recursion.
pub fn p_series_direct(kind: TowerKind, ring: RingSpec, b: u32, slots: usize) -> Result<PSeries> {
    if kind == TowerKind::Spt && b == 0 {
        return Err(Error::Invalid("P(spt, b) needs b >= 1".into()));
    }
    let ell = ring.ell();
    let r = kind.eta_exponent() as i64;
    let off = if b % 2 == 0 { -r } else { -r * ell as i64 };
    let proto = PSeries { kind, ell, b, series: ResidueSeries::zero(ring, 0) };
    let last = off + 24 * (slots as i64 - 1);
    let max_arg = proto.argument(last).unwrap_or(0).max(0);
    if max_arg > 50_000_000 {
        return Err(Error::Invalid(format!("argument {max_arg} is beyond direct computation")));
    }
    let prec = 24 * (max_arg as i64 + 1);
    let coeffs = match kind {
        TowerKind::Pr(rr) => {
            let p = pr_series(rr, prec, ring)?;
            (0..slots)
                .map(|k| {
                    let n = off + 24 * k as i64;
                    proto.argument(n).map_or(Ok(0), |x| at(&p, x as i64))
                })
                .collect::<Result<Vec<u32>>>()?
        }
        TowerKind::Spt => {
            let a = a_series(prec, ring)?;
            let tw = ring.reduce(-(chi12(ell as i64) as i64) * ell as i64);
            (0..slots)
                .map(|k| {
                    let n = off + 24 * k as i64;
                    let Some(x) = proto.argument(n) else { return Ok(0) };
                    let mut v = at(&a, x as i64)?;
                    // second argument (ℓ^{b−2}n + 1)/24
                    let num = if b >= 2 {
                        Some(ipow(ell, b - 2) * n as i128 + 1)
                    } else if (n as i128) % (ell as i128) == 0 {
                        Some(n as i128 / ell as i128 + 1)
                    } else {
                        None
                    };
                    if let Some(num) = num {
                        if num >= 0 && num % 24 == 0 {
                            v = ring.add(v, ring.mul(tw, at(&a, (num / 24) as i64)?));
                        }
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<u32>>>()?
        }
    };
    let series = ResidueSeries::new(ring, off, 24, coeffs, off + 24 * slots as i64)?;
    Ok(PSeries { kind, ell, b, series })
}
