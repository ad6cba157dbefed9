//! Level-one modular forms mod ℓᵐ: eta products, Eisenstein series,
//! diagonal bases of M_k and S_k, and the filtration.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{ceil_div, RingSpec};
use crate::series::ResidueSeries;

/// Which expression produced an [`EtaObject`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaExpr {
    /// η(t·z)^r
    Eta { t: u32, r: i64 },
    /// Normalized Eisenstein series E_k.
    Eisenstein { k: u32 },
    /// (η(ℓ²z)/η(z))^r
    Phi { ell: u32, r: u32 },
    /// η(z)^ℓ/η(ℓz)
    AEll { ell: u32 },
}

impl fmt::Display for EtaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaExpr::Eta { t: 1, r } => write!(f, "eta(z)^{r}"),
            EtaExpr::Eta { t, r } => write!(f, "eta({t}z)^{r}"),
            EtaExpr::Eisenstein { k } => write!(f, "E{k}"),
            EtaExpr::Phi { ell, r } => write!(f, "(eta({}z)/eta(z))^{r}", ell * ell),
            EtaExpr::AEll { ell } => write!(f, "eta(z)^{ell}/eta({ell}z)"),
        }
    }
}

/// A series together with the expression it expands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaObject {
    pub series: ResidueSeries,
    pub expr: EtaExpr,
}

impl EtaObject {
    /// Leading exponent (24ths) implied by the expression.
    pub fn symbolic_offset24(&self) -> i64 {
        match &self.expr {
            EtaExpr::Eta { t, r } => *t as i64 * r,
            EtaExpr::Eisenstein { .. } | EtaExpr::AEll { .. } => 0,
            EtaExpr::Phi { ell, r } => *r as i64 * (*ell as i64 * *ell as i64 - 1),
        }
    }
}

/// ∏(1 − qⁿ) known below `prec24`, via the pentagonal number theorem.
pub fn euler_series(ring: RingSpec, prec24: i64) -> ResidueSeries {
    let n = ceil_div(prec24.max(0), 24) as usize;
    let mut c = vec![0u32; n];
    if n > 0 {
        c[0] = 1;
    }
    let neg1 = ring.neg(1);
    let mut j: usize = 1;
    loop {
        let g1 = j * (3 * j - 1) / 2;
        if g1 >= n {
            break;
        }
        let s = if j % 2 == 1 { neg1 } else { 1 };
        c[g1] = s;
        let g2 = j * (3 * j + 1) / 2;
        if g2 < n {
            c[g2] = s;
        }
        j += 1;
    }
    ResidueSeries::new(ring, 0, 24, c, prec24.max(0)).expect("grid sized to precision")
}

/// E(q)^r for any integer r, known for integer exponents below `n`.
pub(crate) fn euler_power(ring: RingSpec, r: i64, n: i64) -> Result<ResidueSeries> {
    if n <= 0 {
        return Ok(ResidueSeries::zero(ring, 0));
    }
    let e = euler_series(ring, 24 * n);
    let p = e.pow_to(r.unsigned_abs(), 24 * n)?;
    if r < 0 {
        p.inv_to(24 * n)
    } else {
        Ok(p)
    }
}

/// η(tz)^r = q^{rt/24} ∏(1 − q^{tn})^r known below `prec24`.
pub fn eta_power(t: u32, r: i64, prec24: i64, ring: RingSpec) -> Result<EtaObject> {
    if t == 0 {
        return Err(Error::Invalid("dilation must be positive".into()));
    }
    let off = r * t as i64;
    // E(q)^r must be known below k with 24·t·k + off ≥ prec24
    let k = ceil_div(prec24 - off, 24 * t as i64).max(0);
    let base = euler_power(ring, r, k)?;
    let series = base.dilate(t).shift(off);
    let series = if series.prec24() > prec24 { series.truncate(prec24)? } else { series };
    Ok(EtaObject { series, expr: EtaExpr::Eta { t, r } })
}

/// σ_j(n) mod ℓᵐ for n < len.
fn divisor_sums(ring: RingSpec, j: u64, len: usize) -> Vec<u32> {
    let mut s = vec![0u32; len];
    for d in 1..len {
        let dj = ring.pow(ring.reduce_u64(d as u64), j);
        let mut n = d;
        while n < len {
            s[n] = ring.add(s[n], dj);
            n += d;
        }
    }
    s
}

/// E₄ = 1 + 240Σσ₃(n)qⁿ or E₆ = 1 − 504Σσ₅(n)qⁿ.
pub fn eisenstein(k: u32, prec24: i64, ring: RingSpec) -> Result<EtaObject> {
    let (j, c) = match k {
        4 => (3, 240),
        6 => (5, -504),
        _ => return Err(Error::Invalid(format!("eisenstein series E{k} is not provided"))),
    };
    let n = ceil_div(prec24.max(0), 24) as usize;
    let c = ring.reduce(c);
    let mut coeffs: Vec<u32> = divisor_sums(ring, j, n).into_iter().map(|s| ring.mul(s, c)).collect();
    if let Some(x) = coeffs.first_mut() {
        *x = 1 % ring.modulus();
    }
    let series = ResidueSeries::new(ring, 0, 24, coeffs, prec24.max(0))?;
    Ok(EtaObject { series, expr: EtaExpr::Eisenstein { k } })
}

/// Δ = η(z)²⁴ as an integer-q series known below `prec24`.
pub fn delta(ring: RingSpec, prec24: i64) -> Result<ResidueSeries> {
    eta_power(1, 24, prec24, ring)?.series.to_integral()
}

/// Φ_ℓ^r = (η(ℓ²z)/η(z))^r, leading exponent r(ℓ²−1)/24.
pub fn phi_ell(ring: RingSpec, r: u32, prec24: i64) -> Result<EtaObject> {
    let ell = ring.ell() as i64;
    let v = r as i64 * (ell * ell - 1) / 24;
    let n = ceil_div(prec24, 24);
    let rest = (n - v).max(0);
    let den = euler_power(ring, -(r as i64), rest)?;
    let num = euler_power(ring, r as i64, ceil_div(rest, ell * ell))?.dilate((ell * ell) as u32);
    let num = if num.prec24() > 24 * rest { num.truncate(24 * rest)? } else { num };
    let prod = num.mul_to(&den, 24 * rest)?.shift(24 * v);
    let series = if prod.prec24() >= prec24 {
        prod.truncate(prec24)?
    } else {
        ResidueSeries::zero(ring, prec24)
    };
    Ok(EtaObject { series, expr: EtaExpr::Phi { ell: ring.ell(), r } })
}

/// A_ℓ = η(z)^ℓ/η(ℓz), an integer-q series with constant term 1.
pub fn a_ell(ring: RingSpec, prec24: i64) -> Result<EtaObject> {
    let ell = ring.ell() as i64;
    let n = ceil_div(prec24, 24);
    let num = euler_power(ring, ell, n)?;
    let den = euler_series(ring, 24 * ceil_div(n, ell)).dilate(ell as u32);
    let den = den.truncate(24 * n)?.inv_to(24 * n)?;
    let series = num.mul_to(&den, 24 * n)?.truncate(prec24)?;
    Ok(EtaObject { series, expr: EtaExpr::AEll { ell: ring.ell() } })
}

/// θ = q d/dq on an integer-q series.
pub fn theta(f: &ResidueSeries) -> Result<ResidueSeries> {
    let f = f.to_integral()?;
    let ring = f.ring();
    let start = f.offset24() / 24;
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &c)| ring.mul(c, ring.reduce(start + k as i64)))
        .collect();
    ResidueSeries::new(ring, f.offset24(), 24, coeffs, f.prec24())
}

pub fn sturm(k: u32) -> usize {
    (k / 12) as usize + 1
}

pub fn dim_mk(k: u32) -> usize {
    if k % 2 == 1 {
        0
    } else if k % 12 == 2 {
        (k / 12) as usize
    } else {
        (k / 12) as usize + 1
    }
}

pub fn dim_sk(k: u32) -> usize {
    if k < 12 || k % 2 == 1 {
        0
    } else {
        dim_mk(k) - 1
    }
}

/// A diagonal basis of M_k or S_k at level one, reduced mod ℓᵐ.
///
/// Row `i` is `q^{p_i} + O(q^{d})` with pivots `p_i = i` (or `i+1` for cusp
/// forms) and every row vanishes at the other pivots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormBasis {
    pub weight: u32,
    pub cuspidal: bool,
    pub ring: RingSpec,
    /// Coefficients known for n < prec.
    pub prec: i64,
    rows: Vec<ResidueSeries>,
}

type BasisKey = (u32, bool, RingSpec);

fn basis_cache() -> &'static RwLock<HashMap<BasisKey, Arc<FormBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<BasisKey, Arc<FormBasis>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized basis of M_k (or S_k) known for integer exponents below `prec`.
pub fn basis_mk(k: u32, cuspidal: bool, prec: i64, ring: RingSpec) -> Result<Arc<FormBasis>> {
    if k % 2 == 1 {
        return Err(Error::OddWeight(k as i64));
    }
    let key = (k, cuspidal, ring);
    if let Some(b) = basis_cache().read().expect("basis cache poisoned").get(&key) {
        if b.prec >= prec {
            return Ok(if b.prec == prec { b.clone() } else { Arc::new(b.truncated(prec)?) });
        }
    }
    let full = Arc::new(build_basis(k, cuspidal, prec, ring)?);
    basis_cache().write().expect("basis cache poisoned").insert(key, full.clone());
    Ok(full)
}

fn build_basis(k: u32, cuspidal: bool, prec: i64, ring: RingSpec) -> Result<FormBasis> {
    let d = dim_mk(k);
    if d == 0 || (cuspidal && d == 1) {
        return Ok(FormBasis { weight: k, cuspidal, ring, prec, rows: Vec::new() });
    }
    let p24 = 24 * prec;
    let e4 = eisenstein(4, p24, ring)?.series;
    let e6 = eisenstein(6, p24, ring)?.series;
    let dl = delta(ring, p24)?;
    let max_a = (k / 4) as usize;
    let mut e4_pows = vec![ResidueSeries::one(ring, p24)];
    for i in 1..=max_a {
        let next = e4_pows[i - 1].mul_to(&e4, p24)?;
        e4_pows.push(next);
    }
    let mut delta_pow = ResidueSeries::one(ring, p24);
    let mut rows = Vec::with_capacity(d);
    for j in 0..d {
        let rest = k - 12 * j as u32;
        let (a, b) = if rest % 4 == 0 { (rest / 4, 0) } else { ((rest - 6) / 4, 1) };
        let mut g = delta_pow.mul_to(&e4_pows[a as usize], p24)?;
        if b == 1 {
            g = g.mul_to(&e6, p24)?;
        }
        rows.push(g.to_integral()?);
        if j + 1 < d {
            delta_pow = delta_pow.mul_to(&dl, p24)?;
        }
    }
    // rows are upper unitriangular in the first d coefficients; clear above the diagonal
    for i in (0..d).rev() {
        for j in 0..i {
            let c = rows[j].coeff_int(i as i64).unwrap_or(0);
            if c != 0 {
                rows[j] = rows[j].sub(&rows[i].scale(c))?;
            }
        }
    }
    if cuspidal {
        rows.remove(0);
    }
    Ok(FormBasis { weight: k, cuspidal, ring, prec, rows })
}

impl FormBasis {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[ResidueSeries] {
        &self.rows
    }

    pub fn sturm(&self) -> usize {
        sturm(self.weight)
    }

    /// Exponent of the leading 1 in row `i`.
    pub fn pivot(&self, i: usize) -> i64 {
        i as i64 + i64::from(self.cuspidal)
    }

    fn truncated(&self, prec: i64) -> Result<FormBasis> {
        let rows = self.rows.iter().map(|r| r.truncate(24 * prec)).collect::<Result<_>>()?;
        Ok(FormBasis { prec, rows, ..self.clone() })
    }

    /// Coordinates of `f` if it agrees with a combination of the basis on
    /// exponents `0..window`.
    pub fn coordinates(&self, f: &ResidueSeries, window: usize) -> Result<Option<Vec<u32>>> {
        if window as i64 > self.prec {
            return Err(Error::InsufficientPrecision { needed: 24 * window as i64, available: 24 * self.prec });
        }
        let ring = self.ring;
        let f = if f.ring() == ring {
            f.clone()
        } else if f.ring().ell() == ring.ell() && f.ring().m() >= ring.m() {
            f.reduce_power(ring.m())?
        } else {
            return Err(Error::RingMismatch(f.ring().to_string(), ring.to_string()));
        };
        let f = f.to_integral()?;
        if f.terms().any(|(e, _)| e < 0) {
            return Ok(None);
        }
        let mut v = f.window(0, window)?;
        let mut coords = Vec::with_capacity(self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            let p = self.pivot(i) as usize;
            let c = if p < window { v[p] } else { 0 };
            if c != 0 {
                for (n, x) in v.iter_mut().enumerate() {
                    let y = row.coeff_int(n as i64).unwrap_or(0);
                    *x = ring.sub(*x, ring.mul(c, y));
                }
            }
            coords.push(c);
        }
        Ok(if v.iter().all(|&x| x == 0) { Some(coords) } else { None })
    }

    /// Σ coords[i]·row_i known below `prec` (integer exponents).
    pub fn combine(&self, coords: &[u32], prec: i64) -> Result<ResidueSeries> {
        if prec > self.prec {
            return Err(Error::InsufficientPrecision { needed: 24 * prec, available: 24 * self.prec });
        }
        let ring = self.ring;
        let mut acc = vec![0u32; prec.max(0) as usize];
        for (row, &c) in self.rows.iter().zip(coords) {
            if c == 0 {
                continue;
            }
            // rows are stored from their leading exponent
            let start = (row.offset24() / 24).max(0) as usize;
            for (x, &y) in acc.iter_mut().skip(start).zip(row.coeffs()) {
                *x = ring.add(*x, ring.mul(c, y));
            }
        }
        ResidueSeries::integral(ring, acc, prec.max(0))
    }
}

/// Filtration ω_ℓ of a form mod ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Filtration {
    NegInfinity,
    Weight(u32),
}

/// The least weight k′ ≡ k_known (mod ℓ−1) whose level-one space contains
/// the reduction of `f` mod ℓ.
///
/// The caller must know that `f` is congruent mod ℓ to a form of weight
/// `k_known`; the test window is `sturm(k_known) + 8` coefficients.
pub fn filtration(f: &ResidueSeries, k_known: u32) -> Result<Filtration> {
    let ell = f.ring().ell();
    let fl = f.reduce_power(1)?.to_integral()?;
    let window = sturm(k_known) + 8;
    let v = fl.window(0, window)?;
    if v.iter().all(|&x| x == 0) && !fl.terms().any(|(e, _)| e < 0) {
        return Ok(Filtration::NegInfinity);
    }
    let step = ell - 1;
    let mut k = k_known % step;
    while k <= k_known {
        let b = basis_mk(k, false, window as i64, fl.ring())?;
        if b.coordinates(&fl, window)?.is_some() {
            return Ok(Filtration::Weight(k));
        }
        k += step;
    }
    Err(Error::NoCandidateWeight(k_known))
}
