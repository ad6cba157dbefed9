//! The built-in example suite run by `ptower selftest`.

use ptower::lspaces::{
    d_invariants, hecke_eigenvalue_lifted, k_spt, preset, r_bound, scalar_relation, spt_character, stabilize,
    verify_progression, LiftedTower, Parity, ScalarOutcome,
};
use ptower::partitions::{extract_from_level, PSeries, TowerKind};
use ptower::record::{decode_series, encode_series};
use ptower::{Error, ResidueSeries, RingSpec, Result};
use serde::Serialize;

use crate::job::run_jobs;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("p2 mod 13: P(4) = 10 P(2) on the lifted tower", lifted_p2_13),
    ("p2(13^4 n + 26181) = 10 p2(169 n + 155) mod 13", || preset_with_scalar("example1", 10)),
    ("spt mod 11: P(2) = P(4) = 4 + 7q + 7q^2", lifted_spt_11),
    ("s(121 n + 116) = s(11^4 n + 14031) mod 11", || preset_with_scalar("example2", 1)),
    ("T(25) on P(spt, 2; 24z) mod 17 has eigenvalue 2", hecke_17),
    ("s(36125 n + 28599) = 2 s(1445 n + 1144) mod 17", || preset_with_scalar("example3", 2)),
    ("p(13^4 n + 27371) = 45 p(169 n + 162) mod 169", || preset_with_scalar("intro", 45)),
    ("spt vanishing modulo powers of 5, 7, 13", garvan),
    ("spt ranks at m = 1", spt_ranks),
    ("stabilization index within 2m + 1 (spt) and 2m (p2)", stabilization_index),
    ("d-invariants vanish for spt at 11, 17 and p2 at 13", d_zero),
    ("99 is rejected as a prime", reject_99),
    ("series records round-trip mod 169", record_roundtrip),
];

pub fn run(jobs: usize) -> Result<Vec<CheckResult>> {
    run_jobs(jobs, CHECKS, |&(name, check)| match check() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    })
}

fn p_series(lt: &mut LiftedTower, b: u32, prec: i64) -> Result<PSeries> {
    let level = lt.level_series(b, prec)?;
    extract_from_level(lt.kind(), &level, b)
}

fn first_values(p: &PSeries, k: usize) -> Vec<u32> {
    p.values().iter().take(k).map(|v| v.value).collect()
}

fn relation(f: &PSeries, g: &PSeries) -> Result<(Option<u32>, usize)> {
    Ok(match scalar_relation(&f.series, &g.series)? {
        ScalarOutcome::Scalar(s) => (Some(s.c), s.checked),
        ScalarOutcome::NoScalar { .. } => (None, 0),
    })
}

fn lifted_p2_13() -> Result<(bool, String)> {
    let mut lt = LiftedTower::new(TowerKind::Pr(2), RingSpec::new(13, 1)?, 0)?;
    let (p2, p4) = (p_series(&mut lt, 2, 40)?, p_series(&mut lt, 4, 40)?);
    let (c, checked) = relation(&p4, &p2)?;
    let lead = first_values(&p4, 3);
    Ok((c == Some(10) && checked >= 25 && lead == [1, 4, 1], format!("C = {c:?} on {checked} coefficients, P(4) starts {lead:?}")))
}

fn lifted_spt_11() -> Result<(bool, String)> {
    let mut lt = LiftedTower::new(TowerKind::Spt, RingSpec::new(11, 1)?, 0)?;
    let (p2, p4) = (p_series(&mut lt, 2, 40)?, p_series(&mut lt, 4, 40)?);
    let (c, checked) = relation(&p4, &p2)?;
    let lead = first_values(&p2, 3);
    Ok((c == Some(1) && checked >= 20 && lead == [4, 7, 7], format!("C = {c:?} on {checked} coefficients, P(2) starts {lead:?}")))
}

fn preset_with_scalar(name: &str, want: u32) -> Result<(bool, String)> {
    let r = verify_progression(&preset(name, None, None)?)?;
    let c = r.scalars.first().and_then(|s| s.value.scalar()).map(|s| s.c);
    Ok((r.holds() && c == Some(want), format!("{:?} on n = {}..{}, C = {c:?}", r.verdict, r.range.0, r.range.1)))
}

fn hecke_17() -> Result<(bool, String)> {
    let ring = RingSpec::new(17, 1)?;
    let mut lt = LiftedTower::new(TowerKind::Spt, ring, 0)?;
    let (_, e) = hecke_eigenvalue_lifted(&mut lt, 2, 5, k_spt(17, 1) - 1, spt_character(17, 2), 12)?;
    let c = e.outcome.scalar().map(|s| s.c);
    let listed = [(23, 13), (71, 13), (119, 4), (143, 8)];
    let image = |n: i64| e.image.coeff_int(n);
    let matches = listed.iter().all(|&(n, v)| image(n) == Some(v));
    Ok((c == Some(2) && matches, format!("eigenvalue {c:?}, listed image coefficients match: {matches}")))
}

fn garvan() -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for (ell, b) in [(5, 2), (5, 3), (7, 2), (13, 2)] {
        for name in ["garvan", "garvan-weak"] {
            if !verify_progression(&preset(name, Some(ell), Some(b))?)?.holds() {
                bad.push(format!("{name} {ell}^{b}"));
            }
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "all hold for n = 0..10".into() } else { bad.join(", ") }))
}

fn spt_ranks() -> Result<(bool, String)> {
    let mut seen = Vec::new();
    let mut ok = true;
    for (ell, want) in [(5, 0), (7, 0), (13, 0), (11, 1), (17, 1), (19, 1), (29, 1), (31, 1), (37, 1)] {
        let s = stabilize(TowerKind::Spt, Parity::Odd, RingSpec::new(ell, 1)?, 12)?;
        ok &= s.rank == want && s.rank as i64 <= r_bound(TowerKind::Spt, ell);
        seen.push(format!("{ell}:{}", s.rank));
    }
    Ok((ok, seen.join(" ")))
}

fn stabilization_index() -> Result<(bool, String)> {
    let mut seen = Vec::new();
    let mut ok = true;
    for m in [1, 2] {
        let cases = [5, 7, 11, 13, 17, 19].map(|l| (TowerKind::Spt, l, 2 * m + 1)).into_iter().chain([(TowerKind::Pr(2), 13, 2 * m)]);
        for (kind, ell, limit) in cases {
            let s = stabilize(kind, Parity::Odd, RingSpec::new(ell, m)?, 12)?;
            let b = s.b_ell.ok_or(Error::NotStabilized(12))?;
            ok &= b <= limit;
            seen.push(format!("{}@{ell}^{m}:{b}", kind.tag()));
        }
    }
    Ok((ok, seen.join(" ")))
}

fn d_zero() -> Result<(bool, String)> {
    let ds = [d_invariants(TowerKind::Spt, 11)?, d_invariants(TowerKind::Spt, 17)?, d_invariants(TowerKind::Pr(2), 13)?];
    let ok = ds.iter().all(|d| d.d == 0);
    Ok((ok, ds.iter().map(|d| format!("{}@{}:{}", d.kind.tag(), d.ell, d.d)).collect::<Vec<_>>().join(" ")))
}

fn reject_99() -> Result<(bool, String)> {
    let r = RingSpec::new(99, 1);
    Ok((r == Err(Error::NotPrime(99)), format!("{r:?}")))
}

fn record_roundtrip() -> Result<(bool, String)> {
    let ring = RingSpec::new(13, 2)?;
    let coeffs: Vec<i64> = (0..200i64).map(|i| i * i * 7 - 90).collect();
    let s = ResidueSeries::from_poly(ring, -5, 24, &coeffs, 24 * 200)?;
    let back = decode_series(&encode_series(&s))?;
    Ok((back == s, format!("{} coefficients", coeffs.len())))
}
