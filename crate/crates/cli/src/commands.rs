use std::path::PathBuf;

use ptower::lspaces::{
    d_invariants, hecke_eigenvalue_lifted, k_spt, preset, spt_character, stabilize_with, verify_progression,
    CongruenceReport, DInvariants, LiftedTower, Parity, ScalarOutcome, StabilizationResult, Verdict,
};
use ptower::operators::Character;
use ptower::partitions::{build_tower, extract_from_level, tower_plan, PValue, TowerKind};
use ptower::record::{build_tower_cached, CacheEntry, SeriesCache};
use ptower::{Error, ResidueSeries, Result};
use serde::Serialize;

use crate::job::{run_jobs, Target};
use crate::output::{self, Table};
use crate::{row, selftest, Format, Status};

/// Global options shared by every command.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub jobs: usize,
}

impl Ctx {
    fn emit<T: Serialize>(&self, value: &T, table: Option<&Table>) -> Result<()> {
        let bytes = output::render(self.format, value, table)?;
        output::write(self.out.as_deref(), &bytes)
    }

    fn cache(&self) -> Result<SeriesCache> {
        match &self.cache {
            Some(d) => SeriesCache::open(d),
            None => Err(Error::Invalid("no cache directory; pass --cache or set PTOWER_CACHE".into())),
        }
    }
}

/// One entry of a batch: a result or the error it raised.
#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Entry<T> {
    Done(T),
    Failed { ell: u32, error: String, exit_code: u8 },
}

/// Direct towers beyond this input precision (in 24ths) are read off the lifted tower instead.
const DIRECT_LIMIT24: i64 = 24 * 4_000_000;

#[derive(Debug, Serialize)]
struct LevelOut {
    b: u32,
    coeffs: Vec<u32>,
}

#[derive(Debug, Serialize)]
struct TowerOut {
    kind: TowerKind,
    ell: u32,
    m: u32,
    method: &'static str,
    levels: Vec<LevelOut>,
}

fn level_out(b: u32, s: &ResidueSeries, prec: i64) -> Result<LevelOut> {
    let s = s.to_integral()?;
    let n = s.integral_prec().min(prec);
    Ok(LevelOut { b, coeffs: (0..n).map(|i| s.coeff_int(i).unwrap_or(0)).collect() })
}

pub fn tower(ctx: &Ctx, target: &Target, bmax: u32, prec: i64) -> Result<Status> {
    let spec = target.single()?;
    let (kind, ring) = (spec.kind, spec.ring);
    let base = kind.base_level();
    if prec <= 0 {
        return Err(Error::Invalid("--prec must be positive".into()));
    }
    if bmax < base {
        return Err(Error::Invalid(format!("tower for {kind} starts at level {base}")));
    }
    let plan = tower_plan(kind, ring, bmax, 24 * prec);
    let direct = plan.input() <= DIRECT_LIMIT24;
    let levels = if direct {
        let t = match &ctx.cache {
            Some(_) => build_tower_cached(&ctx.cache()?, kind, ring, bmax, 24 * prec)?,
            None => build_tower(kind, ring, bmax, 24 * prec)?,
        };
        t.levels().map(|(b, s)| level_out(b, s, prec)).collect::<Result<Vec<_>>>()?
    } else {
        let mut lt = LiftedTower::new(kind, ring, 0)?;
        (base..=bmax).map(|b| level_out(b, &lt.level_series(b, prec)?, prec)).collect::<Result<Vec<_>>>()?
    };
    let mut table = Table::new(&["b", "n", "coeff"]);
    for l in &levels {
        for (n, c) in l.coeffs.iter().enumerate() {
            table.push(row![l.b, n, c]);
        }
    }
    let out = TowerOut { kind, ell: ring.ell(), m: ring.m(), method: if direct { "direct" } else { "lifted" }, levels };
    ctx.emit(&out, Some(&table))?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct ExtractOut {
    kind: TowerKind,
    ell: u32,
    m: u32,
    b: u32,
    values: Vec<PValue>,
    /// Nonzero coefficients off the argument grid; empty for a correct extraction.
    defects: Vec<i64>,
}

pub fn extract(ctx: &Ctx, target: &Target, b: u32, nmax: usize) -> Result<Status> {
    let spec = target.single()?;
    let (kind, ring) = (spec.kind, spec.ring);
    if kind == TowerKind::Spt && b == 0 {
        return Err(Error::Invalid("P(spt, b) needs b >= 1".into()));
    }
    let mut lt = LiftedTower::new(kind, ring, 0)?;
    let t = if b % 2 == 0 { 1 } else { ring.ell() as i64 };
    let mut prec = nmax as i64 + (kind.eta_exponent() as i64 * t + 23) / 24 + 2;
    let p = loop {
        let p = extract_from_level(kind, &lt.level_series(b, prec)?, b)?;
        if p.values().len() >= nmax {
            break p;
        }
        prec *= 2;
    };
    let values: Vec<PValue> = p.values().into_iter().take(nmax).collect();
    let mut table = Table::new(&["n", "arg", "value"]);
    for v in &values {
        table.push(row![v.n, v.arg, v.value]);
    }
    let out = ExtractOut { kind, ell: ring.ell(), m: ring.m(), b, values, defects: p.defects() };
    ctx.emit(&out, Some(&table))?;
    Ok(Status::Ok)
}

pub fn stabilize(ctx: &Ctx, target: &Target, parity: Option<&str>, bmax: u32, window: usize) -> Result<Status> {
    let specs = target.specs()?;
    let parities = match parity {
        Some(p) => vec![p.parse::<Parity>()?],
        None => vec![Parity::Odd, Parity::Even],
    };
    let jobs: Vec<_> = specs.iter().flat_map(|s| parities.iter().map(move |&p| (*s, p))).collect();
    let results = run_jobs(ctx.jobs, &jobs, |(s, p)| stabilize_with(s.kind, *p, s.ring, bmax, window))?;
    if let [only] = results.as_slice() {
        only.as_ref().map_err(Clone::clone)?;
    }
    let mut status = Status::Ok;
    let mut table = Table::new(&[
        "kind", "ell", "m", "parity", "weight", "first_stable", "b_ell", "rank", "rank_mod_ell", "bound_r", "bound_b",
        "d", "d_prime", "tentative",
    ]);
    let mut entries: Vec<Entry<StabilizationResult>> = Vec::new();
    for ((s, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(r) => {
                let opt = |x: Option<u32>| x.map_or(String::new(), |v| v.to_string());
                table.push(row![
                    r.kind.tag(),
                    r.ell,
                    r.m,
                    r.parity,
                    r.weight,
                    r.first_stable,
                    opt(r.b_ell),
                    r.rank,
                    r.rank_mod_ell,
                    r.bound_r,
                    r.bound_b,
                    r.d.d,
                    opt(r.d.d_prime),
                    r.tentative
                ]);
                entries.push(Entry::Done(r));
            }
            Err(e) => {
                status = status.join(Status::of_error(&e));
                entries.push(Entry::Failed { ell: s.ring.ell(), error: e.to_string(), exit_code: crate::error_code(&e) });
            }
        }
    }
    if entries.len() == 1 {
        ctx.emit(&entries[0], Some(&table))?;
    } else {
        ctx.emit(&entries, Some(&table))?;
    }
    Ok(status)
}

pub fn dinv(ctx: &Ctx, target: &Target) -> Result<Status> {
    let specs = target.specs()?;
    let results = run_jobs(ctx.jobs, &specs, |s| d_invariants(s.kind, s.ring.ell()))?;
    if let [only] = results.as_slice() {
        only.as_ref().map_err(Clone::clone)?;
    }
    let mut status = Status::Ok;
    let mut table = Table::new(&["kind", "ell", "d", "d_prime", "stable_dim_odd", "stable_dim_even"]);
    let mut entries: Vec<Entry<DInvariants>> = Vec::new();
    for (s, r) in specs.iter().zip(results) {
        match r {
            Ok(d) => {
                let dp = d.d_prime.map_or(String::new(), |v| v.to_string());
                let se = d.stable_dim_even.map_or(String::new(), |v| v.to_string());
                table.push(row![d.kind.tag(), d.ell, d.d, dp, d.stable_dim_odd, se]);
                entries.push(Entry::Done(d));
            }
            Err(e) => {
                status = status.join(Status::of_error(&e));
                entries.push(Entry::Failed { ell: s.ring.ell(), error: e.to_string(), exit_code: crate::error_code(&e) });
            }
        }
    }
    if entries.len() == 1 {
        ctx.emit(&entries[0], Some(&table))?;
    } else {
        ctx.emit(&entries, Some(&table))?;
    }
    Ok(status)
}

#[derive(Debug, Serialize)]
struct ImageTerm {
    n: i64,
    coeff: u32,
}

#[derive(Debug, Serialize)]
struct HeckeOut {
    ell: u32,
    m: u32,
    b: u32,
    c: u32,
    /// Weight λ + 1/2.
    lambda: u32,
    chi: Character,
    outcome: ScalarOutcome,
    unit_coefficients: usize,
    /// Nonzero terms of the image of P(24z).
    image: Vec<ImageTerm>,
}

pub fn hecke(ctx: &Ctx, target: &Target, b: u32, c: u32, nmax: usize) -> Result<Status> {
    let spec = target.single()?;
    if spec.kind != TowerKind::Spt {
        return Err(Error::Invalid("hecke works on the spt tower; pass --spt".into()));
    }
    if b == 0 {
        return Err(Error::Invalid("P(spt, b) needs b >= 1".into()));
    }
    let ring = spec.ring;
    let (ell, m) = (ring.ell(), ring.m());
    if c == ell {
        return Err(Error::Invalid("c must differ from ell".into()));
    }
    let lambda = k_spt(ell, m) - 1;
    let chi = spt_character(ell, b);
    let mut lt = LiftedTower::new(TowerKind::Spt, ring, 0)?;
    let (_, e) = hecke_eigenvalue_lifted(&mut lt, b, c, lambda, chi, nmax)?;
    let image: Vec<ImageTerm> = e.image.terms().filter(|&(_, x)| x != 0).map(|(n, x)| ImageTerm { n: n / 24, coeff: x }).collect();
    let mut table = Table::new(&["n", "coeff"]);
    for t in &image {
        table.push(row![t.n, t.coeff]);
    }
    let status = match e.outcome {
        ScalarOutcome::Scalar(_) => Status::Ok,
        ScalarOutcome::NoScalar { .. } => Status::Fails,
    };
    let out = HeckeOut { ell, m, b, c, lambda, chi, outcome: e.outcome, unit_coefficients: e.unit_coefficients, image };
    ctx.emit(&out, Some(&table))?;
    Ok(status)
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Holds => Status::Ok,
        Verdict::Fails => Status::Fails,
        Verdict::Insufficient => Status::Insufficient,
    }
}

pub fn verify(ctx: &Ctx, presets: &[String], ells: &[u32], b: Option<u32>, nmax: Option<i64>) -> Result<Status> {
    let ells: Vec<Option<u32>> = if ells.is_empty() { vec![None] } else { ells.iter().copied().map(Some).collect() };
    // every family is resolved before any evaluation starts
    let mut families = Vec::new();
    for name in presets {
        for &ell in &ells {
            let f = preset(name, ell, b)?;
            let f = match nmax {
                Some(n) if n < f.n_start => return Err(Error::Invalid(format!("--nmax {n} is below the first n {}", f.n_start))),
                Some(n) => f.clone().with_range(f.n_start, n),
                None => f,
            };
            if !families.contains(&f) {
                families.push(f);
            }
        }
    }
    let results = run_jobs(ctx.jobs, &families, verify_progression)?;
    let reports: Vec<CongruenceReport> = results.into_iter().collect::<Result<_>>()?;
    let status = reports.iter().fold(Status::Ok, |s, r| s.join(verdict_status(r.verdict)));
    let mut table = Table::new(&["family", "ell", "n", "lhs", "rhs", "holds"]);
    for (f, r) in families.iter().zip(&reports) {
        for w in &r.witnesses {
            table.push(row![r.family, f.ell, w.n, w.lhs, w.rhs, w.holds]);
        }
    }
    for r in &reports {
        eprintln!("{}: {} [{}]", r.family, r.statement, serde_json::to_value(r.verdict).unwrap_or_default());
    }
    if let [only] = reports.as_slice() {
        ctx.emit(only, Some(&table))?;
    } else {
        ctx.emit(&reports, Some(&table))?;
    }
    Ok(status)
}

pub fn selftest(ctx: &Ctx) -> Result<Status> {
    let results = selftest::run(ctx.jobs)?;
    let mut table = Table::new(&["check", "passed", "detail"]);
    for r in &results {
        eprintln!("{} {} ({})", if r.passed { "pass" } else { "FAIL" }, r.name, r.detail);
        table.push(row![r.name, r.passed, r.detail]);
    }
    ctx.emit(&results, Some(&table))?;
    Ok(if results.iter().all(|r| r.passed) { Status::Ok } else { Status::Fails })
}

pub fn cache_ls(ctx: &Ctx) -> Result<Status> {
    let entries: Vec<CacheEntry> = ctx.cache()?.ls()?;
    let mut table = Table::new(&["kind", "ell", "m", "b", "prec24", "bytes"]);
    for e in &entries {
        let k = &e.key;
        table.push(row![k.kind, k.ell, k.m, k.b, k.prec24, e.bytes]);
    }
    ctx.emit(&entries, Some(&table))?;
    Ok(Status::Ok)
}

pub fn cache_gc(ctx: &Ctx) -> Result<Status> {
    let cache = ctx.cache()?;
    let removed: Vec<String> = cache
        .gc()?
        .iter()
        .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()))
        .collect();
    let mut table = Table::new(&["removed"]);
    for r in &removed {
        table.push(row![r]);
    }
    ctx.emit(&removed, Some(&table))?;
    Ok(Status::Ok)
}
