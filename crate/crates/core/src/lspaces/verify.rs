use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::scalar::{scalar_relation_vec, ScalarOutcome};
use crate::error::{Error, Result};
use crate::partitions::{a_series, delta_ell, pr_series, spt_series};
use crate::ring::{gcd, RingSpec};
use crate::series::ResidueSeries;

/// Largest argument a verification may evaluate.
pub const MAX_ARGUMENT: i128 = 20_000_000;

/// Arithmetic function appearing in a congruence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    /// Coefficients of ∏(1 − qⁿ)^{−r}.
    Pr(u32),
    /// Smallest parts function.
    Spt,
    /// 12·spt(n) + (24n − 1)·p(n).
    A,
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Func::Pr(1) => write!(f, "p"),
            Func::Pr(r) => write!(f, "p{r}"),
            Func::Spt => write!(f, "s"),
            Func::A => write!(f, "a"),
        }
    }
}

/// coeff · func(mul·n + add)
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: i64,
    pub func: Func,
    pub mul: i128,
    pub add: i128,
}

impl Term {
    pub fn new(coeff: i64, func: Func, mul: i128, add: i128) -> Self {
        Term { coeff, func, mul, add }
    }

    fn arg(&self, n: i64) -> i128 {
        self.mul * n as i128 + self.add
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff != 1 {
            write!(f, "{}·", self.coeff)?;
        }
        write!(f, "{}({}n + {})", self.func, self.mul, self.add)
    }
}

/// A claimed congruence Σ lhs ≡ Σ rhs (mod ℓᵉ) for n in a range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    pub ell: u32,
    /// Exponent e of the modulus ℓᵉ; e = 0 makes every check vacuous.
    pub exponent: u32,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
    pub n_start: i64,
    pub n_end: i64,
    /// Only n coprime to this number are checked.
    pub coprime_to: Option<i64>,
}

impl Family {
    pub fn with_range(mut self, n_start: i64, n_end: i64) -> Self {
        self.n_start = n_start;
        self.n_end = n_end;
        self
    }

    fn side(terms: &[Term]) -> String {
        if terms.is_empty() {
            return "0".into();
        }
        terms.iter().map(Term::to_string).collect::<Vec<_>>().join(" + ")
    }

    pub fn statement(&self) -> String {
        format!("{} ≡ {} (mod {}^{})", Self::side(&self.lhs), Self::side(&self.rhs), self.ell, self.exponent)
    }

    fn ns(&self) -> impl Iterator<Item = i64> + '_ {
        (self.n_start..=self.n_end).filter(|&n| self.coprime_to.map_or(true, |c| gcd(n, c) == 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Insufficient,
}

/// Both sides at one n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub n: i64,
    pub lhs: u32,
    pub rhs: u32,
    pub holds: bool,
}

/// A named scalar found while checking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarEntry {
    pub label: String,
    pub value: ScalarOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub family: String,
    pub statement: String,
    pub ring: String,
    pub range: (i64, i64),
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub scalars: Vec<ScalarEntry>,
    pub note: Option<String>,
    pub timing: Timing,
}

impl CongruenceReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn table(func: Func, max_arg: i128, ring: RingSpec) -> Result<ResidueSeries> {
    let prec = 24 * (max_arg as i64 + 1);
    match func {
        Func::Pr(r) => pr_series(r, prec, ring),
        Func::Spt => spt_series(prec, ring),
        Func::A => a_series(prec, ring),
    }
}

/// Checks a family over its n-range by direct evaluation of the functions.
///
/// When both sides have one term, the report also fits the scalar C with
/// lhs ≡ C·f(rhs argument).
pub fn verify_progression(family: &Family) -> Result<CongruenceReport> {
    let started = Instant::now();
    let ns: Vec<i64> = family.ns().collect();
    let mut report = CongruenceReport {
        family: family.name.clone(),
        statement: family.statement(),
        ring: format!("Z/{}^{}", family.ell, family.exponent),
        range: (family.n_start, family.n_end),
        verdict: Verdict::Holds,
        witnesses: Vec::new(),
        scalars: Vec::new(),
        note: None,
        timing: Timing { elapsed_ms: 0 },
    };
    if family.exponent == 0 {
        report.note = Some("modulus is 1; every check holds trivially".into());
        report.witnesses = ns.iter().map(|&n| Witness { n, lhs: 0, rhs: 0, holds: true }).collect();
        report.timing.elapsed_ms = started.elapsed().as_millis();
        return Ok(report);
    }
    let ring = RingSpec::new(family.ell, family.exponent)?;
    let terms = family.lhs.iter().chain(&family.rhs);
    let mut max_arg: BTreeMap<Func, i128> = BTreeMap::new();
    for t in terms.clone() {
        for &n in &ns {
            let a = t.arg(n);
            let e = max_arg.entry(t.func).or_insert(0);
            *e = (*e).max(a);
        }
    }
    if let Some((f, &a)) = max_arg.iter().find(|(_, &a)| a > MAX_ARGUMENT) {
        report.verdict = Verdict::Insufficient;
        report.note = Some(format!("{f}({a}) is beyond the direct evaluation limit {MAX_ARGUMENT}"));
        report.timing.elapsed_ms = started.elapsed().as_millis();
        return Ok(report);
    }
    let tables: BTreeMap<Func, ResidueSeries> =
        max_arg.iter().map(|(&f, &a)| table(f, a, ring).map(|s| (f, s))).collect::<Result<_>>()?;
    let eval = |t: &Term, n: i64| -> Result<u32> {
        let a = t.arg(n);
        let v = if a < 0 {
            0
        } else {
            tables[&t.func]
                .coeff_int(a as i64)
                .ok_or(Error::InsufficientPrecision { needed: 24 * (a as i64 + 1), available: 0 })?
        };
        Ok(ring.mul(ring.reduce(t.coeff), v))
    };
    let side = |ts: &[Term], n: i64| -> Result<u32> { ts.iter().try_fold(0, |acc, t| Ok(ring.add(acc, eval(t, n)?))) };
    for &n in &ns {
        let (l, r) = (side(&family.lhs, n)?, side(&family.rhs, n)?);
        report.witnesses.push(Witness { n, lhs: l, rhs: r, holds: l == r });
    }
    if report.witnesses.iter().any(|w| !w.holds) {
        report.verdict = Verdict::Fails;
    }
    if let ([l], [r]) = (family.lhs.as_slice(), family.rhs.as_slice()) {
        let unit = |t: &Term| Term { coeff: 1, ..t.clone() };
        let f: Vec<u32> = ns.iter().map(|&n| eval(&unit(l), n)).collect::<Result<_>>()?;
        let g: Vec<u32> = ns.iter().map(|&n| eval(&unit(r), n)).collect::<Result<_>>()?;
        report.scalars.push(ScalarEntry {
            label: format!("C with {} ≡ C·{}", unit(l), unit(r)),
            value: scalar_relation_vec(&f, &g, ring),
        });
    }
    report.timing.elapsed_ms = started.elapsed().as_millis();
    Ok(report)
}

/// Names accepted by [`preset`].
pub const PRESETS: &[&str] = &["example1", "example2", "example3", "intro", "garvan", "garvan-weak"];

/// Built-in congruence families. `garvan` and `garvan-weak` take ℓ and b;
/// the others ignore them.
pub fn preset(name: &str, ell: Option<u32>, b: Option<u32>) -> Result<Family> {
    let fam = |name: &str, ell, exponent, lhs, rhs, n_end| Family {
        name: name.into(),
        ell,
        exponent,
        lhs,
        rhs,
        n_start: 0,
        n_end,
        coprime_to: None,
    };
    let p = |c, mul, add| Term::new(c, Func::Pr(1), mul, add);
    let p2 = |c, mul, add| Term::new(c, Func::Pr(2), mul, add);
    let s = |c, mul, add| Term::new(c, Func::Spt, mul, add);
    match name {
        "example1" => Ok(fam(name, 13, 1, vec![p2(1, 13i128.pow(4), 26181)], vec![p2(10, 169, 155)], 20)),
        "example2" => Ok(fam(name, 11, 1, vec![s(1, 121, 116)], vec![s(1, 11i128.pow(4), 14031)], 5)),
        "example3" => Ok(Family {
            n_start: 1,
            coprime_to: Some(5),
            ..fam(name, 17, 1, vec![s(1, 36125, 28599)], vec![s(2, 1445, 1144)], 3)
        }),
        "intro" => Ok(fam(name, 13, 2, vec![p(1, 13i128.pow(4), 27371)], vec![p(45, 169, 162)], 10)),
        "garvan" | "garvan-weak" => {
            let ell = ell.ok_or_else(|| Error::Invalid(format!("preset {name} needs --ell")))?;
            let b = b.ok_or_else(|| Error::Invalid(format!("preset {name} needs --b")))?;
            RingSpec::new(ell, 1)?;
            if b == 0 {
                return Err(Error::Invalid("b must be positive".into()));
            }
            let exponent = if name == "garvan" { (b + 1) / 2 } else { (b - 1) / 2 };
            let delta = delta_ell(ell, b)? as i128;
            Ok(fam(name, ell, exponent, vec![s(1, (ell as i128).pow(b), delta)], vec![], 10))
        }
        _ => Err(Error::Invalid(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_families() {
        // Ramanujan: p(5n + 4) ≡ 0 (mod 5)
        let f = Family {
            name: "ramanujan5".into(),
            ell: 5,
            exponent: 1,
            lhs: vec![Term::new(1, Func::Pr(1), 5, 4)],
            rhs: vec![],
            n_start: 0,
            n_end: 30,
            coprime_to: None,
        };
        let r = verify_progression(&f).unwrap();
        assert!(r.holds());
        assert_eq!(r.witnesses.len(), 31);
        // p(5n + 3) ≢ 0 (mod 5)
        let g = Family { lhs: vec![Term::new(1, Func::Pr(1), 5, 3)], ..f };
        let r = verify_progression(&g).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(!r.witnesses[0].holds);
    }

    #[test]
    fn presets_resolve() {
        for name in PRESETS {
            let f = preset(name, Some(5), Some(3)).unwrap();
            assert!(!f.lhs.is_empty());
        }
        assert!(preset("garvan", None, Some(2)).is_err());
        assert!(preset("nope", None, None).is_err());
        let g = preset("garvan", Some(5), Some(3)).unwrap();
        assert_eq!((g.exponent, g.lhs[0].add), (2, 99));
    }

    #[test]
    fn vacuous_modulus_and_oversized_arguments() {
        let r = verify_progression(&preset("garvan-weak", Some(7), Some(2)).unwrap()).unwrap();
        assert!(r.holds() && r.note.is_some());
        let big = preset("intro", None, None).unwrap().with_range(0, 1000);
        assert_eq!(verify_progression(&big).unwrap().verdict, Verdict::Insufficient);
    }

    #[test]
    fn scalar_reported_for_example2() {
        let r = verify_progression(&preset("example2", None, None).unwrap().with_range(0, 3)).unwrap();
        assert!(r.holds());
        let c = r.scalars[0].value.scalar().unwrap();
        assert_eq!(c.c, 1);
    }
}
