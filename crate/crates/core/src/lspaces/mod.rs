//! Spans of tower levels, their stabilization and the invariants attached
//! to the stable module.

mod dinv;
mod lifted;
mod scalar;
mod verify;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::TowerKind;
use crate::ring::ceil_div;

pub use dinv::{d_invariants, DInvariants};
pub use lifted::{stabilize, stabilize_with, LiftedTower, SpanStep, StabilizationResult};
pub use scalar::{hecke_eigenvalue, hecke_eigenvalue_direct, hecke_eigenvalue_lifted, scalar_relation, scalar_relation_vec, spt_character, EigenResult, ScalarOutcome, ScalarRelation};
pub use verify::{preset, verify_progression, CongruenceReport, Family, Func, Term, Verdict, Witness, PRESETS};

/// Parity class of tower levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(b: u32) -> Self {
        if b % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn other(self) -> Self {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }

    /// Lowest level of this parity in the tower.
    pub fn first_level(self, kind: TowerKind) -> u32 {
        match (kind, self) {
            (TowerKind::Spt, Parity::Odd) => 1,
            (TowerKind::Spt, Parity::Even) => 2,
            (TowerKind::Pr(_), Parity::Odd) => 1,
            (TowerKind::Pr(_), Parity::Even) => 0,
        }
    }

    fn index(self) -> usize {
        match self {
            Parity::Odd => 0,
            Parity::Even => 1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            _ => Err(Error::Invalid(format!("parity must be odd or even, got {s:?}"))),
        }
    }
}

/// Weight of the space holding odd levels of the p_r tower modulo ℓʲ.
pub fn k_odd(r: u32, ell: u32, j: u32) -> u32 {
    match j {
        0 | 1 => (r / 2 + 1) * (ell - 1),
        2 => (r / 2) * ell * (ell - 1),
        _ => ell.pow(j - 1) * (ell - 1),
    }
}

/// ℓ^{m−1}(ℓ−1) + 2, the weight of the spt tower modulo ℓᵐ.
pub fn k_spt(ell: u32, m: u32) -> u32 {
    ell.pow(m - 1) * (ell - 1) + 2
}

/// Level-one weight whose forms reduce to every level of the given parity modulo ℓᵐ.
pub fn ambient_weight(kind: TowerKind, parity: Parity, ell: u32, m: u32) -> u32 {
    match (kind, parity) {
        (TowerKind::Spt, _) => k_spt(ell, m),
        (TowerKind::Pr(_), Parity::Even) => ell.pow(m - 1) * (ell - 1),
        (TowerKind::Pr(r), Parity::Odd) => k_odd(r, ell, m),
    }
}

/// Closed-form upper bound on the rank of the stable module.
pub fn r_bound(kind: TowerKind, ell: u32) -> i64 {
    let l = ell as i64;
    match kind {
        TowerKind::Spt => {
            let base = (l + 1) / 12 - (l * l - 1) / (24 * l);
            if l % 12 == 1 {
                base - 1
            } else {
                base
            }
        }
        TowerKind::Pr(r) => {
            let r = r as i64;
            let k = if r % 2 == 1 { (r + 1) / 2 * (l - 1) } else { (r + 2) / 2 * (l - 1) };
            let base = k / 12 - r * (l * l - 1) / (24 * l);
            if k % 12 == 2 {
                base - 1
            } else {
                base
            }
        }
    }
}

/// Theoretical bound on the stabilization index given the d-invariants.
pub fn b_bound(kind: TowerKind, m: u32, d: &DInvariants) -> u32 {
    match kind {
        TowerKind::Spt => 2 * (d.d + 1) * m + 1,
        TowerKind::Pr(_) => {
            if m == 1 {
                2 * d.d + 1
            } else {
                2 * (d.d + 1) + 2 * (d.d_prime.unwrap_or(0) + 1) * (m - 1)
            }
        }
    }
}

/// ⌈r(ℓ²−1)/(24ℓ²)⌉, the vanishing order required in the d′ invariant.
pub fn d_prime_order(r: u32, ell: u32) -> i64 {
    let l = ell as i64;
    ceil_div(r as i64 * (l * l - 1), 24 * l * l)
}
