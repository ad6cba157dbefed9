//! Prints stabilization data for the spt tower at small primes and for p_2 at 13.
//!
//! cargo run --release -p ptower --example survey -- [m]

use std::time::Instant;

use ptower::lspaces::{stabilize, Parity};
use ptower::partitions::TowerKind;
use ptower::RingSpec;

fn main() -> ptower::Result<()> {
    let m: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let mut cases: Vec<(TowerKind, u32)> =
        [5, 7, 11, 13, 17, 19, 29, 31, 37].iter().map(|&l| (TowerKind::Spt, l)).collect();
    cases.push((TowerKind::Pr(2), 13));
    println!("kind  ell  m  weight  rank  mod-ell  R  b_ell  bound  d");
    for (kind, ell) in cases {
        let t = Instant::now();
        let ring = RingSpec::new(ell, m)?;
        let s = stabilize(kind, Parity::Odd, ring, 12)?;
        println!(
            "{:<5} {:>3} {:>2} {:>7} {:>5} {:>8} {:>2} {:>6} {:>6}  {}{}  ({:.1?})",
            kind.tag(),
            ell,
            m,
            s.weight,
            s.rank,
            s.rank_mod_ell,
            s.bound_r,
            s.b_ell.map_or("-".into(), |b| b.to_string()),
            s.bound_b,
            s.d.d,
            s.d.d_prime.map_or(String::new(), |d| format!("/{d}")),
            t.elapsed()
        );
    }
    Ok(())
}
