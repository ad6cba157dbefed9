//! Backward precision propagation through a schedule of tower steps.

use serde::{Deserialize, Serialize};

use crate::ring::ceil_div;

/// One step of a tower recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TowerStep {
    /// Atkin decimation U(ℓ).
    U,
    /// Multiplication by Φ_ℓ^r followed by U(ℓ).
    D { r: u32 },
}

/// Required precision (24ths) at each level of a schedule.
///
/// `levels[0]` is the input requirement, `levels[i]` the precision needed
/// after the first `i` steps; the last entry is the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPlan {
    pub ell: u32,
    pub steps: Vec<TowerStep>,
    pub levels: Vec<i64>,
}

impl PrecisionPlan {
    pub fn input(&self) -> i64 {
        self.levels[0]
    }

    pub fn target(&self) -> i64 {
        *self.levels.last().expect("plan has at least one level")
    }
}

/// Minimal input precision for each level of `steps` so that the output is
/// known below `target_prec24`.
///
/// Each step ends with U(ℓ), so the integer-q requirement is multiplied by ℓ.
/// Multiplying by Φ_ℓ^r costs nothing extra because its valuation is
/// nonnegative and it is expanded to whatever precision the product needs.
pub fn plan_precision(ell: u32, steps: &[TowerStep], target_prec24: i64) -> PrecisionPlan {
    let mut levels = vec![target_prec24];
    let mut cur = target_prec24;
    for _ in steps.iter().rev() {
        cur = 24 * ell as i64 * ceil_div(cur, 24);
        levels.push(cur);
    }
    levels.reverse();
    PrecisionPlan { ell, steps: steps.to_vec(), levels }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_schedule_is_identity() {
        assert_eq!(plan_precision(5, &[], 100).input(), 100);
    }

    #[test]
    fn single_decimation() {
        let p = plan_precision(5, &[TowerStep::U], 100);
        assert!(p.input() >= 500);
        assert_eq!(p.target(), 100);
    }

    #[test]
    fn thirteen_adic_tower() {
        let steps = [TowerStep::D { r: 2 }, TowerStep::U, TowerStep::D { r: 2 }, TowerStep::U];
        let p = plan_precision(13, &steps, 24 * 35);
        assert_eq!(p.input(), 24 * 35 * 13i64.pow(4));
        assert_eq!(p.levels.len(), 5);
        assert!(p.levels.windows(2).all(|w| w[0] >= 13 * w[1]));
    }
}
