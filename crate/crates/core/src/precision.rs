//! Shared precision-escalation policy for signed permutation sums.
//!
//! Fermionic sums cancel by construction as q → 0 (the antisymmetrized state
//! annihilates at q = 0), so a sum that is perfectly well-conditioned term by
//! term can lose most of its mantissa in the final subtraction. Both the
//! class-summed engine and the brute-force enumeration measure the damage as
//!
//!   condition = |Σ signed overlap terms| / Σ |overlap terms| ∈ (0, 1]
//!
//! and rerun the whole pass at wider mantissas until the surviving digits are
//! provably sufficient. The acceptance rule bounds the worst-case relative
//! error of a sum of ≤ 1000 terms: error ≈ terms · 2^−bits / condition, so a
//! level is trusted only when condition ≥ 1000 · 2^−bits / 1e−12. At 53 bits
//! that means condition ≥ ~0.11 (bosonic sums sit at exactly 1 and never
//! escalate); each wider rung relaxes the bar by the full mantissa gain.

use crate::error::{Error, Result};

/// Mantissa widths tried in order. The last entry is the hard cap.
pub(crate) const LADDER: [u32; 5] = [53, 128, 256, 512, 1024];

/// Worst-case relative error accepted for an escalated sum.
const TARGET: f64 = 1e-12;

/// Headroom for term count and per-term rounding in the error model.
const TERM_GUARD: f64 = 1e3;

/// Whether a pass at `bits` with measured `condition` is accurate enough.
/// Compared in log₂ space: 2^−1024 underflows f64, the logs never do.
pub(crate) fn accepted(bits: u32, condition: f64) -> bool {
    condition > 0.0
        && condition.is_finite()
        && condition.log2() >= (TERM_GUARD / TARGET).log2() - bits as f64
}

/// Runs `pass` up the precision ladder until its result is accepted,
/// returning the result, its condition number, and the mantissa width used.
/// A sum still indistinguishable from zero at the cap is a vanishing norm.
pub(crate) fn run<T>(mut pass: impl FnMut(u32) -> Result<(T, f64)>) -> Result<(T, f64, u32)> {
    let mut last_condition = 0.0;
    for &bits in &LADDER {
        let (value, condition) = pass(bits)?;
        if accepted(bits, condition) {
            return Ok((value, condition, bits));
        }
        last_condition = condition;
    }
    Err(Error::VanishingNorm { condition: last_condition, bits: *LADDER.last().unwrap() })
}
