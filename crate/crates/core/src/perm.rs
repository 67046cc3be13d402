//! Permutation combinatorics for the symmetrization sum.
//!
//! The bra-side permutation of b-coordinates only enters the matrix elements
//! through its cycle type, so the n! terms collapse to one representative per
//! integer partition of n, weighted by how many permutations share that type
//! and by the permutation signature (fermionic mode) or +1 (bosonic mode).
//!
//! The "marked" variants single out the cycle containing the first pair,
//! which is how the single-coordinate kinetic tables are laid out; the
//! engine itself sums whole cycles and only needs unmarked types.

use std::fmt;

use crate::error::{Error, Result};

/// Exchange statistics of the underlying fermion pairs in the symmetrized sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistics {
    /// Signature ±1 per permutation parity.
    Fermionic,
    /// All permutations weighted +1 (comparison mode).
    Bosonic,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Fermionic => write!(f, "fermionic"),
            Statistics::Bosonic => write!(f, "bosonic"),
        }
    }
}

/// Multiset of cycle lengths of a permutation, stored non-increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    /// Canonicalizes (sorts non-increasing). Empty parts are rejected elsewhere;
    /// the empty type (n = 0 remainder of a marked class) is allowed.
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Sum of parts: the n this type partitions.
    pub fn order(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Count of permutations of S_n with this cycle type: n! / prod(k^{m_k} m_k!).
    pub fn multiplicity(&self) -> u64 {
        let n = self.order();
        let mut denom: u128 = 1;
        let mut run = 0u32;
        let mut prev = 0usize;
        for &k in &self.parts {
            denom *= k as u128;
            if k == prev {
                run += 1;
            } else {
                prev = k;
                run = 1;
            }
            denom *= run as u128;
        }
        (factorial(n) as u128 / denom) as u64
    }

    /// Permutation parity: (-1)^(n - number_of_cycles).
    pub fn signature(&self) -> i32 {
        if (self.order() - self.parts.len()) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "-");
        }
        let joined = self
            .parts
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join("+");
        write!(f, "{joined}")
    }
}

/// One equivalence class of the symmetrization sum.
#[derive(Clone, Debug)]
pub struct PermClass {
    pub cycle_type: CycleType,
    pub multiplicity: u64,
    pub signature: i32,
}

/// All cycle types of S_n in descending lexicographic order
/// (e.g. n = 3 gives 3, 2+1, 1+1+1).
pub fn enumerate_cycle_types(n: usize) -> Result<Vec<CycleType>> {
    check_order(n)?;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(remaining: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<CycleType>) {
        if remaining == 0 {
            out.push(CycleType { parts: cur.clone() });
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            cur.push(part);
            rec(remaining - part, part, cur, out);
            cur.pop();
        }
    }
    rec(n, n, &mut cur, &mut out);
    Ok(out)
}

/// Multiplicity and signature of a class under the given statistics.
pub fn class_weight(t: &CycleType, mode: Statistics) -> (u64, i32) {
    let sig = match mode {
        Statistics::Fermionic => t.signature(),
        Statistics::Bosonic => 1,
    };
    (t.multiplicity(), sig)
}

/// Classes with weights, in `enumerate_cycle_types` order.
pub fn perm_classes(n: usize, mode: Statistics) -> Result<Vec<PermClass>> {
    Ok(enumerate_cycle_types(n)?
        .into_iter()
        .map(|t| {
            let (multiplicity, signature) = class_weight(&t, mode);
            PermClass { cycle_type: t, multiplicity, signature }
        })
        .collect())
}

/// Number of (marked cycle length, partition of remainder) pairs:
/// sum over k = 1..=n of p(n-k). This is the count of distinct integrals
/// when one coordinate is treated separately.
pub fn count_marked_partitions(n: usize) -> Result<u64> {
    check_order(n)?;
    Ok((0..n).map(|m| partition_count(m)).sum())
}

/// A class of the symmetrization sum with the cycle containing the first
/// pair singled out ("marked"). `factor` is the signed number of
/// permutations contributing this element: signature(full type) times
/// (n-1)!/(n-k)! times multiplicity(rest).
#[derive(Clone, Debug)]
pub struct MarkedClass {
    pub marked_len: usize,
    pub rest: CycleType,
    pub full: CycleType,
    pub factor: i64,
}

impl MarkedClass {
    /// Compact label, marked cycle first: "2*+1".
    pub fn label(&self) -> String {
        let mut s = format!("{}*", self.marked_len);
        for k in self.rest.parts() {
            s.push_str(&format!("+{k}"));
        }
        s
    }
}

/// Marked classes ordered identity-first (full types in reverse
/// `enumerate_cycle_types` order, marked length ascending within a type),
/// with fermionic signs.
pub fn marked_classes(n: usize) -> Result<Vec<MarkedClass>> {
    let types = enumerate_cycle_types(n)?;
    let mut out = Vec::new();
    for full in types.into_iter().rev() {
        let mut distinct: Vec<usize> = full.parts().to_vec();
        distinct.dedup();
        distinct.reverse(); // parts are stored descending; mark ascending
        for k in distinct {
            let mut rest_parts = full.parts().to_vec();
            let pos = rest_parts.iter().position(|&p| p == k).unwrap();
            rest_parts.remove(pos);
            let rest = CycleType::new(rest_parts);
            let count = (factorial(n - 1) / factorial(n - k)) as i64 * rest.multiplicity() as i64;
            out.push(MarkedClass {
                marked_len: k,
                rest,
                factor: full.signature() as i64 * count,
                full: full.clone(),
            });
        }
    }
    Ok(out)
}

/// All n! permutations of 0..n in lexicographic order (verification scale).
pub fn enumerate_permutations(n: usize) -> Result<Vec<Vec<usize>>> {
    check_order(n)?;
    if n > 8 {
        return Err(Error::ResourceLimit(format!(
            "permutation enumeration capped at n = 8 ({}! arrays requested)",
            n
        )));
    }
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(factorial(n) as usize);
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    Ok(out)
}

/// Cycle type of an explicit permutation (index-chasing).
pub fn cycle_type_of(perm: &[usize]) -> CycleType {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut parts = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        parts.push(len);
    }
    CycleType::new(parts)
}

fn check_order(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("particle count n must be >= 1".into()));
    }
    if n > 20 {
        return Err(Error::InvalidArgument(format!(
            "particle count n = {n} exceeds 20 (class multiplicities overflow u64)"
        )));
    }
    Ok(())
}

fn factorial(n: usize) -> u64 {
    (2..=n as u64).product()
}

/// Integer partition count p(m) by the coin-counting recurrence.
fn partition_count(m: usize) -> u64 {
    let mut ways = vec![0u64; m + 1];
    ways[0] = 1;
    for part in 1..=m {
        for total in part..=m {
            ways[total] += ways[total - part];
        }
    }
    ways[m]
}
