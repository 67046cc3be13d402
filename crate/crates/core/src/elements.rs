//! Per-cycle integral factors, per-class matrix elements, and the signed
//! class-weighted sums entering the Rayleigh quotient.
//!
//! Each permutation's 2n-coordinate Gaussian factors into independent blocks,
//! one per cycle of the permutation: a k-cycle drags 2k coordinates into a
//! closed chain a−b−a−…−b−a. So instead of n! integrals there is one small
//! integral per cycle length, combined per conjugacy class with the class
//! multiplicity and permutation signature.
//!
//! Raw overlaps scale like π^{nd}·(…)^{−nd/2} and over/underflow quickly with
//! n; since any global factor cancels in the energy quotient, the per-cycle
//! overlap factor `o` is normalized by the k-th power of the 1-cycle factor.
//! The identity class then contributes exactly 1 and all other classes O(1)
//! numbers. Raw values stay available for table comparisons.

use crate::energy::ModelParams;
use crate::error::{Error, Result};
use crate::gauss::{build_pair_form, kinetic_bilinear, overlap_integral, second_moment_sum};
use crate::perm::{perm_classes, CycleType, PermClass, Statistics};
use crate::precision;
use crate::scalar::Scalar;

/// Integral factors of a single k-cycle block, per spatial dimension.
#[derive(Clone, Debug)]
pub struct CycleFactors {
    pub k: usize,
    /// Overlap factor normalized by the k-th power of the 1-cycle overlap.
    pub o: Scalar,
    /// Un-normalized overlap (carries the π^k factor).
    pub o_raw: Scalar,
    /// Kinetic ratio kinetic_bilinear/overlap, summed over the 2k coordinates.
    pub tau: Scalar,
    /// Potential ratio second_moment_sum/overlap over the 2k coordinates.
    pub nu: Scalar,
}

impl CycleFactors {
    /// Kinetic ratio of one coordinate; all 2k coordinates of a cycle are
    /// equivalent by cyclic and a↔b symmetry.
    pub fn per_coordinate_kinetic(&self) -> Scalar {
        &self.tau / &Scalar::from_f64(2.0 * self.k as f64)
    }
}

fn raw_cycle(k: usize, p: &Scalar, q: &Scalar) -> Result<(Scalar, Scalar, Scalar)> {
    let perm: Vec<usize> = (0..k).map(|i| (i + 1) % k).collect();
    let form = build_pair_form(k, p, q, &perm)?;
    let o_raw = overlap_integral(&form)?;
    let tau = &kinetic_bilinear(&form)? / &o_raw;
    let nu = &second_moment_sum(&form)? / &o_raw;
    Ok((o_raw, tau, nu))
}

/// Factors of a single k-cycle at pair-state parameters (p, q).
pub fn cycle_factors(k: usize, p: &Scalar, q: &Scalar) -> Result<CycleFactors> {
    if k == 0 {
        return Err(Error::InvalidArgument("cycle length must be >= 1".into()));
    }
    let (o_raw, tau, nu) = raw_cycle(k, p, q)?;
    let base = if k == 1 { o_raw.clone() } else { raw_cycle(1, p, q)?.0 };
    let o = &o_raw / &base.powi(k as i32);
    Ok(CycleFactors { k, o, o_raw, tau, nu })
}

/// Factors for every cycle length 1..=n, sharing the normalization base.
/// This is the per-invocation cycle cache: classes reuse lengths heavily.
fn all_factors(n: usize, p: &Scalar, q: &Scalar) -> Result<Vec<CycleFactors>> {
    let base = raw_cycle(1, p, q)?.0;
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let (o_raw, tau, nu) = if k == 1 {
            let t = raw_cycle(1, p, q)?;
            (base.clone(), t.1, t.2)
        } else {
            raw_cycle(k, p, q)?
        };
        let o = &o_raw / &base.powi(k as i32);
        out.push(CycleFactors { k, o, o_raw, tau, nu });
    }
    Ok(out)
}

pub(crate) fn check_dim(d: u32) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

/// Normalized class element in d dimensions: the overlap O, kinetic T, and
/// potential V of one conjugacy class (without multiplicity or sign).
/// Dimensions separate, so O = (∏ o_k)^d while T and V pick up a factor d.
pub fn class_element(t: &CycleType, p: &Scalar, q: &Scalar, d: u32) -> Result<(Scalar, Scalar, Scalar)> {
    check_dim(d)?;
    let max_k = t.parts().iter().copied().max().unwrap_or(1);
    let factors = all_factors(max_k, p, q)?;
    Ok(class_element_cached(t, &factors, d))
}

fn class_element_cached(t: &CycleType, factors: &[CycleFactors], d: u32) -> (Scalar, Scalar, Scalar) {
    let mut o_hat = Scalar::from_f64(1.0);
    let mut tau = Scalar::from_f64(0.0);
    let mut nu = Scalar::from_f64(0.0);
    for &k in t.parts() {
        let f = &factors[k - 1];
        o_hat = o_hat * &f.o;
        tau = tau + &f.tau;
        nu = nu + &f.nu;
    }
    let o = o_hat.powi(d as i32);
    let scale = &o * &Scalar::from_f64(d as f64);
    let t_el = &scale * &tau;
    let v_el = &scale * &nu;
    (o, t_el, v_el)
}

/// Signed, multiplicity-weighted, identity-normalized sums over classes.
#[derive(Clone, Debug)]
pub struct ElementSums {
    pub o_sum: Scalar,
    pub t_sum: Scalar,
    pub v_sum: Scalar,
    /// |O_sum| / Σ|terms| — how much of the sum survived cancellation.
    pub condition: f64,
    /// Mantissa width that produced the accepted sums.
    pub bits: u32,
}

impl ElementSums {
    /// Rayleigh quotient (T + V)/O at hardware precision.
    pub fn energy(&self) -> f64 {
        (&(&self.t_sum + &self.v_sum) / &self.o_sum).to_f64()
    }
}

/// Assembles the class sums at external parameter `p`, escalating the working
/// precision until the cancellation-adjusted error bound is met.
pub fn assemble_sums(params: &ModelParams, p: f64) -> Result<ElementSums> {
    params.validate()?;
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "external width parameter p must be positive and finite, got {p}"
        )));
    }
    if params.mode == Statistics::Fermionic && params.q == 0.0 && params.n >= 2 {
        // the antisymmetrized state annihilates identically: every b-side
        // factor is the same Gaussian, so swapping two of them changes nothing
        // and the signed sum is exactly zero
        return Err(Error::VanishingNorm { condition: 0.0, bits: 53 });
    }
    let classes = perm_classes(params.n, params.mode)?;
    let (sums, condition, bits) = precision::run(|bits| class_pass(params, p, &classes, bits))?;
    let (o_sum, t_sum, v_sum) = sums;
    Ok(ElementSums { o_sum, t_sum, v_sum, condition, bits })
}

fn class_pass(
    params: &ModelParams,
    p: f64,
    classes: &[PermClass],
    bits: u32,
) -> Result<((Scalar, Scalar, Scalar), f64)> {
    let ps = Scalar::with_bits(p, bits);
    let qs = Scalar::with_bits(params.q, bits);
    let factors = all_factors(params.n, &ps, &qs)?;
    let mut o_sum = Scalar::from_f64(0.0);
    let mut t_sum = Scalar::from_f64(0.0);
    let mut v_sum = Scalar::from_f64(0.0);
    let mut abs_sum = Scalar::from_f64(0.0);
    for class in classes {
        let (o, t, v) = class_element_cached(&class.cycle_type, &factors, params.d);
        let mut w = Scalar::from_u64(class.multiplicity, bits);
        if class.signature < 0 {
            w = -w;
        }
        let term_o = &w * &o;
        abs_sum = abs_sum + &term_o.abs();
        o_sum = o_sum + &term_o;
        t_sum = t_sum + &(&w * &t);
        v_sum = v_sum + &(&w * &v);
    }
    let condition = (&o_sum.abs() / &abs_sum).to_f64();
    Ok(((o_sum, t_sum, v_sum), condition))
}
