//! Independent verification path: the literal sum over all n! permutations.
//!
//! The production engine sums over conjugacy classes with per-cycle factors.
//! This module recomputes the same sums the slow, obvious way — one full
//! 2n-coordinate Gaussian form per permutation, evaluated with nothing but
//! the gauss-engine matrix primitives. No cycle factorization, no class
//! grouping, and signs from inversion counts rather than cycle structure, so
//! an agreement between the two paths actually means something.

use crate::elements::{assemble_sums, ElementSums};
use crate::energy::ModelParams;
use crate::error::{Error, Result};
use crate::gauss::{build_pair_form, kinetic_bilinear, overlap_integral, second_moment_sum};
use crate::perm::{enumerate_permutations, Statistics};
use crate::precision;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Documented equivalence tolerance between the two summation paths.
pub const ORACLE_TOL: f64 = 1e-10;

/// Largest n the factorial path is allowed to attempt.
pub const ORACLE_N_MAX: usize = 6;

/// Brute-force sums next to their engine comparison.
#[derive(Clone, Debug)]
pub struct OracleReport {
    /// Permutation-by-permutation sums, identity-normalized like the engine's.
    pub sums: ElementSums,
    /// Relative difference vs the class-summed engine, per sum.
    pub delta_o: f64,
    pub delta_t: f64,
    pub delta_v: f64,
    /// All deltas within `ORACLE_TOL`.
    pub pass: bool,
}

impl OracleReport {
    pub fn max_delta(&self) -> f64 {
        self.delta_o.max(self.delta_t).max(self.delta_v)
    }
}

fn inversion_sign(perm: &[usize]) -> i32 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sums sig(P)·[O_P, T_P, V_P] over every permutation of n pairs and compares
/// against `assemble_sums` at the same point.
pub fn brute_force_sums(params: &ModelParams, p: f64) -> Result<OracleReport> {
    params.validate()?;
    if params.n > ORACLE_N_MAX {
        return Err(Error::ResourceLimit(format!(
            "brute-force path capped at n = {ORACLE_N_MAX} ({}! full forms requested)",
            params.n
        )));
    }
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "external width parameter p must be positive and finite, got {p}"
        )));
    }
    if params.mode == Statistics::Fermionic && params.q == 0.0 && params.n >= 2 {
        return Err(Error::VanishingNorm { condition: 0.0, bits: 53 });
    }
    let engine = assemble_sums(params, p)?;
    let perms = enumerate_permutations(params.n)?;
    let (sums, condition, bits) = precision::run(|bits| perm_pass(params, p, &perms, bits))?;
    let (o_sum, t_sum, v_sum) = sums;
    let brute = ElementSums { o_sum, t_sum, v_sum, condition, bits };

    let rel = |a: &Scalar, b: &Scalar| {
        let (a, b) = (a.to_f64(), b.to_f64());
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    };
    let delta_o = rel(&brute.o_sum, &engine.o_sum);
    let delta_t = rel(&brute.t_sum, &engine.t_sum);
    let delta_v = rel(&brute.v_sum, &engine.v_sum);
    let pass = delta_o <= ORACLE_TOL && delta_t <= ORACLE_TOL && delta_v <= ORACLE_TOL;
    Ok(OracleReport { sums: brute, delta_o, delta_t, delta_v, pass })
}

type PermTerm = (Scalar, Scalar, Scalar, Scalar); // (±O_P, T_P/O_P·d…, V_P…, |O_P|)

fn perm_term(params: &ModelParams, ps: &Scalar, qs: &Scalar, o_base: &Scalar, perm: &[usize]) -> Result<PermTerm> {
    let form = build_pair_form(params.n, ps, qs, perm)?;
    let o_1d = overlap_integral(&form)?;
    let r_t = &kinetic_bilinear(&form)? / &o_1d;
    let r_v = &second_moment_sum(&form)? / &o_1d;
    let o_hat = (&o_1d / o_base).powi(params.d as i32);
    let d_scale = Scalar::from_f64(params.d as f64);
    let t = &(&o_hat * &d_scale) * &r_t;
    let v = &(&o_hat * &d_scale) * &r_v;
    let negate = params.mode == Statistics::Fermionic && inversion_sign(perm) < 0;
    let sign = Scalar::from_f64(if negate { -1.0 } else { 1.0 });
    Ok((&sign * &o_hat, &sign * &t, &sign * &v, o_hat))
}

fn perm_pass(
    params: &ModelParams,
    p: f64,
    perms: &[Vec<usize>],
    bits: u32,
) -> Result<((Scalar, Scalar, Scalar), f64)> {
    let ps = Scalar::with_bits(p, bits);
    let qs = Scalar::with_bits(params.q, bits);
    // lexicographic order puts the identity first; it normalizes everything
    let identity_form = build_pair_form(params.n, &ps, &qs, &perms[0])?;
    let o_base = overlap_integral(&identity_form)?;

    let terms = collect_terms(params, &ps, &qs, &o_base, perms)?;

    let mut o_sum = Scalar::from_f64(0.0);
    let mut t_sum = Scalar::from_f64(0.0);
    let mut v_sum = Scalar::from_f64(0.0);
    let mut abs_sum = Scalar::from_f64(0.0);
    for (o, t, v, o_abs) in &terms {
        o_sum = o_sum + o;
        t_sum = t_sum + t;
        v_sum = v_sum + v;
        abs_sum = abs_sum + o_abs;
    }
    let condition = (&o_sum.abs() / &abs_sum).to_f64();
    Ok(((o_sum, t_sum, v_sum), condition))
}

#[cfg(feature = "parallel")]
fn collect_terms(
    params: &ModelParams,
    ps: &Scalar,
    qs: &Scalar,
    o_base: &Scalar,
    perms: &[Vec<usize>],
) -> Result<Vec<PermTerm>> {
    use rayon::prelude::*;
    // indexed collect keeps term order fixed, so the sequential fold below is
    // bit-identical no matter how work is scheduled
    perms.par_iter().map(|perm| perm_term(params, ps, qs, o_base, perm)).collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_terms(
    params: &ModelParams,
    ps: &Scalar,
    qs: &Scalar,
    o_base: &Scalar,
    perms: &[Vec<usize>],
) -> Result<Vec<PermTerm>> {
    perms.iter().map(|perm| perm_term(params, ps, qs, o_base, perm)).collect()
}

/// n = 1 energy in closed form: the two coordinates separate into
/// center-of-mass and relative oscillators, giving
/// E = d·[2(p+q) + 1/(4p) + 1/(4(p+2q))].
pub fn n1_closed_form(p: f64, q: f64, d: u32) -> f64 {
    d as f64 * (2.0 * (p + q) + 1.0 / (4.0 * p) + 1.0 / (4.0 * (p + 2.0 * q)))
}

/// Cross-check configuration; trials draw (p, q) ∈ [0.1, 3]².
#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub n_max: usize,
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
    pub d: u32,
    pub jobs: Option<usize>,
}

/// Worst observed disagreement for one (n, mode) cell.
#[derive(Clone, Debug)]
pub struct CheckRow {
    pub n: usize,
    pub mode: Statistics,
    pub max_delta: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct CheckSummary {
    pub rows: Vec<CheckRow>,
    pub trials: usize,
    pub tol: f64,
    /// Per-point errors, if any (tallied, never fatal).
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Runs both summation paths over seeded random points for every n ≤ n_max in
/// both statistics, reporting the max relative delta per (n, mode).
/// Deterministic for a fixed seed, regardless of `jobs`.
pub fn cross_check(cfg: &CheckConfig) -> Result<CheckSummary> {
    if cfg.n_max > ORACLE_N_MAX {
        return Err(Error::ResourceLimit(format!(
            "cross-check capped at n = {ORACLE_N_MAX}, got {}",
            cfg.n_max
        )));
    }
    crate::elements::check_dim(cfg.d)?;
    if !cfg.tol.is_finite() || cfg.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    // all randomness drawn upfront, in a fixed order, so the point set is
    // independent of scheduling
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::new();
    for n in 1..=cfg.n_max {
        for _ in 0..cfg.trials {
            let p = rng.random_range(0.1..3.0);
            let q = rng.random_range(0.1..3.0);
            for mode in [Statistics::Fermionic, Statistics::Bosonic] {
                points.push((ModelParams { n, d: cfg.d, q, mode }, p));
            }
        }
    }
    let outcomes = run_points(&points, cfg.jobs);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for n in 1..=cfg.n_max {
        for mode in [Statistics::Fermionic, Statistics::Bosonic] {
            if cfg.trials == 0 {
                continue;
            }
            let mut max_delta = 0.0f64;
            let mut ok = true;
            for ((params, p), outcome) in points.iter().zip(&outcomes) {
                if params.n != n || params.mode != mode {
                    continue;
                }
                match outcome {
                    Ok(report) => max_delta = max_delta.max(report.max_delta()),
                    Err(e) => {
                        ok = false;
                        failures.push(format!(
                            "n={n} mode={mode} p={p:.6} q={:.6}: {e}",
                            params.q
                        ));
                    }
                }
            }
            rows.push(CheckRow { n, mode, max_delta, pass: ok && max_delta <= cfg.tol });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CheckSummary { rows, trials: cfg.trials, tol: cfg.tol, failures, pass })
}

#[cfg(feature = "parallel")]
fn run_points(points: &[(ModelParams, f64)], jobs: Option<usize>) -> Vec<Result<OracleReport>> {
    use rayon::prelude::*;
    let parallel =
        |pts: &[(ModelParams, f64)]| pts.par_iter().map(|(m, p)| brute_force_sums(m, *p)).collect();
    match jobs {
        Some(1) => points.iter().map(|(m, p)| brute_force_sums(m, *p)).collect(),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| parallel(points)),
            Err(_) => parallel(points),
        },
        None => parallel(points),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_points(points: &[(ModelParams, f64)], _jobs: Option<usize>) -> Vec<Result<OracleReport>> {
    points.iter().map(|(m, p)| brute_force_sums(m, *p)).collect()
}
