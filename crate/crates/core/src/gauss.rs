//! Gaussian integrals over symmetric quadratic forms.
//!
//! Every matrix element of the symmetrized pair state reduces to integrals of
//! the shape ∫ f(x) · exp(−xᵀAx) dᴺx with A = B + C the sum of the bra and
//! ket exponent matrices. Overlaps need det(A), moments need tr(·A⁻¹), and
//! the kinetic bilinear form needs diagonal entries of C A⁻¹ C — all obtained
//! from one symmetric LDLᵀ factorization, which doubles as the
//! positive-definiteness check (a non-positive pivot means the integral
//! diverges and is reported, never clamped).
//!
//! Everything here is precision-agnostic: matrices hold `Scalar` entries and
//! results come out at the widest precision found among them.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense square matrix of `Scalar`s (row-major; orders stay tiny).
/// Used for symmetric forms; `matmul` results are symmetric only when the
/// operands commute, which holds for the powers of a single form used here.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    n: usize,
    e: Vec<Scalar>,
}

impl SymMatrix {
    pub fn zero(n: usize) -> Self {
        SymMatrix { n, e: vec![Scalar::from_f64(0.0); n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Scalar) -> Self {
        let mut e = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                e.push(f(i, j));
            }
        }
        SymMatrix { n, e }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.e[i * self.n + j]
    }

    /// Adds `v` at (i, j) and, off the diagonal, mirrors it to (j, i).
    pub fn add_sym(&mut self, i: usize, j: usize, v: &Scalar) {
        let n = self.n;
        self.e[i * n + j] = &self.e[i * n + j] + v;
        if i != j {
            self.e[j * n + i] = &self.e[j * n + i] + v;
        }
    }

    pub fn plus(&self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n);
        SymMatrix::from_fn(self.n, |i, j| self.get(i, j) + rhs.get(i, j))
    }

    pub fn matmul(&self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n);
        SymMatrix::from_fn(self.n, |i, j| {
            let mut acc = Scalar::from_f64(0.0);
            for k in 0..self.n {
                acc = acc + self.get(i, k) * rhs.get(k, j);
            }
            acc
        })
    }

    pub fn scale(&self, s: &Scalar) -> SymMatrix {
        SymMatrix::from_fn(self.n, |i, j| self.get(i, j) * s)
    }

    /// Widest mantissa among entries: the working precision of anything
    /// computed from this matrix.
    fn bits(&self) -> u32 {
        self.e.iter().map(Scalar::bits).max().unwrap_or(53)
    }
}

/// Unit-lower-triangular L and diagonal D with A = L D Lᵀ.
struct Ldlt {
    n: usize,
    l: Vec<Scalar>,
    d: Vec<Scalar>,
}

impl Ldlt {
    fn factor(a: &SymMatrix) -> Result<Ldlt> {
        let n = a.n;
        let mut l = vec![Scalar::from_f64(0.0); n * n];
        let mut d = Vec::with_capacity(n);
        for j in 0..n {
            let mut dj = a.get(j, j).clone();
            for k in 0..j {
                dj = dj - &(&(&l[j * n + k] * &l[j * n + k]) * &d[k]);
            }
            if !dj.is_positive() || !dj.is_finite() {
                return Err(Error::DivergentIntegral(
                    "quadratic form is not positive definite".into(),
                ));
            }
            for i in j + 1..n {
                let mut s = a.get(i, j).clone();
                for k in 0..j {
                    s = s - &(&(&l[i * n + k] * &l[j * n + k]) * &d[k]);
                }
                l[i * n + j] = &s / &dj;
            }
            l[j * n + j] = Scalar::from_f64(1.0);
            d.push(dj);
        }
        Ok(Ldlt { n, l, d })
    }

    fn det(&self) -> Scalar {
        let mut det = Scalar::from_f64(1.0);
        for dj in &self.d {
            det = det * dj;
        }
        det
    }

    /// Solves A x = b in place of a fresh vector.
    fn solve(&self, b: &[Scalar]) -> Vec<Scalar> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] = &x[i] - &(&self.l[i * n + k] * &x[k]);
            }
        }
        for i in 0..n {
            x[i] = &x[i] / &self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] = &x[i] - &(&self.l[k * n + i] * &x[k]);
            }
        }
        x
    }
}

/// Bra and ket exponent matrices of one matrix element, per spatial
/// dimension: the integrand is exp(−xᵀBx) · exp(−xᵀCx) with coordinates
/// ordered a_1..a_n, b_1..b_n.
#[derive(Clone, Debug)]
pub struct PairForm {
    /// Bra exponent: pairs coupled as (a_i, b_{perm(i)}).
    pub bra: SymMatrix,
    /// Ket exponent: identity-ordered pairs (a_i, b_i).
    pub ket: SymMatrix,
}

impl PairForm {
    /// A = B + C, the Gaussian weight actually integrated against.
    pub fn total(&self) -> SymMatrix {
        self.bra.plus(&self.ket)
    }

    fn bits(&self) -> u32 {
        self.bra.bits().max(self.ket.bits())
    }
}

/// Builds the bra/ket forms for n pairs in one spatial dimension: each side
/// carries the trap factor p on every coordinate plus a −q coupling between
/// each a and its b partner (identity pairing for the ket, `perm` for the bra).
pub fn build_pair_form(n_coords: usize, p: &Scalar, q: &Scalar, perm: &[usize]) -> Result<PairForm> {
    if n_coords == 0 {
        return Err(Error::InvalidArgument("pair count must be >= 1".into()));
    }
    if !p.is_positive() {
        return Err(Error::InvalidArgument("trap strength p must be > 0".into()));
    }
    if q < &Scalar::from_f64(0.0) {
        return Err(Error::InvalidArgument("pair strength q must be >= 0".into()));
    }
    if perm.len() != n_coords {
        return Err(Error::InvalidArgument(format!(
            "permutation length {} does not match pair count {}",
            perm.len(),
            n_coords
        )));
    }
    let mut seen = vec![false; n_coords];
    for &j in perm {
        if j >= n_coords || seen[j] {
            return Err(Error::InvalidArgument("not a valid permutation of 0..n".into()));
        }
        seen[j] = true;
    }

    let n2 = 2 * n_coords;
    let neg_q = -q;
    let side = |pairing: &dyn Fn(usize) -> usize| {
        let mut m = SymMatrix::zero(n2);
        for i in 0..n_coords {
            let (ai, bi) = (i, n_coords + pairing(i));
            m.add_sym(ai, ai, p);
            m.add_sym(n_coords + i, n_coords + i, p);
            m.add_sym(ai, ai, q);
            m.add_sym(bi, bi, q);
            m.add_sym(ai, bi, &neg_q);
        }
        m
    };
    Ok(PairForm { bra: side(&|i| perm[i]), ket: side(&|i| i) })
}

/// ∫ exp(−xᵀAx) dᴺx = π^{N/2} / √det(A).
pub fn overlap_integral(form: &PairForm) -> Result<Scalar> {
    let a = form.total();
    let ldlt = Ldlt::factor(&a)?;
    Ok(&pi_pow(a.order(), form.bits()) / &ldlt.det().sqrt())
}

/// ⟨Σ_k x_k²⟩ unnormalized: overlap · tr(A⁻¹)/2.
pub fn second_moment_sum(form: &PairForm) -> Result<Scalar> {
    let identity =
        SymMatrix::from_fn(form.total().order(), |i, j| Scalar::from_f64(if i == j { 1.0 } else { 0.0 }));
    quadratic_moment(form, &identity)
}

/// ⟨xᵀWx⟩ unnormalized for symmetric W: overlap · tr(W A⁻¹)/2.
pub fn quadratic_moment(form: &PairForm, w: &SymMatrix) -> Result<Scalar> {
    let a = form.total();
    let n = a.order();
    if w.order() != n {
        return Err(Error::InvalidArgument(format!(
            "moment matrix order {} does not match form order {}",
            w.order(),
            n
        )));
    }
    let ldlt = Ldlt::factor(&a)?;
    let overlap = &pi_pow(n, form.bits().max(w.bits())) / &ldlt.det().sqrt();
    // tr(W A⁻¹) column by column
    let mut tr = Scalar::from_f64(0.0);
    for j in 0..n {
        let col: Vec<Scalar> = (0..n).map(|i| w.get(i, j).clone()).collect();
        let x = ldlt.solve(&col);
        tr = tr + &x[j];
    }
    Ok(&(&overlap * &tr) / &Scalar::from_f64(2.0))
}

/// Σ_k ∫ exp(−xᵀBx) · (−∂²/∂x_k²) exp(−xᵀCx) dᴺx
///   = overlap · Σ_k [2C_kk − 2(C A⁻¹ C)_kk].
/// Positive-kinetic-energy convention: this is the matrix element of −∇²
/// applied to the ket.
pub fn kinetic_bilinear(form: &PairForm) -> Result<Scalar> {
    kinetic_impl(form, None)
}

/// Single-coordinate slice of `kinetic_bilinear`:
/// overlap · [2C_kk − 2(C A⁻¹ C)_kk] for one k.
pub fn kinetic_coordinate(form: &PairForm, k: usize) -> Result<Scalar> {
    let n = form.total().order();
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "coordinate index {k} out of range for {n} coordinates"
        )));
    }
    kinetic_impl(form, Some(k))
}

fn kinetic_impl(form: &PairForm, only: Option<usize>) -> Result<Scalar> {
    let a = form.total();
    let c = &form.ket;
    let n = a.order();
    let ldlt = Ldlt::factor(&a)?;
    let overlap = &pi_pow(n, form.bits()) / &ldlt.det().sqrt();
    let coords: Vec<usize> = match only {
        Some(k) => vec![k],
        None => (0..n).collect(),
    };
    let mut sum = Scalar::from_f64(0.0);
    for k in coords {
        // (C A⁻¹ C)_kk = c_kᵀ A⁻¹ c_k with c_k the k-th column of C
        let col: Vec<Scalar> = (0..n).map(|i| c.get(i, k).clone()).collect();
        let x = ldlt.solve(&col);
        let mut quad = Scalar::from_f64(0.0);
        for i in 0..n {
            quad = quad + &(&col[i] * &x[i]);
        }
        sum = sum + &(&(c.get(k, k) - &quad) * &Scalar::from_f64(2.0));
    }
    Ok(&overlap * &sum)
}

/// The printed one-dimensional moment identity, exactly as stated:
/// ∫ e^{−ax²+bx+c}(dx²+ex+f) dx
///   = √π · e^{b²/(4a)+c} · (4a²f + 2a(be+d) + b²d) / (4a^{5/2}).
pub fn gauss_moment_1d(
    a: &Scalar,
    b: &Scalar,
    c: &Scalar,
    d: &Scalar,
    e: &Scalar,
    f: &Scalar,
) -> Result<Scalar> {
    if !a.is_positive() {
        return Err(Error::DivergentIntegral("moment integral needs a > 0".into()));
    }
    let bits = [a, b, c, d, e, f].iter().map(|s| s.bits()).max().unwrap();
    let four = Scalar::from_f64(4.0);
    let two = Scalar::from_f64(2.0);
    let sqrt_pi = Scalar::pi(bits).sqrt();
    let expo = (&(&(b * b) / &(&four * a)) + c).exp();
    let poly = &(&(&(&four * &a.powi(2)) * f) + &(&(&two * a) * &(&(b * e) + d))) + &(&(b * b) * d);
    let denom = &four * &(&a.powi(2) * &a.sqrt());
    Ok(&(&(&sqrt_pi * &expo) * &poly) / &denom)
}

fn pi_pow(n_coords: usize, bits: u32) -> Scalar {
    let pi = Scalar::pi(bits);
    let half = pi.sqrt();
    let mut out = pi.powi((n_coords / 2) as i32);
    if n_coords % 2 == 1 {
        out = out * &half;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn s(v: f64) -> Scalar {
        Scalar::from_f64(v)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    /// Gauss–Hermite nodes/weights for weight e^{−x²}, via the orthonormal
    /// recurrence (overflow-free) with bisection + Newton.
    fn gauss_hermite(m: usize) -> (Vec<f64>, Vec<f64>) {
        // orthonormal value of h_m and h_{m-1} at x
        fn h_pair(m: usize, x: f64) -> (f64, f64) {
            let mut hkm1 = 0.0f64; // h_{-1}
            let mut hk = std::f64::consts::PI.powf(-0.25); // h_0
            for k in 0..m {
                let next = x * (2.0 / (k as f64 + 1.0)).sqrt() * hk
                    - (k as f64 / (k as f64 + 1.0)).sqrt() * hkm1;
                hkm1 = hk;
                hk = next;
            }
            (hk, hkm1)
        }
        let bound = (2.0 * m as f64 + 1.0).sqrt() + 1.0;
        let grid = 40 * m;
        let mut roots = Vec::new();
        let mut prev_x = -bound;
        let mut prev_v = h_pair(m, prev_x).0;
        for i in 1..=grid {
            let x = -bound + 2.0 * bound * i as f64 / grid as f64;
            let v = h_pair(m, x).0;
            if prev_v == 0.0 {
                roots.push(prev_x);
            } else if prev_v.signum() != v.signum() {
                // bisect then polish with Newton: h_m' = sqrt(2m) h_{m-1}
                let (mut lo, mut hi) = (prev_x, x);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if h_pair(m, mid).0.signum() == h_pair(m, lo).0.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let mut r = 0.5 * (lo + hi);
                for _ in 0..4 {
                    let (hm, hm1) = h_pair(m, r);
                    r -= hm / ((2.0 * m as f64).sqrt() * hm1);
                }
                roots.push(r);
            }
            prev_x = x;
            prev_v = v;
        }
        assert_eq!(roots.len(), m, "found all Hermite roots");
        let weights: Vec<f64> =
            roots.iter().map(|&r| 1.0 / (m as f64 * h_pair(m, r).1.powi(2))).collect();
        (roots, weights)
    }

    /// ∫ g(x) e^{−Σx²} over R^N by tensored Gauss–Hermite.
    fn gh_integrate(dim: usize, m: usize, g: impl Fn(&[f64]) -> f64) -> f64 {
        let (x, w) = gauss_hermite(m);
        let mut idx = vec![0usize; dim];
        let mut total = 0.0;
        loop {
            let pt: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
            let wt: f64 = idx.iter().map(|&i| w[i]).product();
            total += wt * g(&pt);
            let mut d = 0;
            loop {
                if d == dim {
                    return total;
                }
                idx[d] += 1;
                if idx[d] < m {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    /// Quadrature value of ∫ f(x) exp(−xᵀAx) dᴺx for f64 matrices, using
    /// per-axis diagonal scaling so the weight matches Gauss–Hermite.
    fn quad_gaussian(a: &[Vec<f64>], m: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
        let n = a.len();
        let scales: Vec<f64> = (0..n).map(|i| a[i][i].sqrt()).collect();
        let jac: f64 = scales.iter().map(|s| 1.0 / s).product();
        gh_integrate(n, m, |t| {
            let x: Vec<f64> = (0..n).map(|i| t[i] / scales[i]).collect();
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    quad += x[i] * a[i][j] * x[j];
                }
            }
            let resid = (t.iter().map(|v| v * v).sum::<f64>() - quad).exp();
            resid * f(&x)
        }) * jac
    }

    fn random_pd(rng: &mut StdRng, n: usize) -> Vec<Vec<f64>> {
        // MᵀM + I/2 keeps eigenvalues off zero without our factorization code
        let m: Vec<Vec<f64>> =
            (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    a[i][j] += m[k][i] * m[k][j];
                }
            }
            a[i][i] += 0.5;
        }
        a
    }

    fn form_from_dense(a: &[Vec<f64>]) -> PairForm {
        // split A = B + C evenly; total() recovers A exactly (entries are halves)
        let n = a.len();
        let half = SymMatrix::from_fn(n, |i, j| s(a[i][j] / 2.0));
        PairForm { bra: half.clone(), ket: half }
    }

    #[test]
    fn pair_form_small_layouts() {
        let p = s(0.7);
        let q = s(0.3);
        let f = build_pair_form(1, &p, &q, &[0]).unwrap();
        for m in [&f.bra, &f.ket] {
            assert_eq!(m.get(0, 0).to_f64(), 1.0); // p + q
            assert_eq!(m.get(1, 1).to_f64(), 1.0);
            assert_eq!(m.get(0, 1).to_f64(), -0.3);
            assert_eq!(m.get(1, 0).to_f64(), -0.3);
        }

        let f = build_pair_form(2, &p, &q, &[1, 0]).unwrap();
        // ket pairs (a1,b1),(a2,b2); bra pairs (a1,b2),(a2,b1)
        assert_eq!(f.ket.get(0, 2).to_f64(), -0.3);
        assert_eq!(f.ket.get(1, 3).to_f64(), -0.3);
        assert_eq!(f.ket.get(0, 3).to_f64(), 0.0);
        assert_eq!(f.bra.get(0, 3).to_f64(), -0.3);
        assert_eq!(f.bra.get(1, 2).to_f64(), -0.3);
        assert_eq!(f.bra.get(0, 2).to_f64(), 0.0);
        for m in [&f.bra, &f.ket] {
            for i in 0..4 {
                assert_eq!(m.get(i, i).to_f64(), 1.0);
            }
        }
    }

    #[test]
    fn pair_form_rejects_bad_inputs() {
        let p = s(1.0);
        let q = s(1.0);
        assert!(matches!(build_pair_form(2, &p, &q, &[0, 0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_pair_form(2, &p, &q, &[0, 2]), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_pair_form(2, &p, &q, &[0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_pair_form(2, &s(0.0), &q, &[0, 1]), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_pair_form(2, &p, &s(-1.0), &[0, 1]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_pair_overlap_closed_form() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let (p, q) = (rng.random_range(0.1..3.0), rng.random_range(0.0..3.0));
            let f = build_pair_form(1, &s(p), &s(q), &[0]).unwrap();
            let o = overlap_integral(&f).unwrap().to_f64();
            let want = std::f64::consts::PI / (2.0 * (p * (p + 2.0 * q)).sqrt());
            assert!(rel(o, want) < 1e-14, "p={p} q={q}: {o} vs {want}");
        }
    }

    #[test]
    fn unit_form_overlap_is_pi() {
        let half = SymMatrix::from_fn(2, |i, j| s(if i == j { 0.5 } else { 0.0 }));
        let f = PairForm { bra: half.clone(), ket: half };
        assert!(rel(overlap_integral(&f).unwrap().to_f64(), std::f64::consts::PI) < 1e-15);
        // and the second moment ratio for A = I is N/2 · 1/2 · 2 = 1
        let o = overlap_integral(&f).unwrap().to_f64();
        let m = second_moment_sum(&f).unwrap().to_f64();
        assert!(rel(m / o, 1.0) < 1e-14);
    }

    #[test]
    fn overlap_matches_quadrature() {
        let mut rng = StdRng::seed_from_u64(23);
        for n in [2usize, 4] {
            for _ in 0..3 {
                let a = random_pd(&mut rng, n);
                let f = form_from_dense(&a);
                let ours = overlap_integral(&f).unwrap().to_f64();
                let quad = quad_gaussian(&a, if n == 2 { 64 } else { 28 }, |_| 1.0);
                assert!(rel(ours, quad) < 1e-6, "n={n}: {ours} vs {quad}");
            }
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let mut rng = StdRng::seed_from_u64(37);
        for n in [2usize, 4] {
            let a = random_pd(&mut rng, n);
            let f = form_from_dense(&a);
            let ours = second_moment_sum(&f).unwrap().to_f64();
            let quad = quad_gaussian(&a, if n == 2 { 64 } else { 28 }, |x| {
                x.iter().map(|v| v * v).sum()
            });
            assert!(rel(ours, quad) < 1e-6, "n={n}: {ours} vs {quad}");
        }
    }

    #[test]
    fn kinetic_matches_quadrature() {
        // full bilinear check with B ≠ C: ∫ e^{−xBx} (−∂²) e^{−xCx}
        // against quadrature of e^{−xAx}·Σ_k[2C_kk − (2C x)_k²]… evaluated
        // directly from the derivative expansion:
        // −∂²/∂x_k² e^{−xCx} = [2C_kk − 4 (Cx)_k²] e^{−xCx}
        let mut rng = StdRng::seed_from_u64(41);
        let n = 2;
        let b = random_pd(&mut rng, n);
        let c = random_pd(&mut rng, n);
        let f = PairForm {
            bra: SymMatrix::from_fn(n, |i, j| s(b[i][j])),
            ket: SymMatrix::from_fn(n, |i, j| s(c[i][j])),
        };
        let a: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| b[i][j] + c[i][j]).collect()).collect();
        let ours = kinetic_bilinear(&f).unwrap().to_f64();
        let quad = quad_gaussian(&a, 64, |x| {
            (0..n)
                .map(|k| {
                    let cx: f64 = (0..n).map(|j| c[k][j] * x[j]).sum();
                    2.0 * c[k][k] - 4.0 * cx * cx
                })
                .sum()
        });
        assert!(rel(ours, quad) < 1e-9, "{ours} vs {quad}");
    }

    #[test]
    fn kinetic_equals_gradient_square_when_symmetric() {
        // for B = C, ⟨∇ψ·∇ψ⟩ = ⟨xᵀ(4B²)x⟩ under the same weight
        let mut rng = StdRng::seed_from_u64(53);
        for n in [2usize, 3, 4] {
            let b = random_pd(&mut rng, n);
            let bm = SymMatrix::from_fn(n, |i, j| s(b[i][j]));
            let f = PairForm { bra: bm.clone(), ket: bm.clone() };
            let kin = kinetic_bilinear(&f).unwrap().to_f64();
            let w = bm.matmul(&bm).scale(&s(4.0));
            let grad = quadratic_moment(&f, &w).unwrap().to_f64();
            assert!(rel(kin, grad) < 1e-12, "n={n}: {kin} vs {grad}");
        }
    }

    #[test]
    fn kinetic_coordinates_sum_to_bilinear() {
        let f = build_pair_form(3, &s(0.8), &s(1.3), &[1, 2, 0]).unwrap();
        let total = kinetic_bilinear(&f).unwrap().to_f64();
        let mut acc = 0.0;
        for k in 0..6 {
            acc += kinetic_coordinate(&f, k).unwrap().to_f64();
        }
        assert!(rel(total, acc) < 1e-13);
        assert!(matches!(kinetic_coordinate(&f, 6), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn block_diagonal_overlap_factorizes() {
        // two independent pairs glued into one 4×4 form = product of 2×2s
        let p = s(0.9);
        let q = s(0.4);
        let one = build_pair_form(1, &p, &q, &[0]).unwrap();
        let two = build_pair_form(2, &p, &q, &[0, 1]).unwrap();
        let o1 = overlap_integral(&one).unwrap().to_f64();
        let o2 = overlap_integral(&two).unwrap().to_f64();
        assert!(rel(o2, o1 * o1) < 1e-14);
        let k1 = kinetic_bilinear(&one).unwrap().to_f64();
        let k2 = kinetic_bilinear(&two).unwrap().to_f64();
        assert!(rel(k2 / o2, 2.0 * k1 / o1) < 1e-14);
        let m1 = second_moment_sum(&one).unwrap().to_f64();
        let m2 = second_moment_sum(&two).unwrap().to_f64();
        assert!(rel(m2 / o2, 2.0 * m1 / o1) < 1e-14);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        fn cofactor_det(a: &[Vec<f64>]) -> f64 {
            let n = a.len();
            if n == 1 {
                return a[0][0];
            }
            let mut det = 0.0;
            for j in 0..n {
                let minor: Vec<Vec<f64>> = (1..n)
                    .map(|i| (0..n).filter(|&c| c != j).map(|c| a[i][c]).collect())
                    .collect();
                det += if j % 2 == 0 { 1.0 } else { -1.0 } * a[0][j] * cofactor_det(&minor);
            }
            det
        }
        let mut rng = StdRng::seed_from_u64(61);
        for n in [2usize, 3, 4] {
            let a = random_pd(&mut rng, n);
            let f = form_from_dense(&a);
            let o = overlap_integral(&f).unwrap().to_f64();
            let want = std::f64::consts::PI.powi(n as i32 / 2)
                * if n % 2 == 1 { std::f64::consts::PI.sqrt() } else { 1.0 }
                / cofactor_det(&a).sqrt();
            assert!(rel(o, want) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn non_positive_definite_is_reported() {
        let m = SymMatrix::from_fn(2, |i, j| s(if i == j { 0.1 } else { 5.0 }));
        let f = PairForm { bra: m.clone(), ket: m };
        assert!(matches!(overlap_integral(&f), Err(Error::DivergentIntegral(_))));
    }

    #[test]
    fn moment_identity_known_values() {
        let sp = std::f64::consts::PI.sqrt();
        let v = gauss_moment_1d(&s(1.0), &s(0.0), &s(0.0), &s(1.0), &s(0.0), &s(0.0)).unwrap();
        assert!(rel(v.to_f64(), sp / 2.0) < 1e-15);
        let v = gauss_moment_1d(&s(1.0), &s(0.0), &s(0.0), &s(0.0), &s(0.0), &s(1.0)).unwrap();
        assert!(rel(v.to_f64(), sp) < 1e-15);
        assert!(matches!(
            gauss_moment_1d(&s(0.0), &s(0.0), &s(0.0), &s(0.0), &s(0.0), &s(1.0)),
            Err(Error::DivergentIntegral(_))
        ));
        assert!(matches!(
            gauss_moment_1d(&s(-1.0), &s(0.0), &s(0.0), &s(0.0), &s(0.0), &s(1.0)),
            Err(Error::DivergentIntegral(_))
        ));
    }

    /// Adaptive Simpson on a finite interval (test oracle for the 1-D identity).
    fn simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
        fn rec(
            f: &impl Fn(f64) -> f64,
            lo: f64,
            hi: f64,
            flo: f64,
            fmid: f64,
            fhi: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let mid = 0.5 * (lo + hi);
            let lm = 0.5 * (lo + mid);
            let rm = 0.5 * (mid + hi);
            let flm = f(lm);
            let frm = f(rm);
            let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1)
                    + rec(f, mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1)
            }
        }
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        rec(f, lo, hi, flo, fmid, fhi, whole, tol, 48)
    }

    fn moment_quadrature(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> f64 {
        let g = move |x: f64| (-a * x * x + b * x + c).exp() * (d * x * x + e * x + f);
        let center = b / (2.0 * a);
        let span = 14.0 / a.sqrt() + center.abs();
        simpson(&g, center - span, center + span, 1e-13)
    }

    #[test]
    fn moment_identity_matches_quadrature() {
        let got = gauss_moment_1d(&s(2.0), &s(1.0), &s(0.0), &s(1.0), &s(1.0), &s(1.0))
            .unwrap()
            .to_f64();
        let want = moment_quadrature(2.0, 1.0, 0.0, 1.0, 1.0, 1.0);
        assert!(rel(got, want) < 1e-12, "{got} vs {want}");

        let mut rng = StdRng::seed_from_u64(71);
        for _ in 0..100 {
            let a = rng.random_range(0.5..4.0);
            let pars: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = gauss_moment_1d(&s(a), &s(pars[0]), &s(pars[1]), &s(pars[2]), &s(pars[3]), &s(pars[4]))
                .unwrap()
                .to_f64();
            let want = moment_quadrature(a, pars[0], pars[1], pars[2], pars[3], pars[4]);
            let scale = got.abs().max(want.abs()).max(1e-6);
            assert!(
                (got - want).abs() / scale < 1e-10,
                "a={a} pars={pars:?}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn results_homogeneous_across_precision() {
        let mut rng = StdRng::seed_from_u64(83);
        for _ in 0..5 {
            let p = rng.random_range(0.2..2.0);
            let q = rng.random_range(0.0..2.0);
            let lo = build_pair_form(2, &s(p), &s(q), &[1, 0]).unwrap();
            let hi = build_pair_form(
                2,
                &Scalar::with_bits(p, 256),
                &Scalar::with_bits(q, 256),
                &[1, 0],
            )
            .unwrap();
            for (f_lo, f_hi) in [
                (overlap_integral(&lo).unwrap(), overlap_integral(&hi).unwrap()),
                (kinetic_bilinear(&lo).unwrap(), kinetic_bilinear(&hi).unwrap()),
                (second_moment_sum(&lo).unwrap(), second_moment_sum(&hi).unwrap()),
            ] {
                assert_eq!(f_hi.bits(), 256);
                assert!(rel(f_lo.to_f64(), f_hi.to_f64()) < 1e-13);
            }
        }
    }
}
