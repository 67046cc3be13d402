//! Mixed-precision real arithmetic.
//!
//! The signed permutation sums cancel almost exactly for weakly bound pairs
//! (fermionic mode, small q/p), and no amount of clever summation rescues a
//! fixed 53-bit mantissa there. `Scalar` lets the same evaluation code run at
//! hardware speed by default and be re-run at a few hundred bits when the
//! caller detects cancellation: an `F64` stays on the native path, an `Mp`
//! value carries its own mantissa width, and mixed operands widen to the
//! larger precision. All multiprecision operations are correctly rounded
//! (round-to-nearest-even) by the backing library.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    // Cache for pi / e series used by exp; per-thread so evaluations stay lock-free.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache allocation"));
}

/// A real number at either hardware (`f64`) or arbitrary precision.
#[derive(Clone, Debug)]
pub enum Scalar {
    F64(f64),
    Mp(BigFloat),
}

impl Scalar {
    /// Hardware-precision value.
    pub fn from_f64(v: f64) -> Self {
        Scalar::F64(v)
    }

    /// Lift `v` to `bits` of mantissa. Widths up to 53 stay on the `f64` path;
    /// larger widths round up to the backend's word size (multiples of 64).
    pub fn with_bits(v: f64, bits: u32) -> Self {
        if bits <= 53 {
            Scalar::F64(v)
        } else {
            Scalar::Mp(BigFloat::from_f64(v, bits as usize))
        }
    }

    /// Integer lifted to `bits` of mantissa. Exact on the `f64` path only up
    /// to 2⁵³; counts that large are why the wide path exists.
    pub fn from_u64(v: u64, bits: u32) -> Self {
        if bits <= 53 {
            Scalar::F64(v as f64)
        } else {
            Scalar::Mp(BigFloat::from_u64(v, bits as usize))
        }
    }

    /// Mantissa width this value carries.
    pub fn bits(&self) -> u32 {
        match self {
            Scalar::F64(_) => 53,
            Scalar::Mp(x) => x.precision().map_or(53, |p| p as u32),
        }
    }

    /// π at `bits` of precision.
    pub fn pi(bits: u32) -> Self {
        if bits <= 53 {
            Scalar::F64(std::f64::consts::PI)
        } else {
            Scalar::Mp(CONSTS.with(|c| c.borrow_mut().pi(bits as usize, RM)))
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Scalar::F64(v) => v.is_finite(),
            Scalar::Mp(x) => !x.is_nan() && !x.is_inf(),
        }
    }

    /// Strictly greater than zero (exact test, no rounding).
    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::F64(v) => *v > 0.0,
            Scalar::Mp(x) => x.is_positive() && !x.is_zero() && !x.is_nan(),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::F64(v) => Scalar::F64(v.abs()),
            Scalar::Mp(x) => Scalar::Mp(x.abs()),
        }
    }

    pub fn sqrt(&self) -> Scalar {
        match self {
            Scalar::F64(v) => Scalar::F64(v.sqrt()),
            Scalar::Mp(x) => Scalar::Mp(x.sqrt(self.bits() as usize, RM)),
        }
    }

    pub fn exp(&self) -> Scalar {
        match self {
            Scalar::F64(v) => Scalar::F64(v.exp()),
            Scalar::Mp(x) => {
                let p = self.bits() as usize;
                Scalar::Mp(CONSTS.with(|c| x.exp(p, RM, &mut c.borrow_mut())))
            }
        }
    }

    /// Integer power by the backend's exponentiation; `n < 0` via reciprocal.
    pub fn powi(&self, n: i32) -> Scalar {
        match self {
            Scalar::F64(v) => Scalar::F64(v.powi(n)),
            Scalar::Mp(x) => {
                let p = self.bits() as usize;
                let pos = x.powi(n.unsigned_abs() as usize, p, RM);
                if n >= 0 {
                    Scalar::Mp(pos)
                } else {
                    Scalar::Mp(BigFloat::from_f64(1.0, p).div(&pos, p, RM))
                }
            }
        }
    }

    /// Nearest `f64` (correctly rounded; overflows to ±inf, underflows to 0).
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::F64(v) => *v,
            Scalar::Mp(x) => big_to_f64(x),
        }
    }

    fn lift(&self, p: usize) -> BigFloat {
        match self {
            Scalar::F64(v) => BigFloat::from_f64(*v, p),
            Scalar::Mp(x) => x.clone(),
        }
    }
}

/// BigFloat represents a finite value as `sign · 0.mantissa · 2^e` with the
/// mantissa stored least-significant word first and its top bit normalized.
/// Take the top 128 mantissa bits, fold everything below into a sticky bit,
/// and let the correctly-rounded `u128 -> f64` cast finish the job.
fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf() {
        return if x.is_inf_neg() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    if x.is_zero() {
        return 0.0;
    }
    let (words, _, sign, exp, _) = x.as_raw_parts().expect("finite BigFloat has raw parts");
    let mut it = words.iter().rev();
    let top = it.next().copied().unwrap_or(0);
    let next = it.next().copied().unwrap_or(0);
    let sticky = it.any(|w| *w != 0) as u128;
    let frac = ((top as u128) << 64) | (next as u128) | sticky;
    let mag = ldexp(frac as f64, exp as i64 - 128);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

/// Scale by 2^e in safe chunks so intermediate factors never overflow.
fn ldexp(x: f64, mut e: i64) -> f64 {
    let mut r = x;
    while e > 900 {
        r *= 2f64.powi(900);
        e -= 900;
    }
    while e < -900 {
        r *= 2f64.powi(-900);
        e += 900;
    }
    r * 2f64.powi(e as i32)
}

fn bin(
    a: &Scalar,
    b: &Scalar,
    fop: impl Fn(f64, f64) -> f64,
    mop: impl Fn(&BigFloat, &BigFloat, usize) -> BigFloat,
) -> Scalar {
    match (a, b) {
        (Scalar::F64(x), Scalar::F64(y)) => Scalar::F64(fop(*x, *y)),
        _ => {
            let p = a.bits().max(b.bits()) as usize;
            match (a, b) {
                (Scalar::Mp(x), Scalar::Mp(y)) => Scalar::Mp(mop(x, y, p)),
                (x, y) => Scalar::Mp(mop(&x.lift(p), &y.lift(p), p)),
            }
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                bin(self, rhs, |x, y| x.$method(y), |x, y, p| x.$method(y, p, RM))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::F64(v) => Scalar::F64(-v),
            Scalar::Mp(x) => Scalar::Mp(x.neg()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::F64(x), Scalar::F64(y)) => x.partial_cmp(y),
            _ => {
                // Lifting an f64 is exact at >= 64 bits, so this compares true values.
                let p = self.bits().max(other.bits()) as usize;
                self.lift(p).partial_cmp(&other.lift(p))
            }
        }
    }
}
