//! Scalar types for exact operator arithmetic.
//!
//! All weight calculus runs over arbitrary-precision rationals; complex
//! phases are Gaussian rationals (rational real and imaginary parts), kept
//! on the unit circle so that moduli stay rational. Floating point appears
//! only in explicitly approximate norm estimates and cross-checks.

use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt::Write as _;
use std::str::FromStr;

pub type Rat = BigRational;
pub type GRat = Complex<BigRational>;

/// Scalar mode of a sparse operator. Exact modes never coerce to float
/// implicitly; conversion is an explicit, lossy call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    Rational,
    GaussianRational,
    Float,
}

impl ScalarMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalarMode::Rational => "rational",
            ScalarMode::GaussianRational => "gaussian-rational",
            ScalarMode::Float => "float",
        }
    }
}

/// Entry scalar for [`crate::fock::SparseOperator`].
pub trait Scalar:
    Clone + PartialEq + num::Zero + num::One + std::ops::Neg<Output = Self> + std::ops::Sub<Output = Self>
{
    const MODE: ScalarMode;
    fn conjugate(&self) -> Self;
    fn to_c64(&self) -> Complex<f64>;
    fn fmt_entry(&self) -> String;
    /// Embedding of the rationals (Fejér weights and block scalings).
    fn from_rat(r: &Rat) -> Self;
}

impl Scalar for Rat {
    const MODE: ScalarMode = ScalarMode::Rational;
    fn conjugate(&self) -> Self {
        self.clone()
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(rat_to_f64(self), 0.0)
    }
    fn fmt_entry(&self) -> String {
        format_rat(self)
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
}

impl Scalar for GRat {
    const MODE: ScalarMode = ScalarMode::GaussianRational;
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn fmt_entry(&self) -> String {
        format_grat(self)
    }
    fn from_rat(r: &Rat) -> Self {
        GRat::new(r.clone(), Rat::zero())
    }
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;
    fn conjugate(&self) -> Self {
        *self
    }
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(*self, 0.0)
    }
    fn fmt_entry(&self) -> String {
        format!("{:.17e}", self)
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
}

/// Exact scalars support the orthogonal-column norm formula.
pub trait ExactScalar: Scalar {
    /// |z|^2 as an exact rational.
    fn abs_sq(&self) -> Rat;
}

impl ExactScalar for Rat {
    fn abs_sq(&self) -> Rat {
        self * self
    }
}

impl ExactScalar for GRat {
    fn abs_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Integer power with negative exponents; `base` must be nonzero for `e < 0`.
pub fn rat_pow(base: &Rat, e: i64) -> Rat {
    let mut acc = Rat::one();
    let b = if e >= 0 {
        base.clone()
    } else {
        assert!(!base.is_zero(), "zero base with negative exponent");
        base.recip()
    };
    for _ in 0..e.unsigned_abs() {
        acc *= &b;
    }
    acc
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // Good enough for the magnitudes arising here; exact values are kept
    // rational everywhere it matters.
    let n = r.numer();
    let d = r.denom();
    let nf = bigint_to_f64(n);
    let df = bigint_to_f64(d);
    nf / df
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    // BigInt implements ToPrimitive; fall back to string parsing on overflow.
    num::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY)
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat, String> {
    Rat::from_str(s.trim()).map_err(|e| format!("invalid rational `{s}`: {e}"))
}

pub fn format_grat(z: &GRat) -> String {
    if z.im.is_zero() {
        return format_rat(&z.re);
    }
    let mut out = String::new();
    if !z.re.is_zero() {
        out.push_str(&format_rat(&z.re));
        if z.im.is_positive() {
            out.push('+');
        }
    }
    if z.im.is_one() {
        out.push('i');
    } else if (-z.im.clone()).is_one() {
        out.push_str("-i");
    } else {
        let _ = write!(out, "{}i", format_rat(&z.im));
    }
    out
}

/// True iff |z| = 1 exactly.
pub fn is_unit_modulus(z: &GRat) -> bool {
    z.abs_sq().is_one()
}

/// Exact rational square root, when one exists.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let ns = r.numer().sqrt();
    let ds = r.denom().sqrt();
    if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
        Some(Rat::new(ns, ds))
    } else {
        None
    }
}

/// FNV-1a over bytes; used for stable basis fingerprints in exports.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
