//! Complex arithmetic at a selectable working precision.
//!
//! Solvers are written once against [`Scalar`] and instantiated either with
//! `Complex64` (hardware doubles) or with [`MpComplex`], a software complex
//! type whose real and imaginary parts are `astro_float::BigFloat` values of a
//! fixed mantissa length.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, RoundingMode, Sign};
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;

pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whatever the type needs to create new values (mantissa bits for
    /// multi-precision, nothing for doubles).
    type Ctx: Copy + fmt::Debug;

    fn from_c64(z: Complex64, ctx: Self::Ctx) -> Self;

    fn from_f64(x: f64, ctx: Self::Ctx) -> Self {
        Self::from_c64(Complex64::new(x, 0.0), ctx)
    }

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_f64(0.0, ctx)
    }

    /// Principal square root (branch cut on the negative real axis, result
    /// with non-negative real part).
    fn sqrt(&self) -> Self;

    fn to_c64(&self) -> Complex64;

    fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    fn is_zero(&self) -> bool;
}

impl Scalar for Complex64 {
    type Ctx = ();

    fn from_c64(z: Complex64, _: ()) -> Self {
        z
    }

    fn sqrt(&self) -> Self {
        Complex64::sqrt(*self)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

/// Mantissa length in bits that carries `digits` significant decimal digits,
/// plus a guard word.
pub fn bits_for_digits(digits: u32) -> usize {
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize;
    // astro-float rounds precision up to whole 64-bit words anyway
    (bits + 64).div_ceil(64) * 64
}

/// Nearest double to a `BigFloat`.
pub fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // mantissa is normalized with its most significant bit in the last word
    let top = *words.last().unwrap_or(&0) as f64;
    let next = if words.len() > 1 {
        words[words.len() - 2] as f64
    } else {
        0.0
    };
    let frac = (top + next * 2f64.powi(-64)) * 2f64.powi(-64);
    let magnitude = if exponent > 1023 {
        frac * 2f64.powi(1023) * 2f64.powi(exponent - 1023)
    } else if exponent < -1000 {
        frac * 2f64.powi(-1000) * 2f64.powi(exponent + 1000)
    } else {
        frac * 2f64.powi(exponent)
    };
    match sign {
        Sign::Neg => -magnitude,
        Sign::Pos => magnitude,
    }
}

/// Complex number with `BigFloat` components.
#[derive(Clone)]
pub struct MpComplex {
    re: BigFloat,
    im: BigFloat,
    bits: usize,
}

impl MpComplex {
    pub fn new(re: BigFloat, im: BigFloat, bits: usize) -> Self {
        Self { re, im, bits }
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn prec(&self, other: &Self) -> usize {
        self.bits.max(other.bits)
    }

    fn norm_sqr_big(&self) -> BigFloat {
        let p = self.bits;
        self.re
            .mul(&self.re, p, RM)
            .add(&self.im.mul(&self.im, p, RM), p, RM)
    }
}

impl fmt::Debug for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpComplex({:?}, {} bits)", self.to_c64(), self.bits)
    }
}

impl Add for MpComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let p = self.prec(&rhs);
        Self::new(self.re.add(&rhs.re, p, RM), self.im.add(&rhs.im, p, RM), p)
    }
}

impl Sub for MpComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let p = self.prec(&rhs);
        Self::new(self.re.sub(&rhs.re, p, RM), self.im.sub(&rhs.im, p, RM), p)
    }
}

impl Mul for MpComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let p = self.prec(&rhs);
        let re = self
            .re
            .mul(&rhs.re, p, RM)
            .sub(&self.im.mul(&rhs.im, p, RM), p, RM);
        let im = self
            .re
            .mul(&rhs.im, p, RM)
            .add(&self.im.mul(&rhs.re, p, RM), p, RM);
        Self::new(re, im, p)
    }
}

impl Div for MpComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let p = self.prec(&rhs);
        let den = rhs.norm_sqr_big();
        let re = self
            .re
            .mul(&rhs.re, p, RM)
            .add(&self.im.mul(&rhs.im, p, RM), p, RM)
            .div(&den, p, RM);
        let im = self
            .im
            .mul(&rhs.re, p, RM)
            .sub(&self.re.mul(&rhs.im, p, RM), p, RM)
            .div(&den, p, RM);
        Self::new(re, im, p)
    }
}

impl Neg for MpComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.re.neg(), self.im.neg(), self.bits)
    }
}

impl Scalar for MpComplex {
    type Ctx = usize;

    fn from_c64(z: Complex64, bits: usize) -> Self {
        Self::new(
            BigFloat::from_f64(z.re, bits),
            BigFloat::from_f64(z.im, bits),
            bits,
        )
    }

    fn sqrt(&self) -> Self {
        let p = self.bits;
        if self.is_zero() {
            return self.clone();
        }
        let two = BigFloat::from_f64(2.0, p);
        let modulus = self.norm_sqr_big().sqrt(p, RM);
        if !self.re.is_negative() {
            let u = modulus.add(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
            let v = self.im.div(&u.mul(&two, p, RM), p, RM);
            Self::new(u, v, p)
        } else {
            let v_abs = modulus.sub(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
            let u = self.im.abs().div(&v_abs.mul(&two, p, RM), p, RM);
            let v = if self.im.is_negative() {
                v_abs.neg()
            } else {
                v_abs
            };
            Self::new(u, v, p)
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(big_to_f64(&self.re), big_to_f64(&self.im))
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
