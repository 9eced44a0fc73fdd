//! Real and complex scalars.
//!
//! Every numeric routine in the crate is generic over [`Real`]. Two
//! implementations are provided: `f64` (double mode) and [`MpReal`], a
//! binary floating-point number carrying a configurable number of decimal
//! digits (high-precision mode). Complex values are `num_complex::Complex<T>`.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_complex::Complex;
use num_traits::{Num, One, Zero};

/// Working precision of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Double,
    /// Decimal digits of the multi-precision mode.
    Digits(u32),
}

impl Precision {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "double" | "f64" => Some(Precision::Double),
            other => other
                .parse::<u32>()
                .ok()
                .filter(|&d| (1..=10_000).contains(&d))
                .map(Precision::Digits),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => write!(f, "double"),
            Precision::Digits(d) => write!(f, "{d}"),
        }
    }
}

pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn pi() -> Self;
    /// Relative spacing of representable numbers near one.
    fn epsilon() -> Self;
    fn is_finite(&self) -> bool;
    /// Parses decimal (optionally scientific) notation.
    fn parse_decimal(s: &str) -> Option<Self>;
    /// Decimal scientific notation that parses back to the identical value.
    fn to_decimal(&self) -> String;
    fn precision() -> Precision;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
    }
    fn to_decimal(&self) -> String {
        format!("{:e}", self)
    }
    fn precision() -> Precision {
        Precision::Double
    }
}

// ---------------------------------------------------------------------------
// Multi-precision mode

const RM: RoundingMode = RoundingMode::ToEven;
const DEFAULT_DIGITS: u32 = 40;

thread_local! {
    static MP_DIGITS: Cell<u32> = const { Cell::new(DEFAULT_DIGITS) };
    static MP_CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

/// Sets the decimal digits used by [`MpReal`] arithmetic on the current thread.
pub fn set_mp_digits(digits: u32) {
    MP_DIGITS.with(|d| d.set(digits.max(1)));
}

pub fn mp_digits() -> u32 {
    MP_DIGITS.with(|d| d.get())
}

fn mp_bits() -> usize {
    // 64 guard bits on top of ceil(P·log2(10)), rounded to whole words
    let bits = (mp_digits() as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64;
    bits.div_ceil(64) * 64
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    MP_CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Multi-precision real number; precision follows [`set_mp_digits`].
#[derive(Clone)]
pub struct MpReal(BigFloat);

impl MpReal {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    fn wrap(x: BigFloat) -> Self {
        MpReal(x)
    }
}

impl fmt::Debug for MpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpReal({})", self.to_decimal())
    }
}

impl fmt::Display for MpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl PartialEq for MpReal {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for MpReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! mp_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr for MpReal {
            type Output = MpReal;
            fn $method(self, rhs: MpReal) -> MpReal {
                let f: fn(&BigFloat, &BigFloat, usize) -> BigFloat = $body;
                MpReal::wrap(f(&self.0, &rhs.0, mp_bits()))
            }
        }
    };
}

mp_binop!(Add, add, |a, b, p| a.add(b, p, RM));
mp_binop!(Sub, sub, |a, b, p| a.sub(b, p, RM));
mp_binop!(Mul, mul, |a, b, p| a.mul(b, p, RM));
mp_binop!(Div, div, |a, b, p| a.div(b, p, RM));

impl Rem for MpReal {
    type Output = MpReal;
    fn rem(self, rhs: MpReal) -> MpReal {
        MpReal::wrap(self.0.rem(&rhs.0))
    }
}

impl Neg for MpReal {
    type Output = MpReal;
    fn neg(self) -> MpReal {
        MpReal::wrap(self.0.neg())
    }
}

impl Zero for MpReal {
    fn zero() -> Self {
        MpReal::wrap(BigFloat::from_f64(0.0, mp_bits()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for MpReal {
    fn one() -> Self {
        MpReal::wrap(BigFloat::from_f64(1.0, mp_bits()))
    }
}

impl Num for MpReal {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        Self::parse_decimal(s).ok_or_else(|| format!("invalid number '{s}'"))
    }
}

impl Real for MpReal {
    fn from_f64(x: f64) -> Self {
        MpReal::wrap(BigFloat::from_f64(x, mp_bits()))
    }
    fn from_i64(x: i64) -> Self {
        MpReal::wrap(BigFloat::from_i64(x, mp_bits()))
    }
    fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        let s = with_consts(|cc| self.0.format(Radix::Dec, RM, cc));
        s.ok().and_then(|s| s.parse::<f64>().ok()).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        MpReal::wrap(self.0.abs())
    }
    fn sqrt(&self) -> Self {
        MpReal::wrap(self.0.sqrt(mp_bits(), RM))
    }
    fn exp(&self) -> Self {
        with_consts(|cc| MpReal::wrap(self.0.exp(mp_bits(), RM, cc)))
    }
    fn ln(&self) -> Self {
        with_consts(|cc| MpReal::wrap(self.0.ln(mp_bits(), RM, cc)))
    }
    fn sin(&self) -> Self {
        with_consts(|cc| MpReal::wrap(self.0.sin(mp_bits(), RM, cc)))
    }
    fn cos(&self) -> Self {
        with_consts(|cc| MpReal::wrap(self.0.cos(mp_bits(), RM, cc)))
    }
    fn pi() -> Self {
        with_consts(|cc| MpReal::wrap(cc.pi(mp_bits(), RM)))
    }
    fn epsilon() -> Self {
        Self::from_f64(2.0).powi(-(mp_bits() as i32 - 64))
    }
    fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        let x = with_consts(|cc| BigFloat::parse(s, Radix::Dec, mp_bits(), RM, cc));
        let x = MpReal::wrap(x);
        x.is_finite().then_some(x)
    }
    fn to_decimal(&self) -> String {
        if self.0.is_zero() {
            return "0e0".to_string();
        }
        // formatting at a wider precision prints enough digits to round back exactly
        let mut wide = self.0.clone();
        let _ = wide.set_precision(mp_bits() + 64, RM);
        with_consts(|cc| wide.format(Radix::Dec, RM, cc))
            .map(|s| tidy_exponent(&s))
            .unwrap_or_else(|_| "nan".to_string())
    }
    fn precision() -> Precision {
        Precision::Digits(mp_digits())
    }
}

/// `1.50e+3` → `1.5e3`.
fn tidy_exponent(s: &str) -> String {
    let (mant, exp) = s.split_once('e').unwrap_or((s, "0"));
    let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
    let exp = exp.trim_start_matches('+');
    format!("{mant}e{exp}")
}

// ---------------------------------------------------------------------------
// Complex helpers

pub type Cx<T> = Complex<T>;

pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::from_f64(re), T::from_f64(im))
}

pub fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

pub fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

pub fn creal<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

pub fn cabs<T: Real>(z: &Cx<T>) -> T {
    z.norm_sqr().sqrt()
}

pub fn cis_zero<T: Real>(z: &Cx<T>) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

/// `z^n` for any integer `n` (negative powers invert first).
pub fn cpowi<T: Real>(z: &Cx<T>, n: i64) -> Cx<T> {
    let mut base = if n < 0 { cone::<T>() / z.clone() } else { z.clone() };
    let mut e = n.unsigned_abs();
    let mut acc = cone::<T>();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        e >>= 1;
    }
    acc
}

/// `exp(2πi·k/p)`.
pub fn root_of_unity<T: Real>(k: i64, p: u32) -> Cx<T> {
    let p = p.max(1) as i64;
    let k = k.rem_euclid(p);
    if k == 0 {
        return cone();
    }
    if 2 * k == p {
        return creal(-T::one());
    }
    if 4 * k == p {
        return Complex::new(T::zero(), T::one());
    }
    if 4 * k == 3 * p {
        return Complex::new(T::zero(), -T::one());
    }
    let theta = T::from_f64(2.0) * T::pi() * T::from_i64(k) / T::from_i64(p);
    Complex::new(theta.cos(), theta.sin())
}

pub fn cx_to_f64<T: Real>(z: &Cx<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn cx_convert<T: Real, U: Real>(z: &Cx<T>) -> Cx<U> {
    let re = U::parse_decimal(&z.re.to_decimal()).unwrap_or_else(|| U::from_f64(z.re.to_f64()));
    let im = U::parse_decimal(&z.im.to_decimal()).unwrap_or_else(|| U::from_f64(z.im.to_f64()));
    Complex::new(re, im)
}
