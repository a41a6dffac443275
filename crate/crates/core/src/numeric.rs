//! Extended-range nonnegative scalars.
//!
//! `ExtScalar` = f64 mantissa in [1, 2) + i64 base-2 exponent. Potentials on the
//! adversarial instance span a factor of roughly 4^k, which leaves the native
//! `f64` range once k passes ~500; every cost and potential goes through this
//! type and only bounded quantities (probabilities, ratios) are converted back.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("ratio 2^{exponent} is outside the native f64 range; compare instead of dividing")]
    RatioOutOfRange { exponent: i64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot represent {0} as a nonnegative extended scalar")]
    NotRepresentable(f64),

    #[error("malformed extended scalar text {0:?}")]
    Parse(String),
}

/// Nonnegative real `mantissa * 2^exponent` with `mantissa` in [1, 2), or zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtScalar {
    mantissa: f64,
    exponent: i64,
}

// Beyond this exponent gap the smaller addend is below half an ulp of the larger.
const ADD_CUTOFF: i64 = 54;

impl ExtScalar {
    pub const ZERO: ExtScalar = ExtScalar {
        mantissa: 0.0,
        exponent: 0,
    };
    pub const ONE: ExtScalar = ExtScalar {
        mantissa: 1.0,
        exponent: 0,
    };

    /// Converts a finite nonnegative `f64`.
    ///
    /// Panics on negative, NaN or infinite input; use `try_from_f64` for
    /// untrusted values.
    pub fn from_f64(value: f64) -> Self {
        match Self::try_from_f64(value) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn try_from_f64(value: f64) -> Result<Self, NumericError> {
        if !value.is_finite() || value < 0.0 {
            return Err(NumericError::NotRepresentable(value));
        }
        Ok(Self::normalized(value, 0))
    }

    /// Exactly 2^exponent.
    pub fn pow2(exponent: i64) -> Self {
        Self {
            mantissa: 1.0,
            exponent,
        }
    }

    fn normalized(mantissa: f64, exponent: i64) -> Self {
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        debug_assert!(mantissa.is_finite() && mantissa > 0.0);
        // frexp gives [0.5, 1)
        let (m, e) = libm::frexp(mantissa);
        Self {
            mantissa: m * 2.0,
            exponent: exponent + e as i64 - 1,
        }
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// Multiplies by 2^shift exactly.
    pub fn shift(self, shift: i64) -> Self {
        if self.is_zero() {
            return self;
        }
        Self {
            mantissa: self.mantissa,
            exponent: self.exponent + shift,
        }
    }

    /// log2 of the value; `-inf` for zero.
    pub fn log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.exponent as f64 + self.mantissa.log2()
    }

    /// Nearest `f64`, saturating to infinity or flushing to zero outside the
    /// native range.
    pub fn to_f64_lossy(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.exponent.clamp(-1100, 1100) as i32;
        libm::scalbn(self.mantissa, e)
    }

    /// `self / other` as a native real.
    ///
    /// Fails when the quotient does not fit in an `f64` (including underflow of
    /// a nonzero quotient to zero) or when `other` is zero.
    pub fn ratio(&self, other: &Self) -> Result<f64, NumericError> {
        if other.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let exponent = self.exponent - other.exponent;
        if !(-1074..=1024).contains(&exponent) {
            return Err(NumericError::RatioOutOfRange { exponent });
        }
        let value = libm::scalbn(self.mantissa / other.mantissa, exponent as i32);
        if !value.is_finite() || value == 0.0 {
            return Err(NumericError::RatioOutOfRange { exponent });
        }
        Ok(value)
    }

    /// `self / total` for a part of a total: never fails, flushes to zero
    /// below the `f64` range. Used for sampling probabilities.
    pub fn fraction_of(&self, total: &Self) -> f64 {
        debug_assert!(!total.is_zero());
        match self.ratio(total) {
            Ok(v) => v,
            Err(_) if self.exponent < total.exponent => 0.0,
            Err(_) => f64::INFINITY,
        }
    }

    /// |self - other|.
    pub fn abs_diff(self, other: Self) -> Self {
        let (hi, lo) = if self >= other {
            (self, other)
        } else {
            (other, self)
        };
        if lo.is_zero() {
            return hi;
        }
        let gap = hi.exponent - lo.exponent;
        if gap > ADD_CUTOFF {
            return hi;
        }
        let diff = hi.mantissa - libm::scalbn(lo.mantissa, -(gap as i32));
        Self::normalized(diff.max(0.0), hi.exponent)
    }

    pub fn sqrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        if self.exponent.rem_euclid(2) == 0 {
            Self::normalized(self.mantissa.sqrt(), self.exponent / 2)
        } else {
            Self::normalized((2.0 * self.mantissa).sqrt(), (self.exponent - 1).div_euclid(2))
        }
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// `self^n` by repeated squaring.
    pub fn powi(self, mut n: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// 10^n, for decimal text conversion.
    pub fn pow10(n: i64) -> Self {
        let p = Self::from_f64(10.0).powi(n.unsigned_abs());
        if n < 0 {
            p.recip()
        } else {
            p
        }
    }
}

impl Add for ExtScalar {
    type Output = ExtScalar;

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let gap = self.exponent - rhs.exponent;
        if gap > ADD_CUTOFF {
            return self;
        }
        if gap < -ADD_CUTOFF {
            return rhs;
        }
        if gap >= 0 {
            let m = self.mantissa + libm::scalbn(rhs.mantissa, -(gap as i32));
            Self::normalized(m, self.exponent)
        } else {
            let m = rhs.mantissa + libm::scalbn(self.mantissa, gap as i32);
            Self::normalized(m, rhs.exponent)
        }
    }
}

impl AddAssign for ExtScalar {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Mul for ExtScalar {
    type Output = ExtScalar;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl MulAssign for ExtScalar {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Div for ExtScalar {
    type Output = ExtScalar;

    /// Panics on division by zero.
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "ExtScalar division by zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Eq for ExtScalar {}

impl PartialOrd for ExtScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self
                .exponent
                .cmp(&other.exponent)
                .then_with(|| self.mantissa.total_cmp(&other.mantissa)),
        }
    }
}

impl std::iter::Sum for ExtScalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl From<u64> for ExtScalar {
    fn from(v: u64) -> Self {
        Self::from_f64(v as f64)
    }
}

/// Decimal scientific text, `d.ddddddddddddddde±EEEE`.
impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0.000000000000000e+0000");
        }
        let mut exp10 = (self.log2() * std::f64::consts::LOG10_2).floor() as i64;
        let mut digits = decimal_mantissa(self, exp10);
        // the estimate can be off by one near powers of ten
        while digits < 1.0 {
            exp10 -= 1;
            digits = decimal_mantissa(self, exp10);
        }
        while digits >= 10.0 {
            exp10 += 1;
            digits = decimal_mantissa(self, exp10);
        }
        let mut text = format!("{digits:.15}");
        if text.starts_with("10.") {
            exp10 += 1;
            text = format!("{:.15}", digits / 10.0);
        }
        write!(f, "{text}e{exp10:+05}")
    }
}

fn decimal_mantissa(value: &ExtScalar, exp10: i64) -> f64 {
    value
        .ratio(&ExtScalar::pow10(exp10))
        .expect("decimal mantissa lies in [0.1, 100)")
}

impl FromStr for ExtScalar {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericError::Parse(s.to_string());
        let t = s.trim();
        let (mant, exp10) = match t.find(['e', 'E']) {
            Some(pos) => {
                let exp: i64 = t[pos + 1..].parse().map_err(|_| bad())?;
                (&t[..pos], exp)
            }
            None => (t, 0),
        };
        let m: f64 = mant.parse().map_err(|_| bad())?;
        let m = Self::try_from_f64(m).map_err(|_| bad())?;
        Ok(m * Self::pow10(exp10))
    }
}
