//! Scalar abstraction shared by every polynomial and instance type.
//!
//! Two families implement [`Scalar`]: IEEE floats (`f32`, `f64`) and exact
//! rationals ([`BigRational`]). Code that asserts a polynomial identity runs
//! on rationals; code that needs square roots or eigenvalues converts to
//! `f64` through [`Scalar::to_f64`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Rationals take the exact binary value of `v`; NaN and infinities map to zero.
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact rational value. Floats convert through their binary expansion.
    fn to_rational(&self) -> BigRational;

    fn from_rational(r: &BigRational) -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_i64(v as i64)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn from_f64(v: f64) -> Self {
                v as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_rational(&self) -> BigRational {
                BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
            }

            fn from_rational(r: &BigRational) -> Self {
                rational_to_f64(r) as $t
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Nearest-ish `f64` of a rational, robust to numerators and denominators
/// that overflow `f64` individually.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    // Shift both parts down to ~60 significant bits before dividing.
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (num >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (den >> shift_d as usize).to_f64().unwrap_or(1.0);
    let exp = shift_n - shift_d;
    (n / d) * 2f64.powi(exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

/// Parses `"p/q"`, `"p"`, or a decimal string into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    // decimal literal, parsed exactly: "-1.25e-3"
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if neg { -value } else { value })
}

/// `p/q` rendering used by the JSON encoders (`"3"` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_f64_exact(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

pub(crate) fn pow_usize<T: Scalar>(base: &T, exp: usize) -> T {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

pub(crate) fn sign_of<T: Scalar>(v: &T) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4"), Some(BigRational::from_ratio(3, 4)));
        assert_eq!(parse_rational("-2"), Some(BigRational::from_i64(-2)));
        assert_eq!(parse_rational("0.125"), Some(BigRational::from_ratio(1, 8)));
        assert_eq!(parse_rational("-1.5e1"), Some(BigRational::from_i64(-15)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn huge_rationals_convert_to_finite_floats() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = BigRational::new(big.clone() * BigInt::from(3), big);
        assert!((rational_to_f64(&r) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn float_roundtrip_through_rational_is_exact() {
        for v in [0.1f64, -3.75, 1e-300, 12345.678] {
            assert_eq!(f64::from_rational(&v.to_rational()), v);
        }
    }
}
