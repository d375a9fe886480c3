//! Extended-precision scalars and the Gamma function.
//!
//! Every computation in this crate runs on MPFR floats ([`Real`]) with a
//! precision fixed by a [`PrecisionContext`]. Rounding is always
//! round-to-nearest-even. User inputs such as the Hurst index and the horizon
//! enter as [`ExactDecimal`] values and are rounded exactly once, when they
//! are converted to a [`Real`].

use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Extended-precision floating value. The precision travels with the value.
pub type Real = Float;

/// Working precision shared by every scalar built for one computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    bits: u32,
}

impl PrecisionContext {
    /// Smallest accepted significand width.
    pub const MIN_BITS: u32 = 64;
    /// Default significand width.
    pub const DEFAULT_BITS: u32 = 320;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::Config(format!(
                "precision must be at least {} bits, got {bits}",
                Self::MIN_BITS
            )));
        }
        if bits > rug::float::prec_max() {
            return Err(Error::Config(format!("precision {bits} exceeds MPFR limits")));
        }
        Ok(Self { bits })
    }

    /// Significand width in bits.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// A wider context carrying `extra` guard bits.
    pub fn with_guard(&self, extra: u32) -> Self {
        Self {
            bits: self.bits + extra,
        }
    }

    /// Builds a [`Real`] at this precision (rounded to nearest).
    pub fn real<T>(&self, value: T) -> Real
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits, value)
    }

    pub fn zero(&self) -> Real {
        Float::new(self.bits)
    }

    pub fn one(&self) -> Real {
        self.real(1)
    }

    pub fn pi(&self) -> Real {
        self.real(Constant::Pi)
    }

    /// Rounds (or widens) `x` to this precision.
    pub fn round(&self, x: &Real) -> Real {
        self.real(x)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            bits: Self::DEFAULT_BITS,
        }
    }
}

/// Builds a context, rejecting precisions below 64 bits.
pub fn make_context(bits: u32) -> Result<PrecisionContext> {
    PrecisionContext::new(bits)
}

/// A user-supplied number kept exactly as a rational.
///
/// Accepts plain decimals (`0.7`, `-12.25`) and fractions (`1/3`). Scientific
/// notation is rejected so no value ever passes through a binary double.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactDecimal {
    text: String,
    value: Rational,
}

impl ExactDecimal {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn rational(&self) -> &Rational {
        &self.value
    }

    /// Correctly rounded conversion at the context precision.
    pub fn to_real(&self, ctx: &PrecisionContext) -> Real {
        ctx.real(&self.value)
    }

    /// Exact comparison against one half.
    pub fn is_half(&self) -> bool {
        self.value == Rational::from((1, 2))
    }

    pub fn is_positive(&self) -> bool {
        self.value.cmp0().is_gt()
    }

    /// True when `0 < value < 1`.
    pub fn in_open_unit_interval(&self) -> bool {
        self.is_positive() && self.value < 1
    }

    /// Exact quotient `self / other`.
    pub fn ratio(&self, other: &ExactDecimal) -> Result<Rational> {
        if other.value.cmp0().is_eq() {
            return Err(Error::Domain(format!("division by zero value {:?}", other.text)));
        }
        Ok(Rational::from(&self.value / &other.value))
    }
}

fn parse_error(input: &str, reason: &str) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_digits(input: &str, digits: &str) -> Result<Integer> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_error(input, "expected decimal digits"));
    }
    Integer::from_str_radix(digits, 10).map_err(|e| parse_error(input, &e.to_string()))
}

impl FromStr for ExactDecimal {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let trimmed = input.trim();
        let (negative, body) = match trimmed.as_bytes().first() {
            Some(b'-') => (true, &trimmed[1..]),
            Some(b'+') => (false, &trimmed[1..]),
            Some(_) => (false, trimmed),
            None => return Err(parse_error(input, "empty string")),
        };
        let mut value = if let Some((num, den)) = body.split_once('/') {
            let num = parse_digits(input, num)?;
            let den = parse_digits(input, den)?;
            if den == 0 {
                return Err(parse_error(input, "zero denominator"));
            }
            Rational::from((num, den))
        } else if let Some((whole, frac)) = body.split_once('.') {
            let int = parse_digits(input, &format!("{whole}{frac}"))?;
            parse_digits(input, whole)?;
            parse_digits(input, frac)?;
            let scale = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
            Rational::from((int, scale))
        } else {
            Rational::from(parse_digits(input, body)?)
        };
        if negative {
            value = -value;
        }
        Ok(Self {
            text: trimmed.to_string(),
            value,
        })
    }
}

impl fmt::Display for ExactDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for ExactDecimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for ExactDecimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Spouge parameter `a` for a target precision: the truncation error is
/// about `(2π)^(-a)`, so `a ≈ 1.26·bits·ln2/ln(2π)` leaves margin.
fn spouge_parameter(bits: u32) -> u32 {
    let a = 1.26 * f64::from(bits) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI).ln();
    a.ceil() as u32
}

/// Spouge coefficients reach about `2^(1.83a)` before they cancel.
fn spouge_guard(a: u32) -> u32 {
    (1.9 * f64::from(a)).ceil() as u32 + 32
}

/// Γ(x) for `x ≥ 1`, computed at `work` bits.
fn spouge(x: &Float, a: u32, work: u32) -> Float {
    let z = Float::with_val(work, x - 1u32);
    let two_pi = Float::with_val(work, Constant::Pi) * 2u32;
    let mut sum = two_pi.sqrt();
    // (k-1)!
    let mut factorial = Float::with_val(work, 1);
    for k in 1..a {
        let shift = Float::with_val(work, a - k);
        let power = shift.clone().pow(Float::with_val(work, k) - 0.5f64);
        let mut coeff = power * shift.exp() / &factorial;
        if k % 2 == 0 {
            coeff = -coeff;
        }
        sum += coeff / Float::with_val(work, &z + k);
        factorial *= k;
    }
    let base = Float::with_val(work, &z + a);
    let exponent = Float::with_val(work, &z + 0.5f64);
    let scale = base.clone().pow(&exponent) * (-base).exp();
    scale * sum
}

/// Gamma function at the context precision.
///
/// Spouge's approximation for `x ≥ 1`, the shift `Γ(x) = Γ(x+1)/x` on
/// `[1/2, 1)` and the reflection formula below one half.
pub fn gamma(ctx: &PrecisionContext, x: &Real) -> Result<Real> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite value {x}")));
    }
    if x.is_integer() && *x <= 0 {
        return Err(Error::Pole(x.to_string_radix(10, Some(20))));
    }
    let a = spouge_parameter(ctx.bits());
    let work = ctx.bits() + spouge_guard(a);
    let x = Float::with_val(work, x);
    let value = if x < 0.5f64 {
        let pi = Float::with_val(work, Constant::Pi);
        let sine = Float::with_val(work, &pi * &x).sin();
        let reflected = Float::with_val(work, 1u32 - &x);
        let upper = shifted_spouge(&reflected, a, work);
        pi / (sine * upper)
    } else {
        shifted_spouge(&x, a, work)
    };
    Ok(ctx.round(&value))
}

fn shifted_spouge(x: &Float, a: u32, work: u32) -> Float {
    if *x < 1u32 {
        let up = Float::with_val(work, x + 1u32);
        spouge(&up, a, work) / x
    } else {
        spouge(x, a, work)
    }
}

/// Unit in the last place of `x` at `bits` precision. Zero maps to the
/// smallest normal power of two so that distances to zero stay finite.
pub fn ulp(x: &Real, bits: u32) -> Real {
    let exp = x.get_exp().unwrap_or(rug::float::exp_min() + bits as i32);
    let mut u = Float::with_val(bits, 1);
    u <<= exp - bits as i32;
    u
}

/// `|a - b|` measured in units of `ulp(b)` at `bits` precision.
pub fn ulps_between(a: &Real, b: &Real, bits: u32) -> f64 {
    let prec = a.prec().max(b.prec()).max(bits);
    let diff = Float::with_val(prec, a - b).abs();
    if diff.is_zero() {
        return 0.0;
    }
    if b.is_zero() {
        return f64::INFINITY;
    }
    (diff / ulp(b, bits)).to_f64()
}

/// Returns the integer `n` when `|x - n| ≤ tol`.
pub fn near_integer(x: &Real, tol: f64) -> Option<i64> {
    let rounded = Float::with_val(x.prec(), x.round_ref());
    let gap = Float::with_val(x.prec(), x - &rounded).abs();
    if gap <= tol {
        rounded.to_integer().and_then(|n| n.to_i64())
    } else {
        None
    }
}

/// Running rising factorial `x (x+1) ... (x+n-1)`.
pub fn rising_factorial(x: &Real, n: u32) -> Real {
    let mut acc = Float::with_val(x.prec(), 1);
    for m in 0..n {
        acc *= Float::with_val(x.prec(), x + m);
    }
    acc
}
