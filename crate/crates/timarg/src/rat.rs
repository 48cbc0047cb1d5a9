//! Exact rational scalar type and conversion helpers.
//!
//! [`Rat`] is an arbitrary-precision rational kept in lowest terms with a
//! positive denominator (both invariants are maintained by the backing
//! implementation on every operation).  Text form is `"p/q"`, or plain `"p"`
//! when the denominator is one; [`parse_rat`] accepts both.

use num::bigint::Sign;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::Error;

/// Exact rational number: lowest terms, positive denominator.
pub type Rat = BigRational;

/// Build a rational from a small numerator and denominator.
///
/// Panics if `den == 0`; intended for literals in code and tests.
pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Build an integer rational.
pub fn rat_int(num: i64) -> Rat {
    BigRational::from_integer(BigInt::from(num))
}

/// Parse `"p/q"` or `"p"` (optionally signed) into a rational.
///
/// Rejects a zero denominator and any non-integer component.
pub fn parse_rat(s: &str) -> crate::Result<Rat> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let num = BigInt::from_str(num_str)
        .map_err(|_| Error::structural(format!("invalid rational numerator in {s:?}")))?;
    let den = match den_str {
        Some(d) => BigInt::from_str(d)
            .map_err(|_| Error::structural(format!("invalid rational denominator in {s:?}")))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::structural(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Render a rational as `"p/q"` (or `"p"` when the denominator is one).
pub fn format_rat(x: &Rat) -> String {
    x.to_string()
}

/// Convert to `f64` with correct scaling for arbitrarily large components.
///
/// Extracts roughly 64 significant bits of the quotient and rescales by the
/// matching power of two, so ratios of huge integers land near the right
/// value instead of overflowing to infinity or NaN.  Values beyond `f64`
/// range saturate to `±inf` / `0.0`.
pub fn rat_to_f64(x: &Rat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let neg = x.numer().sign() == Sign::Minus;
    let a = x.numer().magnitude();
    let b = x.denom().magnitude();
    // Shift so the integer quotient carries ~64 significant bits.
    let e = a.bits() as i64 - b.bits() as i64;
    let s = 64 - e;
    let q = if s >= 0 {
        (a << s as u64) / b
    } else {
        a / (b << (-s) as u64)
    };
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    let scale_exp = (-s).clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    let val = qf * 2f64.powi(scale_exp);
    if neg {
        -val
    } else {
        val
    }
}

/// Sum of a slice of rationals.
pub fn rat_sum<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> Rat {
    xs.into_iter().fold(Rat::zero(), |acc, x| acc + x)
}

/// Exact dot product of two equal-length slices.
///
/// Panics if the lengths differ; callers validate shapes first.
pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len(), "dot product length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).fold(Rat::zero(), |acc, t| acc + t)
}
