//! Exact rational helpers on top of [`BigRational`].
//!
//! Endpoints of every constructed set are exact rationals. Dimension
//! estimators need logarithms of values far below `f64::MIN_POSITIVE`
//! (the shrink steps produce lengths like `2^-20000`), so logarithms are
//! taken from the integer bit lengths rather than through `to_f64`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let err = |reason| ParseRationalError {
        input: s.to_string(),
        reason,
    };
    if t.is_empty() {
        return Err(err("empty"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal"));
        }
        let n: BigInt = digits.parse().map_err(|_| err("bad decimal"))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| err("bad integer"))?;
    Ok(Rational::from_integer(n))
}

/// Formats as `"p/q"` with the denominator always present (`"0/1"`, `"1/1"`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Wrapper giving `"p/q"` display.
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Exact binary value of a finite `f64`.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

fn ln_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.sign() == Sign::Plus);
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational, accurate for arbitrarily
/// small or large magnitudes.
pub fn ln(r: &Rational) -> f64 {
    assert!(r.is_positive(), "ln of non-positive rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Saturating conversion (tiny values become 0.0).
pub fn to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    match r.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            let sign = if r.is_negative() { -1.0 } else { 1.0 };
            sign * ln(&r.abs()).exp()
        }
    }
}

pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn min<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Rational upper bound on `sqrt(r)` for `r >= 0`. Exact when numerator and
/// denominator are perfect squares; otherwise within `2^-precision_bits`
/// relative slack.
pub fn sqrt_upper(r: &Rational, precision_bits: u64) -> Rational {
    assert!(!r.is_negative());
    if r.is_zero() {
        return Rational::zero();
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        return Rational::new(sn, sd);
    }
    // sqrt(n/d) = sqrt(n * d * 4^k) / (d * 2^k)
    let k = precision_bits + d.bits();
    let scaled: BigInt = (n * d) << (2 * k);
    let mut s = scaled.sqrt();
    if &s * &s < scaled {
        s += 1;
    }
    Rational::new(s, d << k)
}

/// Rational upper bound on `r^(2^-levels)` by iterated upward square roots.
pub fn root_pow2_upper(r: &Rational, levels: u32, precision_bits: u64) -> Rational {
    (0..levels).fold(r.clone(), |acc, _| sqrt_upper(&acc, precision_bits))
}

pub fn pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

pub fn two_pow_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// Nearest rational with denominator at most 1000 if it lies within `1e-12`
/// relative error of `x`, otherwise the exact binary value of `x`.
pub fn rationalize(x: f64) -> Rational {
    assert!(x.is_finite());
    let exact = from_f64(x);
    if x == 0.0 {
        return exact;
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rem = exact.clone();
    for _ in 0..64 {
        let a = floor(&rem);
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > BigInt::from(1000) {
            break;
        }
        let c = Rational::new(h2.clone(), k2.clone());
        if ((to_f64(&c) - x) / x).abs() <= 1e-12 {
            return c;
        }
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rem = frac.recip();
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    exact
}

/// `base^(-e)` for `e >= 0`: the integer part of the exponent exactly, the
/// fractional part through [`rationalize`].
pub fn pow_neg(base: u32, e: &Rational) -> Rational {
    assert!(!e.is_negative());
    let whole = floor(e);
    let frac = to_f64(&(e - Rational::from_integer(whole.clone())));
    let whole = whole.to_u32().expect("exponent fits in u32");
    let exact = Rational::new(
        BigInt::one(),
        num_traits::pow(BigInt::from(base), whole as usize),
    );
    if frac == 0.0 {
        exact
    } else {
        exact * rationalize((base as f64).powf(-frac))
    }
}

/// Scientific notation that survives magnitudes below `f64::MIN_POSITIVE`.
pub fn sci(r: &Rational) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let l10 = ln(&r.abs()) / std::f64::consts::LN_10;
    let mut e = l10.floor();
    let mut m = 10f64.powf(l10 - e);
    if format!("{m:.6}").starts_with("10") {
        m /= 10.0;
        e += 1.0;
    }
    format!("{sign}{m:.6}e{e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("2/6").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn format_always_has_denominator() {
        assert_eq!(format_rational(&int(0)), "0/1");
        assert_eq!(format_rational(&int(1)), "1/1");
        assert_eq!(format_rational(&rat(-2, 4)), "-1/2");
    }

    #[test]
    fn ln_of_tiny_values() {
        let tiny = pow(&rat(1, 2), 20000);
        assert!((ln(&tiny) + 20000.0 * std::f64::consts::LN_2).abs() < 1e-6);
        assert!((ln(&rat(1, 3)) + 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rationalize_snaps_simple_values() {
        assert_eq!(rationalize(1.0 / 3.0), rat(1, 3));
        assert_eq!(rationalize(0.25), rat(1, 4));
        let x = 3f64.powf(-1.5);
        assert_eq!(rationalize(x), from_f64(x));
        assert_eq!(pow_neg(3, &int(2)), rat(1, 9));
        assert_eq!(pow_neg(2, &rat(3, 1)), rat(1, 8));
        let v = to_f64(&pow_neg(3, &rat(5, 2)));
        assert!((v - 3f64.powf(-2.5)).abs() < 1e-17);
    }

    #[test]
    fn sci_formats_tiny_values() {
        assert_eq!(sci(&rat(1, 8)), "1.250000e-1");
        assert_eq!(sci(&int(0)), "0");
        assert!(sci(&pow(&rat(1, 10), 400)).ends_with("e-400"));
    }

    #[test]
    fn sqrt_upper_is_exact_on_squares_and_bounds_otherwise() {
        assert_eq!(sqrt_upper(&rat(9, 16), 32), rat(3, 4));
        let two = int(2);
        let s = sqrt_upper(&two, 64);
        assert!(&s * &s >= two);
        assert!((to_f64(&s) - 2f64.sqrt()).abs() < 1e-15);
        let r = pow(&rat(1, 12), 8);
        assert_eq!(root_pow2_upper(&r, 3, 64), rat(1, 12));
    }
}
