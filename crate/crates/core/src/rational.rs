//! Exact number types and the string codecs used in every JSON format.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

/// Coefficient field: arbitrary-precision rationals.
pub type Rational = BigRational;

/// Slopes and ε/λ exponents. Powers are capped, so `i64` never overflows in practice.
pub type Exponent = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn exp(n: i64, d: i64) -> Exponent {
    Exponent::new(n, d)
}

pub fn exponent_to_rational(e: Exponent) -> Rational {
    rat(*e.numer(), *e.denom())
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn exp_to_f64(e: Exponent) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

pub fn format_exponent(e: Exponent) -> String {
    e.to_string()
}

/// Accepts `"p/q"`, `"p"` and finite decimals such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("invalid rational {s:?}"));
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let numer: BigInt = digits.parse().map_err(|_| format!("invalid rational {s:?}"))?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(numer, denom);
        return Ok(if neg { -q } else { q });
    }
    let q: Rational = t.parse().map_err(|_| format!("invalid rational {s:?}"))?;
    Ok(q)
}

pub fn parse_exponent(s: &str) -> Result<Exponent, String> {
    let q = parse_rational(s)?;
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Exponent::new(n, d)),
        _ => Err(format!("exponent {s:?} out of range")),
    }
}

/// Exact `base^e` for `base > 0`, when the root is rational.
pub fn rational_pow(base: &Rational, e: Exponent) -> Option<Rational> {
    if !base.is_positive() {
        return None;
    }
    let d = u32::try_from(*e.denom()).ok()?;
    let n = *e.numer();
    let root = if d == 1 {
        base.clone()
    } else {
        let rn = exact_root(base.numer(), d)?;
        let rd = exact_root(base.denom(), d)?;
        Rational::new(rn, rd)
    };
    let mag = usize::try_from(n.unsigned_abs()).ok()?;
    let p = num_traits::pow(root, mag);
    Some(if n < 0 { p.recip() } else { p })
}

fn exact_root(v: &BigInt, d: u32) -> Option<BigInt> {
    let r = v.nth_root(d);
    (num_traits::pow(r.clone(), d as usize) == *v).then_some(r)
}

/// `base^e` as a float, exact where possible.
pub fn pow_f64(base: &Rational, e: Exponent) -> f64 {
    match rational_pow(base, e) {
        Some(q) => to_f64(&q),
        None => to_f64(base).powf(exp_to_f64(e)),
    }
}

pub fn int_pow(base: &Rational, e: i64) -> Rational {
    if e == 0 {
        return Rational::one();
    }
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn is_zero(q: &Rational) -> bool {
    q.is_zero()
}

pub fn ser_rational<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

pub fn de_rational<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let s = RationalRepr::deserialize(d)?;
    s.into_rational().map_err(serde::de::Error::custom)
}

pub fn ser_exponent<S: Serializer>(e: &Exponent, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_exponent(*e))
}

pub fn de_exponent<'de, D: Deserializer<'de>>(d: D) -> Result<Exponent, D::Error> {
    let s = RationalRepr::deserialize(d)?;
    let q = s.into_rational().map_err(serde::de::Error::custom)?;
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Exponent::new(n, d)),
        _ => Err(serde::de::Error::custom("exponent out of range")),
    }
}

/// Rationals may be written as strings or as plain JSON integers.
#[derive(Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Str(String),
    Int(i64),
}

impl RationalRepr {
    fn into_rational(self) -> Result<Rational, String> {
        match self {
            RationalRepr::Str(s) => parse_rational(&s),
            RationalRepr::Int(i) => Ok(rat_int(i)),
        }
    }
}
