//! JSON helpers shared by the file formats.
//!
//! Reals are written as decimal strings; on input a real may be a JSON number,
//! a decimal string, or a fraction string `"p/q"`. Strings and integers parse
//! exactly, JSON floats do not.

use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::GaussRational;

/// A real read from JSON, exact when the source was.
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedReal {
    Exact(BigRational),
    Float(f64),
}

impl ParsedReal {
    pub fn to_f64(&self) -> f64 {
        match self {
            ParsedReal::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            ParsedReal::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            ParsedReal::Exact(r) => Some(r),
            ParsedReal::Float(_) => None,
        }
    }
}

/// Parses `"-12"`, `"3/8"`, `"0.125"`, `"1.5e-3"` exactly.
pub fn parse_rational_str(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], i32::from_str(&s[pos + 1..]).ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn parse_real(v: &Value) -> Result<ParsedReal> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(ParsedReal::Exact(BigRational::from_integer(i.into())))
            } else {
                n.as_f64()
                    .map(ParsedReal::Float)
                    .ok_or_else(|| Error::InvalidInput(format!("bad number {n}")))
            }
        }
        Value::String(s) => parse_rational_str(s)
            .map(ParsedReal::Exact)
            .or_else(|| f64::from_str(s.trim()).ok().map(ParsedReal::Float))
            .ok_or_else(|| Error::InvalidInput(format!("bad real {s:?}"))),
        other => Err(Error::InvalidInput(format!("expected a real, got {other}"))),
    }
}

/// A complex `[re, im]` pair (a bare real is accepted as `[re, 0]`).
pub fn parse_complex(v: &Value) -> Result<(ParsedReal, ParsedReal)> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok((parse_real(&pair[0])?, parse_real(&pair[1])?)),
        Value::Number(_) | Value::String(_) => Ok((parse_real(v)?, ParsedReal::Exact(BigRational::zero()))),
        other => Err(Error::InvalidInput(format!("expected [re, im], got {other}"))),
    }
}

pub fn complex_to_c64(z: &(ParsedReal, ParsedReal)) -> Complex64 {
    Complex64::new(z.0.to_f64(), z.1.to_f64())
}

pub fn complex_to_gauss(z: &(ParsedReal, ParsedReal)) -> Option<GaussRational> {
    Some(GaussRational::new(z.0.exact()?.clone(), z.1.exact()?.clone()))
}

/// Decimal string for `x` with `digits` significant digits; 17 or more
/// gives the shortest round-trip representation.
pub fn format_real(x: f64, digits: usize) -> String {
    if digits >= 17 || digits == 0 {
        format!("{x:e}")
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

pub fn complex_json(z: Complex64, digits: usize) -> Value {
    Value::Array(vec![
        Value::String(format_real(z.re, digits)),
        Value::String(format_real(z.im, digits)),
    ])
}

pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn gauss_json(z: &GaussRational) -> Value {
    Value::Array(vec![
        Value::String(rational_string(&z.re)),
        Value::String(rational_string(&z.im)),
    ])
}

/// JSON integer when it fits in `i64`, otherwise a decimal string.
pub fn bigint_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(i) => Value::from(i),
        None => Value::String(n.to_string()),
    }
}
