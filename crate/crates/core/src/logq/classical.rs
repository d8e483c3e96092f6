//! q-expansions of `E4`, `E6`, `Delta` and the quasimodular `P`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::coeff::Coeff;
use super::{LogQSeries, Mu};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classical {
    E4,
    E6,
    Delta,
    /// `-1/12 + 2 sum sigma_1(n) q^n`
    P,
}

impl Classical {
    pub fn weight(self) -> i64 {
        match self {
            Classical::E4 => 4,
            Classical::E6 => 6,
            Classical::Delta => 12,
            Classical::P => 2,
        }
    }
}

impl fmt::Display for Classical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classical::E4 => "E4",
            Classical::E6 => "E6",
            Classical::Delta => "Delta",
            Classical::P => "P",
        })
    }
}

impl FromStr for Classical {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e4" | "q" => Ok(Classical::E4),
            "e6" | "r" => Ok(Classical::E6),
            "delta" => Ok(Classical::Delta),
            "p" => Ok(Classical::P),
            _ => Err(Error::InvalidInput(format!("unknown classical form {s:?}"))),
        }
    }
}

/// `sigma_k(n)` for `1 <= n < len` (index 0 is 0).
pub fn divisor_sums(k: u32, len: usize) -> Vec<i128> {
    let mut s = vec![0i128; len];
    for d in 1..len {
        let dk = (d as i128).pow(k);
        let mut m = d;
        while m < len {
            s[m] += dk;
            m += d;
        }
    }
    s
}

fn eisenstein_ints(scale: i128, k: u32, len: usize) -> Vec<i128> {
    let mut v: Vec<i128> = divisor_sums(k, len).into_iter().map(|s| s * scale).collect();
    if len > 0 {
        v[0] = 1;
    }
    v
}

fn wrapping_mul_series(a: &[i128], b: &[i128]) -> Vec<i128> {
    let len = a.len();
    let mut out = vec![0i128; len];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b[..len - i].iter().enumerate() {
            out[i + j] = out[i + j].wrapping_add(x.wrapping_mul(*y));
        }
    }
    out
}

/// Integer coefficients of `q^0 .. q^{len-1}` (for `P`, the coefficients of `12 P`).
///
/// `Delta` is computed as `(E4^3 - E6^2)/1728` with wrapping `i128` arithmetic:
/// the intermediate products overflow for large `n`, but the final values fit,
/// so the result is correct modulo `2^128` and hence exact.
pub fn classical_ints(which: Classical, len: usize) -> Vec<BigInt> {
    let v: Vec<i128> = match which {
        Classical::E4 => eisenstein_ints(240, 3, len),
        Classical::E6 => eisenstein_ints(-504, 5, len),
        Classical::P => {
            let mut v: Vec<i128> = divisor_sums(1, len).into_iter().map(|s| 24 * s).collect();
            if len > 0 {
                v[0] = -1;
            }
            v
        }
        Classical::Delta => {
            let e4 = eisenstein_ints(240, 3, len);
            let e6 = eisenstein_ints(-504, 5, len);
            let e4_3 = wrapping_mul_series(&wrapping_mul_series(&e4, &e4), &e4);
            let e6_2 = wrapping_mul_series(&e6, &e6);
            e4_3.iter()
                .zip(&e6_2)
                .map(|(a, b)| {
                    let d = a.wrapping_sub(*b);
                    debug_assert_eq!(d % 1728, 0);
                    d / 1728
                })
                .collect()
        }
    };
    v.into_iter().map(BigInt::from).collect()
}

/// Rational coefficients `a(0), ..., a(len-1)`.
pub fn classical_coeffs(which: Classical, len: usize) -> Vec<BigRational> {
    let ints = classical_ints(which, len);
    let den = BigInt::from(if which == Classical::P { 12 } else { 1 });
    ints.into_iter()
        .map(|n| BigRational::new(n, den.clone()))
        .collect()
}

/// The series known through `q^{order-1}`.
pub fn eisenstein<C: Coeff>(which: Classical, order: usize) -> LogQSeries<C> {
    let coeffs = classical_coeffs(which, order);
    let mut f = LogQSeries::zero(Mu::from_integer(0), order as i64);
    for (n, c) in coeffs.iter().enumerate() {
        f.set(n as i64, 0, C::from_rational(c));
    }
    f
}
