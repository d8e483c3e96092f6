//! Binomial polynomials and the lower-triangular Toeplitz matrices `B_m(x)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial in one variable with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Self(c)
    }

    pub fn constant(r: BigRational) -> Self {
        Self::new(vec![r])
    }

    pub fn from_i64(n: i64) -> Self {
        Self::constant(rat(n))
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| {
            acc * x + Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)
        })
    }

    /// `p(x + a)`.
    pub fn shift(&self, a: &BigRational) -> Self {
        let lin = Poly::new(vec![a.clone(), BigRational::one()]);
        self.0.iter().rev().fold(Poly::default(), |acc, c| {
            acc * lin.clone() + Poly::constant(c.clone())
        })
    }
}

impl Add for Poly {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.0.len().max(rhs.0.len());
        let c = (0..n)
            .map(|i| {
                self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
                    + rhs.0.get(i).cloned().unwrap_or_else(BigRational::zero)
            })
            .collect();
        Self::new(c)
    }
}

impl Neg for Poly {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Sub for Poly {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for Poly {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::default();
        }
        let mut c = vec![BigRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `binom(x + a, k)` as a polynomial in `x`.
pub fn binom_poly(a: i64, k: usize) -> Poly {
    let mut p = Poly::from_i64(1);
    for i in 0..k {
        p = p * Poly::new(vec![rat(a - i as i64), BigRational::one()]);
    }
    p * Poly::constant(BigRational::new(BigInt::one(), factorial(k)))
}

/// `binom(x, k)` at a complex point.
pub fn binom_c64(x: Complex64, k: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..k {
        acc = acc * (x - i as f64) / (i as f64 + 1.0);
    }
    acc
}

/// Integer coefficients `c_k` with `binom(x,a) binom(x,b) = sum_k c_k binom(x, a+b-k)`,
/// indexed by `k = 0..=min(a,b)`.
pub fn binom_product_coeffs(a: usize, b: usize) -> Vec<BigInt> {
    (0..=a.min(b))
        .map(|k| factorial(a + b - k) / (factorial(k) * factorial(a - k) * factorial(b - k)))
        .collect()
}

/// `d/dx binom(x, j) = sum_{i=1}^{j} (-1)^{i-1}/i * binom(x, j-i)`; entry `i-1` holds the
/// coefficient of `binom(x, j-i)`.
pub fn binom_derivative_coeffs(j: usize) -> Vec<BigRational> {
    (1..=j)
        .map(|i| {
            let s = if i % 2 == 1 { 1 } else { -1 };
            BigRational::new(BigInt::from(s), BigInt::from(i))
        })
        .collect()
}

/// Signed Stirling numbers of the first kind `s(n, k)` for `n, k <= max`.
pub fn stirling1(max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); max + 1]; max + 1];
    s[0][0] = BigInt::one();
    for n in 1..=max {
        for k in 1..=n {
            s[n][k] = &s[n - 1][k - 1] - BigInt::from(n - 1) * &s[n - 1][k];
        }
    }
    s
}

/// Stirling numbers of the second kind `S(n, k)` for `n, k <= max`.
pub fn stirling2(max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); max + 1]; max + 1];
    s[0][0] = BigInt::one();
    for n in 1..=max {
        for k in 1..=n {
            s[n][k] = BigInt::from(k) * &s[n - 1][k] + &s[n - 1][k - 1];
        }
    }
    s
}

/// Rational matrix `M[i][k]` with `binom(x, i) = sum_k M[i][k] x^k`.
pub fn binom_to_power(max: usize) -> Vec<Vec<BigRational>> {
    let s1 = stirling1(max);
    (0..=max)
        .map(|i| {
            let f = factorial(i);
            (0..=max)
                .map(|k| BigRational::new(s1[i][k].clone(), f.clone()))
                .collect()
        })
        .collect()
}

/// Rational matrix `M[k][j]` with `x^k = sum_j M[k][j] binom(x, j)`.
pub fn power_to_binom(max: usize) -> Vec<Vec<BigRational>> {
    let s2 = stirling2(max);
    (0..=max)
        .map(|k| {
            (0..=max)
                .map(|j| BigRational::from_integer(&s2[k][j] * factorial(j)))
                .collect()
        })
        .collect()
}

/// `m x m` matrix of polynomials in `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomMatrix {
    m: usize,
    entries: Vec<Vec<Poly>>,
}

impl BinomMatrix {
    pub fn size(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i][j]
    }

    pub fn identity(m: usize) -> Self {
        Self::from_fn(m, |i, j| {
            if i == j {
                Poly::from_i64(1)
            } else {
                Poly::default()
            }
        })
    }

    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> Poly) -> Self {
        Self {
            m,
            entries: (0..m).map(|i| (0..m).map(|j| f(i, j)).collect()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        Self::from_fn(self.m, |i, j| {
            (0..self.m).fold(Poly::default(), |acc, k| {
                acc + self.entries[i][k].clone() * other.entries[k][j].clone()
            })
        })
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_fn(self.m, |i, j| {
            self.entries[i][j].clone() * Poly::constant(c.clone())
        })
    }

    /// Substitute `x -> x + a` in every entry.
    pub fn shift(&self, a: &BigRational) -> Self {
        Self::from_fn(self.m, |i, j| self.entries[i][j].shift(a))
    }

    pub fn eval(&self, x: Complex64) -> crate::linalg::CMatrix {
        crate::linalg::CMatrix::from_fn(self.m, self.m, |i, j| self.entries[i][j].eval(x))
    }

    /// True iff every entry depends only on `i - j` and the upper triangle vanishes.
    pub fn is_lower_toeplitz(&self) -> bool {
        (0..self.m).all(|i| {
            (0..self.m).all(|j| {
                if j > i {
                    self.entries[i][j].is_zero()
                } else {
                    self.entries[i][j] == self.entries[i - j][0]
                }
            })
        })
    }
}

/// `B_m(x)` with entries `(-1)^{i-j} binom(x + i - j - 1, i - j)` for `i >= j`.
pub fn binom_matrix(m: usize) -> BinomMatrix {
    BinomMatrix::from_fn(m, |i, j| {
        if j > i {
            Poly::default()
        } else {
            let k = i - j;
            let p = binom_poly(k as i64 - 1, k);
            if k % 2 == 0 {
                p
            } else {
                -p
            }
        }
    })
}

/// `B_m(x)^{-1}` with entries `binom(x, i - j)`.
pub fn binom_matrix_inverse(m: usize) -> BinomMatrix {
    BinomMatrix::from_fn(m, |i, j| {
        if j > i {
            Poly::default()
        } else {
            binom_poly(0, i - j)
        }
    })
}

/// The unipotent part `J_{m,1}` as a constant polynomial matrix.
pub fn jordan_unipotent(m: usize) -> BinomMatrix {
    BinomMatrix::from_fn(m, |i, j| {
        if i == j || i == j + 1 {
            Poly::from_i64(1)
        } else {
            Poly::default()
        }
    })
}

/// `h = B_m(tau) g` for sampled values at one point `tau`.
pub fn g_to_h_values(g: &[Complex64], tau: Complex64) -> Vec<Complex64> {
    let m = g.len();
    (0..m)
        .map(|i| {
            (0..=i)
                .map(|j| {
                    let k = i - j;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    binom_c64(tau + (k as f64 - 1.0), k) * sign * g[j]
                })
                .sum()
        })
        .collect()
}

/// `g_j = sum_t binom(tau, t) h_{j-t}` for sampled values.
pub fn h_to_g_values(h: &[Complex64], tau: Complex64) -> Vec<Complex64> {
    (0..h.len())
        .map(|j| (0..=j).map(|t| binom_c64(tau, t) * h[j - t]).sum())
        .collect()
}

pub(crate) fn check_block_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::BlockMismatch(format!(
            "expected {expected} components, got {got}"
        )));
    }
    Ok(())
}

/// Binomial coefficient `binom(n, k)` as `f64` for small arguments.
pub fn binom_f64(n: i64, k: usize) -> f64 {
    binom_c64(Complex64::new(n as f64, 0.0), k).re
}

/// `binom(n, k)` for integer `n` (possibly negative) as an exact integer.
pub fn binom_int(n: &BigInt, k: usize) -> BigInt {
    let mut num = BigInt::one();
    for i in 0..k {
        num *= n - BigInt::from(i);
    }
    num / factorial(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b2_matches_closed_form() {
        let b = binom_matrix(2);
        assert_eq!(b.entry(1, 0), &(-Poly::x()));
        let bi = binom_matrix_inverse(2);
        assert_eq!(bi.entry(1, 0), &Poly::x());
        assert_eq!(binom_matrix(1), BinomMatrix::identity(1));
        assert_eq!(binom_matrix_inverse(1), BinomMatrix::identity(1));
    }

    #[test]
    fn inverse_and_shift_identities() {
        for m in 1..=6 {
            let b = binom_matrix(m);
            let bi = binom_matrix_inverse(m);
            assert_eq!(b.mul(&bi), BinomMatrix::identity(m), "m = {m}");
            assert_eq!(bi.mul(&b), BinomMatrix::identity(m), "m = {m}");
            let lhs = jordan_unipotent(m).mul(&bi);
            let rhs = bi.shift(&rat(1));
            assert_eq!(lhs, rhs, "m = {m}");
            assert!(b.is_lower_toeplitz() && bi.is_lower_toeplitz());
        }
    }

    #[test]
    fn product_coefficients() {
        assert_eq!(binom_product_coeffs(1, 1), vec![BigInt::from(2), BigInt::from(1)]);
        // binom(x,2) binom(x,1) = 3 binom(x,3) + 2 binom(x,2)
        assert_eq!(binom_product_coeffs(2, 1), vec![BigInt::from(3), BigInt::from(2)]);
        let x = Complex64::new(0.37, 1.3);
        for a in 0..5 {
            for b in 0..5 {
                let lhs = binom_c64(x, a) * binom_c64(x, b);
                let rhs: Complex64 = binom_product_coeffs(a, b)
                    .iter()
                    .enumerate()
                    .map(|(k, c)| binom_c64(x, a + b - k) * c.to_f64().unwrap())
                    .sum();
                assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
            }
        }
    }

    #[test]
    fn stirling_round_trip() {
        let a = binom_to_power(6);
        let b = power_to_binom(6);
        for i in 0..=6 {
            for j in 0..=6 {
                let s: BigRational = (0..=6).map(|k| &a[i][k] * &b[k][j]).sum();
                assert_eq!(s, if i == j { rat(1) } else { rat(0) });
            }
        }
    }

    #[test]
    fn g_h_value_round_trip() {
        let tau = Complex64::new(0.3, 1.1);
        let g = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.25),
            Complex64::new(3.0, -1.0),
        ];
        let h = g_to_h_values(&g, tau);
        let back = h_to_g_values(&h, tau);
        for (a, b) in g.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        // (1, tau) has h-data (1, 0)
        let h = g_to_h_values(&[Complex64::new(1.0, 0.0), tau], tau);
        assert!(h[1].norm() < 1e-15);
    }

    #[test]
    fn binom_int_negative() {
        assert_eq!(binom_int(&BigInt::from(-2), 3), BigInt::from(-4));
        assert_eq!(binom_int(&BigInt::from(5), 2), BigInt::from(10));
    }
}
