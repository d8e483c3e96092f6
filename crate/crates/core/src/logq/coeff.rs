//! Coefficient rings for q-series.
//!
//! `Complex64` is the floating-point ring. [`KappaPoly`] is the exact ring:
//! polynomials in `kappa = 1/(2 pi i)` with Gaussian-rational coefficients.
//! Differentiating in `tau` produces powers of `kappa`, so this ring is closed
//! under every operation the toolkit performs on rational input. Since `kappa`
//! is transcendental, two elements are equal iff all coefficients agree.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::io;
use crate::linalg::{self, CMatrix, GaussRational};

/// Scalar ring for series coefficients.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Field in which linear systems with these coefficients are solved.
    type Field: Clone + Debug + PartialEq + Send + Sync + 'static;

    /// True for exact rings.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(r: &BigRational) -> Self;
    fn from_gauss(z: &GaussRational) -> Self;
    fn from_field(f: &Self::Field) -> Self;
    /// `1 / (2 pi i)`.
    fn kappa() -> Self;
    fn to_c64(&self) -> Complex64;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Coordinates over `Field` used to split one equation into several.
    fn split(&self) -> Vec<Self::Field>;

    fn field_zero() -> Self::Field;
    fn field_is_zero(f: &Self::Field) -> bool;
    fn field_to_c64(f: &Self::Field) -> Complex64;
    fn field_div(a: &Self::Field, b: &Self::Field) -> Self::Field;
    fn field_json(f: &Self::Field, digits: usize) -> Value;

    /// Kernel basis of the row system `rows * x = 0` in `ncols` unknowns.
    fn kernel(rows: &[Vec<Self::Field>], ncols: usize, rel_tol: f64) -> Vec<Vec<Self::Field>>;

    fn to_json(&self, digits: usize) -> Value;
}

impl Coeff for Complex64 {
    type Field = Complex64;
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_rational(r: &BigRational) -> Self {
        use num_traits::ToPrimitive;
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_gauss(z: &GaussRational) -> Self {
        linalg::gauss_to_c64(z)
    }
    fn from_field(f: &Complex64) -> Self {
        *f
    }
    fn kappa() -> Self {
        Complex64::new(0.0, -1.0 / (2.0 * PI))
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn split(&self) -> Vec<Complex64> {
        vec![*self]
    }
    fn field_zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn field_is_zero(f: &Complex64) -> bool {
        f.norm() == 0.0
    }
    fn field_to_c64(f: &Complex64) -> Complex64 {
        *f
    }
    fn field_div(a: &Complex64, b: &Complex64) -> Complex64 {
        a / b
    }
    fn field_json(f: &Complex64, digits: usize) -> Value {
        io::complex_json(*f, digits)
    }
    fn kernel(rows: &[Vec<Complex64>], ncols: usize, rel_tol: f64) -> Vec<Vec<Complex64>> {
        if rows.is_empty() {
            return (0..ncols)
                .map(|i| {
                    let mut v = vec![Complex64::new(0.0, 0.0); ncols];
                    v[i] = Complex64::new(1.0, 0.0);
                    v
                })
                .collect();
        }
        let m = CMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        linalg::equilibrated_kernel(&m, rel_tol)
    }
    fn to_json(&self, digits: usize) -> Value {
        io::complex_json(*self, digits)
    }
}

/// Exact element `sum_i c_i kappa^i` with `c_i` in `Q(i)`.
///
/// Trailing zero coefficients are always stripped, so the zero element is
/// the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct KappaPoly(Vec<GaussRational>);

impl KappaPoly {
    pub fn new(mut coeffs: Vec<GaussRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn constant(z: GaussRational) -> Self {
        Self::new(vec![z])
    }

    pub fn coeffs(&self) -> &[GaussRational] {
        &self.0
    }

    /// Degree in `kappa` (`None` for zero).
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// The value if the element does not involve `kappa`.
    pub fn as_constant(&self) -> Option<GaussRational> {
        match self.0.len() {
            0 => Some(GaussRational::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }

    pub fn scale(&self, z: &GaussRational) -> Self {
        Self::new(self.0.iter().map(|c| c.clone() * z.clone()).collect())
    }
}

impl Add for KappaPoly {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (mut long, short) = if self.0.len() >= rhs.0.len() {
            (self.0, rhs.0)
        } else {
            (rhs.0, self.0)
        };
        for (a, b) in long.iter_mut().zip(short) {
            *a = a.clone() + b;
        }
        Self::new(long)
    }
}

impl Neg for KappaPoly {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Sub for KappaPoly {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for KappaPoly {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Self::default();
        }
        let mut out = vec![GaussRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }
}

impl Coeff for KappaPoly {
    type Field = GaussRational;
    const EXACT: bool = true;

    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::constant(GaussRational::one())
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    fn from_rational(r: &BigRational) -> Self {
        Self::constant(linalg::gauss_from_ratio(r.clone()))
    }
    fn from_gauss(z: &GaussRational) -> Self {
        Self::constant(z.clone())
    }
    fn from_field(f: &GaussRational) -> Self {
        Self::constant(f.clone())
    }
    fn kappa() -> Self {
        Self::new(vec![GaussRational::zero(), GaussRational::one()])
    }
    fn to_c64(&self) -> Complex64 {
        let k = <Complex64 as Coeff>::kappa();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            acc = acc * k + linalg::gauss_to_c64(c);
        }
        acc
    }
    fn split(&self) -> Vec<GaussRational> {
        self.0.clone()
    }
    fn field_zero() -> GaussRational {
        GaussRational::zero()
    }
    fn field_is_zero(f: &GaussRational) -> bool {
        f.is_zero()
    }
    fn field_to_c64(f: &GaussRational) -> Complex64 {
        linalg::gauss_to_c64(f)
    }
    fn field_div(a: &GaussRational, b: &GaussRational) -> GaussRational {
        a.clone() / b.clone()
    }
    fn field_json(f: &GaussRational, _digits: usize) -> Value {
        io::gauss_json(f)
    }
    fn kernel(rows: &[Vec<GaussRational>], ncols: usize, _rel_tol: f64) -> Vec<Vec<GaussRational>> {
        linalg::exact_kernel(rows, ncols)
    }
    fn to_json(&self, _digits: usize) -> Value {
        match self.as_constant() {
            Some(z) => io::gauss_json(&z),
            None => serde_json::json!({ "kappa": self.0.iter().map(io::gauss_json).collect::<Vec<_>>() }),
        }
    }
}
