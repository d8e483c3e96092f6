//! Exact arithmetic in the modular group SL2(Z).
//!
//! Elements carry arbitrary-size integer entries. The canonical word of an
//! element is
//!
//! ```text
//! gamma = eps * T^m * (S T^{l_v}) ... (S T^{l_1}) (S T^{l_0})
//! ```
//!
//! with `eps = +-1`, `(-1)^(j-1) l_j > 0` for `1 <= j <= v`, and the inner word
//! `W` normalized so that `W(oo) = a_W / c_W` lies in `(-1, 0]`. Under this
//! normalization `v` is zero or odd and the representation is unique. Elements
//! with `c = 0` are `eps * T^m` with an empty word.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An integer 2x2 matrix of determinant one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GammaElement {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl GammaElement {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let (a, b, c, d) = (a.into(), b.into(), c.into(), d.into());
        let det = &a * &d - &b * &c;
        if !det.is_one() {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        Ok(Self { a, b, c, d })
    }

    fn raw(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        debug_assert!((&a * &d - &b * &c).is_one());
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::raw(1.into(), 0.into(), 0.into(), 1.into())
    }

    pub fn minus_identity() -> Self {
        Self::raw((-1).into(), 0.into(), 0.into(), (-1).into())
    }

    /// `S = (0, -1; 1, 0)`.
    pub fn s() -> Self {
        Self::raw(0.into(), (-1).into(), 1.into(), 0.into())
    }

    /// `T = (1, 1; 0, 1)`.
    pub fn t() -> Self {
        Self::raw(1.into(), 1.into(), 0.into(), 1.into())
    }

    pub fn t_pow(m: impl Into<BigInt>) -> Self {
        Self::raw(1.into(), m.into(), 0.into(), 1.into())
    }

    /// `S T^l = (0, -1; 1, l)`.
    pub fn st_pow(l: impl Into<BigInt>) -> Self {
        Self::raw(0.into(), (-1).into(), 1.into(), l.into())
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn to_i64s(&self) -> Option<[i64; 4]> {
        Some([
            self.a.to_i64()?,
            self.b.to_i64()?,
            self.c.to_i64()?,
            self.d.to_i64()?,
        ])
    }

    pub fn to_f64s(&self) -> [f64; 4] {
        let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
        [f(&self.a), f(&self.b), f(&self.c), f(&self.d)]
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries().iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::raw(
            &self.a * &other.a + &self.b * &other.c,
            &self.a * &other.b + &self.b * &other.d,
            &self.c * &other.a + &self.d * &other.c,
            &self.c * &other.b + &self.d * &other.d,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d.clone(), -self.b.clone(), -self.c.clone(), self.a.clone())
    }

    pub fn neg(&self) -> Self {
        Self::raw(-self.a.clone(), -self.b.clone(), -self.c.clone(), -self.d.clone())
    }

    /// Mobius action `(a tau + b) / (c tau + d)`.
    pub fn mobius(&self, tau: Complex64) -> Complex64 {
        let [a, b, c, d] = self.to_f64s();
        (tau * a + b) / (tau * c + d)
    }

    /// The automorphy cocycle `j(g, tau) = c tau + d`.
    pub fn cocycle_j(&self, tau: Complex64) -> Complex64 {
        let [_, _, c, d] = self.to_f64s();
        tau * c + d
    }

    /// Canonical Eichler word of this element.
    pub fn eichler_decompose(&self) -> EichlerWord {
        eichler_decompose(self)
    }
}

impl Mul for &GammaElement {
    type Output = GammaElement;
    fn mul(self, rhs: &GammaElement) -> GammaElement {
        self.compose(rhs)
    }
}

impl Mul for GammaElement {
    type Output = GammaElement;
    fn mul(self, rhs: GammaElement) -> GammaElement {
        self.compose(&rhs)
    }
}

impl fmt::Display for GammaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for GammaElement {
    type Err = Error;

    /// Parses `a,b,c,d`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "expected four comma-separated integers, got {s:?}"
            )));
        }
        let mut v = Vec::with_capacity(4);
        for p in parts {
            v.push(BigInt::from_str(p).map_err(|e| Error::InvalidInput(format!("bad integer {p:?}: {e}")))?);
        }
        let mut it = v.into_iter();
        let (a, b, c, d) = (
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        );
        GammaElement::new(a, b, c, d)
    }
}

/// Canonical word `eps * T^shift * (S T^{l_v}) ... (S T^{l_0})`.
///
/// `exponents` holds `(l_0, ..., l_v)`; it is empty exactly when `c = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EichlerWord {
    pub sign: i8,
    pub shift: BigInt,
    pub exponents: Vec<BigInt>,
}

impl EichlerWord {
    /// Word depth `v`, or `None` for the empty word.
    pub fn depth(&self) -> Option<usize> {
        self.exponents.len().checked_sub(1)
    }

    /// Eichler length `L`: `2v + 2` if `l_0 != 0`, `2v + 1` if `l_0 = 0`, and 0
    /// for the empty word.
    pub fn length(&self) -> usize {
        eichler_length(&self.exponents)
    }

    /// True iff `(-1)^(j-1) l_j > 0` for `1 <= j <= v`.
    pub fn is_sign_valid(&self) -> bool {
        exponents_sign_valid(&self.exponents)
    }

    /// The pure word `(S T^{l_v}) ... (S T^{l_0})` without sign or shift.
    pub fn inner(&self) -> GammaElement {
        word_product(&self.exponents)
    }

    pub fn reconstruct(&self) -> GammaElement {
        let mut g = GammaElement::t_pow(self.shift.clone()).compose(&self.inner());
        if self.sign < 0 {
            g = g.neg();
        }
        g
    }
}

/// Eichler length of an exponent list `(l_0, ..., l_v)`.
pub fn eichler_length(exponents: &[BigInt]) -> usize {
    match exponents.first() {
        None => 0,
        Some(l0) => {
            let v = exponents.len() - 1;
            if l0.is_zero() {
                2 * v + 1
            } else {
                2 * v + 2
            }
        }
    }
}

pub fn exponents_sign_valid(exponents: &[BigInt]) -> bool {
    exponents.iter().enumerate().skip(1).all(|(j, l)| {
        if j % 2 == 1 {
            l.is_positive()
        } else {
            l.is_negative()
        }
    })
}

/// `(S T^{l_v}) ... (S T^{l_0})`; the identity for an empty list.
pub fn word_product(exponents: &[BigInt]) -> GammaElement {
    exponents.iter().fold(GammaElement::identity(), |acc, l| {
        GammaElement::st_pow(l.clone()).compose(&acc)
    })
}

fn floor_rat(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

pub fn eichler_decompose(g: &GammaElement) -> EichlerWord {
    if g.c.is_zero() {
        // d = +-1 and g = d * T^(b d)
        let sign: i8 = if g.d.is_positive() { 1 } else { -1 };
        let shift = &g.b * &g.d;
        return EichlerWord {
            sign,
            shift,
            exponents: Vec::new(),
        };
    }

    let x = BigRational::new(g.a.clone(), g.c.clone());
    let shift = x.ceil().to_integer();
    let mut x = x - BigRational::from_integer(shift.clone());

    // Levels l_v, l_{v-1}, ..., l_1 (outermost first).
    let mut levels: Vec<BigInt> = Vec::new();
    if !x.is_zero() {
        let mut odd = true;
        loop {
            let y = -x.recip();
            if odd {
                let l = floor_rat(&y);
                x = y - BigRational::from_integer(l.clone());
                levels.push(l);
                if x.is_zero() {
                    break;
                }
            } else {
                let l: BigInt = floor_rat(&y) + 1;
                x = y - BigRational::from_integer(l.clone());
                levels.push(l);
            }
            odd = !odd;
        }
    }

    let mut exponents: Vec<BigInt> = Vec::with_capacity(levels.len() + 1);
    exponents.push(BigInt::zero());
    exponents.extend(levels.into_iter().rev());
    let u = word_product(&exponents);

    // g = eps T^m U T^{l_0}: compare bottom rows.
    let sign: i8 = if g.c.is_positive() == u.c.is_positive() {
        1
    } else {
        -1
    };
    let eps = BigInt::from(sign);
    let (l0, rem) = (&eps * &g.d - &u.d).div_rem(&u.c);
    debug_assert!(rem.is_zero());
    exponents[0] = l0;

    let word = EichlerWord {
        sign,
        shift,
        exponents,
    };
    debug_assert_eq!(&word.reconstruct(), g);
    word
}

/// One representative per coset of `<T>\Gamma` (or `+-<T>\Gamma` when
/// `mod_minus`) with bottom row `(c, d)`, `gcd(c, d) = 1`, `|c|, |d| <= n`.
///
/// Representatives with `c != 0` have `a / c` in `(-1, 0]`. The list is ordered
/// by `(|c|, |d|, c < 0, d < 0)`; the identity comes first.
pub fn coset_reps(n: u64, mod_minus: bool) -> Vec<GammaElement> {
    let n = n as i64;
    let mut out = vec![GammaElement::identity()];
    if !mod_minus {
        out.push(GammaElement::minus_identity());
    }
    let mut rows: Vec<(i64, i64)> = Vec::new();
    for c in 1..=n {
        for d in -n..=n {
            if c.gcd(&d) != 1 {
                continue;
            }
            rows.push((c, d));
            if !mod_minus {
                rows.push((-c, -d));
            }
        }
    }
    rows.sort_by_key(|&(c, d)| (c.abs(), d.abs(), c < 0, d < 0));
    out.extend(rows.into_iter().map(|(c, d)| coset_rep_for_row(c, d)));
    out
}

/// The normalized representative with bottom row `(c, d)`, `c != 0`.
pub fn coset_rep_for_row(c: i64, d: i64) -> GammaElement {
    assert!(c != 0, "bottom row must have c != 0");
    let m = c.abs();
    let ext = d.rem_euclid(m).extended_gcd(&m);
    debug_assert_eq!(ext.gcd, 1, "bottom row must be coprime");
    // a = d^{-1} mod |c|, shifted so that a / c lies in (-1, 0].
    let mut a = ext.x.rem_euclid(m);
    if m == 1 {
        a = 0;
    }
    if c > 0 && a > 0 {
        a -= m;
    }
    let num = a as i128 * d as i128 - 1;
    let b = (num / c as i128) as i64;
    GammaElement::raw(a.into(), b.into(), c.into(), d.into())
}

/// Canonical key of the coset containing `g`.
pub fn coset_key(g: &GammaElement, mod_minus: bool) -> (BigInt, BigInt) {
    let (c, d) = (g.c.clone(), g.d.clone());
    if mod_minus && (c.is_negative() || (c.is_zero() && d.is_negative())) {
        (-c, -d)
    } else {
        (c, d)
    }
}

/// Membership test `g h^{-1}` in `<T>` (or `+-<T>`).
pub fn same_coset(g: &GammaElement, h: &GammaElement, mod_minus: bool) -> bool {
    let x = g.compose(&h.inverse());
    x.c.is_zero() && (x.d.is_one() || (mod_minus && (-&x.d).is_one()))
}
