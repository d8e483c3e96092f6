//! Logarithmic q-series.
//!
//! A [`LogQSeries`] is a finite sum `sum_{n,j} c_{n,j} binom(tau, j) q^{n + mu}`
//! with `mu` in `[0, 1)`, known exactly for all `n < order`. The binomial basis
//! is canonical; the power basis `tau^j` is available as a view. For each
//! `tau`-degree `j`, the coefficients `c_{., j}` form an ordinary q-series.
//!
//! Truncation orders propagate pessimistically: a sum is known up to the
//! smaller order, and a product `f g` up to `min(o_f + v_g, o_g + v_f)` where
//! `v` is the lowest exponent present.

pub mod binom;
pub mod classical;
pub mod coeff;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io;
pub use crate::rep::Mu;
use binom::{binom_c64, binom_derivative_coeffs, binom_product_coeffs, check_block_len, Poly};
use classical::{eisenstein, Classical};
pub use coeff::{Coeff, KappaPoly};

/// Order used for series that are exact, such as polynomials in `tau`.
pub const EXACT_ORDER: i64 = i64::MAX / 4;

#[derive(Clone, Debug, PartialEq)]
pub struct LogQSeries<C> {
    mu: Mu,
    order: i64,
    terms: BTreeMap<(i64, usize), C>,
}

/// Behavior at the cusp.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Meromorphic,
    Holomorphic,
    Cuspidal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Meromorphic => "meromorphic",
            Classification::Holomorphic => "holomorphic",
            Classification::Cuspidal => "cuspidal",
        })
    }
}

/// Value of a truncated series with an estimate of the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub error_bound: f64,
}

fn mu_rational(mu: &Mu) -> BigRational {
    BigRational::new(BigInt::from(*mu.numer()), BigInt::from(*mu.denom()))
}

fn add_order(a: i64, b: i64) -> i64 {
    if a >= EXACT_ORDER || b >= EXACT_ORDER {
        EXACT_ORDER
    } else {
        a + b
    }
}

impl<C: Coeff> LogQSeries<C> {
    pub fn zero(mu: Mu, order: i64) -> Self {
        Self {
            mu: crate::rep::normalize_mu(mu),
            order,
            terms: BTreeMap::new(),
        }
    }

    /// The constant `c`, known to `order`.
    pub fn constant(c: C, order: i64) -> Self {
        let mut f = Self::zero(Mu::zero(), order);
        f.set(0, 0, c);
        f
    }

    pub fn one(order: i64) -> Self {
        Self::constant(C::one(), order)
    }

    /// `c binom(tau, j) q^{n + mu}`.
    pub fn monomial(mu: Mu, n: i64, j: usize, c: C, order: i64) -> Self {
        let mut f = Self::zero(mu, order);
        f.set(n, j, c);
        f
    }

    /// The polynomial `p(tau)` (rational coefficients in the power basis).
    pub fn from_tau_poly(p: &Poly, order: i64) -> Self {
        let deg = p.degree().unwrap_or(0);
        let conv = binom::power_to_binom(deg);
        let mut f = Self::zero(Mu::zero(), order);
        for (k, c) in p.coeffs().iter().enumerate() {
            for (j, m) in conv[k].iter().enumerate() {
                if !m.is_zero() {
                    f.add_to(0, j, C::from_rational(&(c * m)));
                }
            }
        }
        f
    }

    pub fn mu(&self) -> Mu {
        self.mu
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, usize), &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn get(&self, n: i64, j: usize) -> C {
        self.terms.get(&(n, j)).cloned().unwrap_or_else(C::zero)
    }

    /// Set a coefficient; terms at or beyond the order are dropped.
    pub fn set(&mut self, n: i64, j: usize, c: C) {
        if n >= self.order || c.is_zero() {
            self.terms.remove(&(n, j));
        } else {
            self.terms.insert((n, j), c);
        }
    }

    pub fn add_to(&mut self, n: i64, j: usize, c: C) {
        if n >= self.order {
            return;
        }
        let cur = self.get(n, j);
        self.set(n, j, cur + c);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `tau`-degree present.
    pub fn tau_degree(&self) -> Option<usize> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    /// Lowest `n` with a nonzero term.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().map(|&(n, _)| n)
    }

    fn valuation_or_order(&self) -> i64 {
        self.valuation().unwrap_or(self.order)
    }

    /// Copy with the order lowered to `order` (never raised).
    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        Self {
            mu: self.mu,
            order,
            terms: self
                .terms
                .range(..(order, 0))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Fails with `TruncationUnderflow` unless the order is at least `needed`.
    pub fn require_order(&self, needed: i64) -> Result<()> {
        if self.order < needed {
            return Err(Error::TruncationUnderflow(format!(
                "series known to q^{} but q^{needed} required",
                self.order
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.mu != other.mu {
            return Err(Error::MuMismatch(self.mu.to_string(), other.mu.to_string()));
        }
        let mut out = self.truncate(other.order);
        for (&(n, j), c) in &other.terms {
            out.add_to(n, j, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            mu: self.mu,
            order: self.order,
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, c: &C) -> Self {
        let mut out = Self::zero(self.mu, self.order);
        for (&(n, j), v) in &self.terms {
            out.set(n, j, v.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let sum = self.mu + other.mu;
        let carry = if sum >= Mu::one() { 1 } else { 0 };
        let mu = sum - Mu::from_integer(carry);
        let order = add_order(self.order, other.valuation_or_order())
            .min(add_order(other.order, self.valuation_or_order()));
        let order = add_order(order, carry);
        if order < 0 {
            return Err(Error::TruncationUnderflow(format!(
                "product known only below q^{order}"
            )));
        }
        let mut acc: BTreeMap<(i64, usize), C> = BTreeMap::new();
        let mut prod_cache: BTreeMap<(usize, usize), Vec<C>> = BTreeMap::new();
        for (&(n1, j1), c1) in &self.terms {
            for (&(n2, j2), c2) in &other.terms {
                let n = n1 + n2 + carry;
                if n >= order {
                    break;
                }
                let coeffs = prod_cache.entry((j1, j2)).or_insert_with(|| {
                    binom_product_coeffs(j1, j2)
                        .iter()
                        .map(|b| C::from_rational(&BigRational::from_integer(b.clone())))
                        .collect()
                });
                let base = c1.clone() * c2.clone();
                for (k, b) in coeffs.iter().enumerate() {
                    let e = acc.entry((n, j1 + j2 - k)).or_insert_with(C::zero);
                    *e = e.clone() + base.clone() * b.clone();
                }
            }
        }
        let mut out = Self::zero(mu, order);
        for ((n, j), c) in acc {
            out.set(n, j, c);
        }
        Ok(out)
    }

    /// `theta = q d/dq = kappa d/dtau` with `kappa = 1/(2 pi i)`.
    pub fn theta(&self) -> Self {
        let kappa = C::kappa();
        let mu = mu_rational(&self.mu);
        let mut out = Self::zero(self.mu, self.order);
        for (&(n, j), c) in &self.terms {
            let s = BigRational::from_integer(BigInt::from(n)) + &mu;
            if !s.is_zero() {
                out.add_to(n, j, c.clone() * C::from_rational(&s));
            }
            for (i, d) in binom_derivative_coeffs(j).iter().enumerate() {
                out.add_to(n, j - i - 1, c.clone() * kappa.clone() * C::from_rational(d));
            }
        }
        out
    }

    /// `D_k f = theta f + k P f`, raising the weight by 2.
    pub fn modular_derivative(&self, k: i64) -> Result<Self> {
        if self.order >= EXACT_ORDER {
            return Err(Error::TruncationUnderflow(
                "modular derivative needs a finite truncation order".into(),
            ));
        }
        let theta = self.theta();
        if k == 0 {
            return Ok(theta);
        }
        let need = (self.order - self.valuation_or_order()).max(0) as usize;
        let p: LogQSeries<C> = eisenstein(Classical::P, need);
        let pf = p.mul(self)?.scalar_mul(&C::from_i64(k));
        theta.add(&pf)
    }

    /// Termwise sum at `tau` with the tail estimated from the last known
    /// coefficient shell.
    pub fn evaluate(&self, tau: Complex64) -> Evaluation {
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let mu = crate::rep::mu_to_f64(&self.mu);
        let mut value = Complex64::new(0.0, 0.0);
        let mut last: Option<(i64, f64)> = None;
        for (&(n, j), c) in &self.terms {
            let term = c.to_c64() * binom_c64(tau, j) * (two_pi_i * (n as f64 + mu) * tau).exp();
            value += term;
            match last {
                Some((ln, m)) if ln == n => last = Some((n, m + term.norm())),
                _ => last = Some((n, term.norm())),
            }
        }
        let error_bound = match last {
            Some((n, m)) if self.order < EXACT_ORDER => {
                let qabs = (-2.0 * std::f64::consts::PI * tau.im).exp();
                m * qabs.powf((self.order - n) as f64)
            }
            _ => 0.0,
        };
        Evaluation { value, error_bound }
    }

    /// Classification at infinity; coefficients with magnitude at most `tol`
    /// count as zero.
    pub fn classify_at_infinity(&self, tol: f64) -> Classification {
        let mu = mu_rational(&self.mu);
        let mut cusp = true;
        for (&(n, _), c) in &self.terms {
            let negligible = if C::EXACT {
                c.is_zero()
            } else {
                c.magnitude() <= tol
            };
            if negligible {
                continue;
            }
            let s = BigRational::from_integer(BigInt::from(n)) + &mu;
            if s < BigRational::zero() {
                return Classification::Meromorphic;
            }
            if s.is_zero() {
                cusp = false;
            }
        }
        if cusp {
            Classification::Cuspidal
        } else {
            Classification::Holomorphic
        }
    }

    /// Coefficients in the power basis, keyed by `(n, k)` for `tau^k q^{n+mu}`.
    pub fn to_power_basis(&self) -> BTreeMap<(i64, usize), C> {
        let deg = self.tau_degree().unwrap_or(0);
        let conv = binom::binom_to_power(deg);
        let mut out: BTreeMap<(i64, usize), C> = BTreeMap::new();
        for (&(n, j), c) in &self.terms {
            for (k, m) in conv[j].iter().enumerate() {
                if m.is_zero() {
                    continue;
                }
                let e = out.entry((n, k)).or_insert_with(C::zero);
                *e = e.clone() + c.clone() * C::from_rational(m);
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn from_power_basis(mu: Mu, order: i64, terms: &BTreeMap<(i64, usize), C>) -> Self {
        let deg = terms.keys().map(|&(_, k)| k).max().unwrap_or(0);
        let conv = binom::power_to_binom(deg);
        let mut f = Self::zero(mu, order);
        for (&(n, k), c) in terms {
            for (j, m) in conv[k].iter().enumerate() {
                if !m.is_zero() {
                    f.add_to(n, j, c.clone() * C::from_rational(m));
                }
            }
        }
        f
    }

    /// Coefficients of the ordinary q-series multiplying `binom(tau, j)`.
    pub fn ordinary(&self, j: usize) -> Vec<(i64, C)> {
        self.terms
            .iter()
            .filter(|((_, jj), _)| *jj == j)
            .map(|(&(n, _), c)| (n, c.clone()))
            .collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> LogQSeries<Complex64> {
        LogQSeries {
            mu: self.mu,
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, v.to_c64()))
                .filter(|(_, v)| !Coeff::is_zero(v))
                .collect(),
        }
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(&(n, j), c)| json!([n, j, c.to_json(digits)]))
            .collect();
        json!({
            "mu": self.mu.to_string(),
            "terms": terms,
            "basis": "binomial",
            "order": self.order,
        })
    }

    /// Reads `{mu, terms: [[n, j, coeff]], basis?, order}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let mu = match v.get("mu") {
            None => Mu::zero(),
            Some(m) => match io::parse_real(m)? {
                io::ParsedReal::Exact(r) => {
                    use num_traits::ToPrimitive;
                    Mu::new(
                        r.numer()
                            .to_i64()
                            .ok_or_else(|| Error::InvalidInput("mu too large".into()))?,
                        r.denom()
                            .to_i64()
                            .ok_or_else(|| Error::InvalidInput("mu too large".into()))?,
                    )
                }
                io::ParsedReal::Float(x) => crate::rep::mu_from_f64(x)?,
            },
        };
        if mu < Mu::zero() || mu >= Mu::one() {
            return Err(Error::InvalidInput(format!("mu = {mu} outside [0, 1)")));
        }
        let order = v
            .get("order")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::InvalidInput("missing integer field `order`".into()))?;
        let basis = v.get("basis").and_then(Value::as_str).unwrap_or("binomial");
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("missing array field `terms`".into()))?;
        let mut map = BTreeMap::new();
        for t in terms {
            let t = t
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::InvalidInput(format!("bad term {t}")))?;
            let n = t[0]
                .as_i64()
                .ok_or_else(|| Error::InvalidInput(format!("bad exponent {}", t[0])))?;
            let j = t[1]
                .as_u64()
                .ok_or_else(|| Error::InvalidInput(format!("bad tau-degree {}", t[1])))?
                as usize;
            let c = parse_coeff::<C>(&t[2])?;
            let e = map.entry((n, j)).or_insert_with(C::zero);
            *e = e.clone() + c;
        }
        match basis {
            "binomial" => {
                let mut f = Self::zero(mu, order);
                for ((n, j), c) in map {
                    f.set(n, j, c);
                }
                Ok(f)
            }
            "power" => Ok(Self::from_power_basis(mu, order, &map)),
            other => Err(Error::InvalidInput(format!("unknown basis {other:?}"))),
        }
    }

    /// CSV rows `j,n,exponent,re,im` of the ordinary q-coefficients.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut s = String::from("j,n,exponent,re,im\n");
        let mu = crate::rep::mu_to_f64(&self.mu);
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(n, j)| (j, n));
        for (n, j) in keys {
            let c = self.terms[&(n, j)].to_c64();
            let _ = writeln!(
                s,
                "{j},{n},{},{},{}",
                io::format_real(n as f64 + mu, digits),
                io::format_real(c.re, digits),
                io::format_real(c.im, digits)
            );
        }
        s
    }
}

fn parse_coeff<C: Coeff>(v: &Value) -> Result<C> {
    if let Some(parts) = v.get("kappa").and_then(Value::as_array) {
        let mut acc = C::zero();
        let mut kp = C::one();
        for p in parts {
            acc = acc + parse_coeff::<C>(p)? * kp.clone();
            kp = kp * C::kappa();
        }
        return Ok(acc);
    }
    let z = io::parse_complex(v)?;
    match io::complex_to_gauss(&z) {
        Some(g) => Ok(C::from_gauss(&g)),
        None if !C::EXACT => {
            let c = io::complex_to_c64(&z);
            Ok(C::from_gauss(&crate::linalg::GaussRational::new(
                BigRational::from_float(c.re).ok_or_else(|| Error::InvalidInput("non-finite".into()))?,
                BigRational::from_float(c.im).ok_or_else(|| Error::InvalidInput("non-finite".into()))?,
            )))
        }
        None => Err(Error::InvalidInput(format!(
            "coefficient {v} is not exact; use decimal strings or fractions"
        ))),
    }
}

/// `h = B_m(tau) g` for the components of one Jordan block.
pub fn g_to_h<C: Coeff>(g: &[LogQSeries<C>]) -> Result<Vec<LogQSeries<C>>> {
    let m = g.len();
    let b = binom::binom_matrix(m);
    (0..m)
        .map(|i| {
            let mut acc: Option<LogQSeries<C>> = None;
            for (j, gj) in g.iter().enumerate().take(i + 1) {
                let poly = LogQSeries::from_tau_poly(b.entry(i, j), EXACT_ORDER);
                let term = poly.mul(gj)?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term)?,
                });
            }
            Ok(acc.expect("i >= 0"))
        })
        .collect()
}

/// `g_j = sum_t binom(tau, t) h_{j-t}`.
pub fn h_to_g<C: Coeff>(h: &[LogQSeries<C>]) -> Result<Vec<LogQSeries<C>>> {
    (0..h.len())
        .map(|j| {
            let mut acc: Option<LogQSeries<C>> = None;
            for t in 0..=j {
                let bt = LogQSeries::monomial(Mu::zero(), 0, t, C::one(), EXACT_ORDER);
                let term = bt.mul(&h[j - t])?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term)?,
                });
            }
            Ok(acc.expect("j >= 0"))
        })
        .collect()
}

/// [`g_to_h`] for a block of declared size `m`.
pub fn g_to_h_checked<C: Coeff>(g: &[LogQSeries<C>], m: usize) -> Result<Vec<LogQSeries<C>>> {
    check_block_len(g.len(), m)?;
    g_to_h(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gauss_from_i64;

    type Ex = KappaPoly;

    fn ex(n: i64) -> Ex {
        Ex::from_i64(n)
    }

    fn exq(n: i64, d: i64) -> Ex {
        Ex::from_rational(&BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn multiply_by_one() {
        let f: LogQSeries<Ex> = eisenstein(Classical::E4, 10);
        assert_eq!(f.mul(&LogQSeries::one(20)).unwrap(), f);
    }

    #[test]
    fn half_exponents_carry() {
        let h = LogQSeries::monomial(Mu::new(1, 2), 0, 0, ex(1), 10);
        let p = h.mul(&h).unwrap();
        assert_eq!(p.mu(), Mu::zero());
        assert_eq!(p.get(1, 0), ex(1));
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.order(), 11);
    }

    #[test]
    fn tau_squared_in_binomial_basis() {
        let t = LogQSeries::monomial(Mu::zero(), 0, 1, ex(1), EXACT_ORDER);
        let t2 = t.mul(&t).unwrap();
        assert_eq!(t2.get(0, 2), ex(2));
        assert_eq!(t2.get(0, 1), ex(1));
        let pb = t2.to_power_basis();
        assert_eq!(pb.len(), 1);
        assert_eq!(pb[&(0, 2)], ex(1));
    }

    #[test]
    fn theta_examples() {
        let qn = LogQSeries::monomial(Mu::zero(), 3, 0, ex(1), 10);
        assert_eq!(qn.theta(), qn.scalar_mul(&ex(3)));
        let t = LogQSeries::monomial(Mu::zero(), 0, 1, ex(1), 10);
        assert_eq!(t.theta(), LogQSeries::constant(Ex::kappa(), 10));
        let tq = LogQSeries::monomial(Mu::new(1, 2), 0, 1, ex(1), 10);
        let mut expected = LogQSeries::monomial(Mu::new(1, 2), 0, 0, Ex::kappa(), 10);
        expected.set(0, 1, exq(1, 2));
        assert_eq!(tq.theta(), expected);
    }

    #[test]
    fn mu_mismatch_is_reported() {
        let a: LogQSeries<Ex> = LogQSeries::monomial(Mu::new(1, 3), 0, 0, ex(1), 5);
        let b = LogQSeries::monomial(Mu::zero(), 0, 0, ex(1), 5);
        assert!(matches!(a.add(&b), Err(Error::MuMismatch(..))));
    }

    #[test]
    fn truncation_orders_propagate() {
        let a: LogQSeries<Ex> = LogQSeries::monomial(Mu::zero(), 2, 0, ex(1), 6);
        let b = LogQSeries::monomial(Mu::zero(), 0, 0, ex(1), 4);
        assert_eq!(a.add(&b).unwrap().order(), 4);
        // (q^2 + O(q^6)) (1 + O(q^4)) = q^2 + O(q^6)
        assert_eq!(a.mul(&b).unwrap().order(), 6);
        let m = LogQSeries::monomial(Mu::zero(), -3, 0, ex(1), 1);
        let z: LogQSeries<Ex> = LogQSeries::zero(Mu::zero(), 1);
        assert!(matches!(m.mul(&z), Err(Error::TruncationUnderflow(_))));
    }

    #[test]
    fn ramanujan_identities_exact() {
        let n = 30;
        let e4: LogQSeries<Ex> = eisenstein(Classical::E4, n);
        let e6: LogQSeries<Ex> = eisenstein(Classical::E6, n);
        let delta: LogQSeries<Ex> = eisenstein(Classical::Delta, n);
        assert_eq!(e4.modular_derivative(4).unwrap(), e6.scalar_mul(&exq(-1, 3)));
        assert_eq!(
            e6.modular_derivative(6).unwrap(),
            e4.mul(&e4).unwrap().scalar_mul(&exq(-1, 2))
        );
        assert!(delta.modular_derivative(12).unwrap().is_zero());
        let one: LogQSeries<Ex> = LogQSeries::one(n as i64);
        assert!(one.modular_derivative(0).unwrap().is_zero());
    }

    #[test]
    fn classification() {
        let d: LogQSeries<Ex> = eisenstein(Classical::Delta, 5);
        let e: LogQSeries<Ex> = eisenstein(Classical::E4, 5);
        let m: LogQSeries<Ex> = LogQSeries::monomial(Mu::zero(), -1, 0, ex(1), 5);
        assert_eq!(d.classify_at_infinity(0.0), Classification::Cuspidal);
        assert_eq!(e.classify_at_infinity(0.0), Classification::Holomorphic);
        assert_eq!(m.classify_at_infinity(0.0), Classification::Meromorphic);
    }

    #[test]
    fn evaluation_examples() {
        let i = Complex64::new(0.0, 1.0);
        let one: LogQSeries<Complex64> = LogQSeries::one(EXACT_ORDER);
        assert_eq!(one.evaluate(i).value, Complex64::new(1.0, 0.0));
        let t: LogQSeries<Complex64> =
            LogQSeries::monomial(Mu::zero(), 0, 1, Complex64::new(1.0, 0.0), EXACT_ORDER);
        assert!((t.evaluate(i).value - i).norm() < 1e-15);
        // E4(-1/tau) = tau^4 E4(tau)
        let e4: LogQSeries<Complex64> = eisenstein(Classical::E4, 40);
        let tau = Complex64::new(0.0, 2.0);
        let lhs = e4.evaluate(-tau.inv());
        let rhs = e4.evaluate(tau).value * tau.powi(4);
        assert!((lhs.value - rhs).norm() <= 1e-8);
        assert!(lhs.error_bound < 1e-8);
    }

    #[test]
    fn power_basis_round_trip() {
        let mut f: LogQSeries<Ex> = LogQSeries::zero(Mu::new(1, 4), 10);
        f.set(0, 3, ex(5));
        f.set(2, 1, exq(-1, 7));
        f.set(4, 0, ex(2));
        let back = LogQSeries::from_power_basis(f.mu(), f.order(), &f.to_power_basis());
        assert_eq!(back, f);
    }

    #[test]
    fn g_h_round_trip_exact() {
        let mut h0: LogQSeries<Ex> = LogQSeries::zero(Mu::new(1, 3), 8);
        h0.set(0, 0, ex(1));
        h0.set(2, 0, ex(-4));
        let mut h1 = LogQSeries::zero(Mu::new(1, 3), 8);
        h1.set(1, 0, ex(3));
        let h2 = LogQSeries::monomial(Mu::new(1, 3), 0, 0, ex(7), 8);
        let h = vec![h0, h1, h2];
        let g = h_to_g(&h).unwrap();
        assert_eq!(g_to_h(&g).unwrap(), h);
        assert!(matches!(g_to_h_checked(&g, 2), Err(Error::BlockMismatch(_))));
    }

    #[test]
    fn standard_pair_has_trivial_h1() {
        let g0: LogQSeries<Ex> = LogQSeries::one(EXACT_ORDER);
        let g1 = LogQSeries::monomial(Mu::zero(), 0, 1, ex(1), EXACT_ORDER);
        let h = g_to_h(&[g0.clone(), g1]).unwrap();
        assert_eq!(h[0], g0);
        assert!(h[1].is_zero());
    }

    #[test]
    fn json_round_trip() {
        let mut f: LogQSeries<Ex> = LogQSeries::zero(Mu::new(1, 4), 10);
        f.set(0, 1, Ex::kappa() + ex(2));
        f.set(
            3,
            0,
            Ex::from_gauss(
                &(gauss_from_i64(1) * num_complex::Complex::new(BigRational::zero(), BigRational::one())),
            ),
        );
        let back: LogQSeries<Ex> = LogQSeries::from_json(&f.to_json(17)).unwrap();
        assert_eq!(back, f);
        let c: LogQSeries<Complex64> = eisenstein(Classical::E6, 6);
        let back: LogQSeries<Complex64> = LogQSeries::from_json(&c.to_json(17)).unwrap();
        assert_eq!(back, c);
        assert!(c.to_csv(6).starts_with("j,n,exponent,re,im\n0,0,"));
    }
}
