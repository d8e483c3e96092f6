//! Finite-dimensional representations of the modular group.
//!
//! A representation is given by the matrix of `rho(S)` together with a block
//! spec for `rho(T)`, which is always in modified Jordan form: block `r` is
//! the `m_r x m_r` matrix with `lambda_r = e^{2 pi i mu_r}` on the diagonal
//! and on the first subdiagonal.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, max_norm, CMatrix, GaussRational};
use crate::sl2z::{EichlerWord, GammaElement};

/// Rational q-exponent offset in `[0, 1)`.
pub type Mu = Ratio<i64>;

/// Relative tolerance for the relation check when loading a representation.
pub const LOAD_TOL: f64 = 1e-9;

/// Reduce to the branch `[0, 1)`.
pub fn normalize_mu(mu: Mu) -> Mu {
    let fl = mu.floor();
    mu - fl
}

/// Nearest rational with a bounded denominator; exact for dyadic inputs that fit.
pub fn mu_from_f64(x: f64) -> Result<Mu> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("mu must be finite, got {x}")));
    }
    let r = Ratio::<i64>::approximate_float(x)
        .ok_or_else(|| Error::InvalidInput(format!("cannot represent mu = {x}")))?;
    Ok(normalize_mu(r))
}

pub fn mu_to_f64(mu: &Mu) -> f64 {
    *mu.numer() as f64 / *mu.denom() as f64
}

/// `e^{2 pi i mu l}` with the product reduced mod 1 in exact arithmetic.
pub fn lambda_pow(mu: &Mu, l: &BigInt) -> Complex64 {
    let den = BigInt::from(*mu.denom());
    let num = (BigInt::from(*mu.numer()) * l).mod_floor(&den);
    let frac = num.to_f64().unwrap() / den.to_f64().unwrap();
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub size: usize,
    pub mu: Mu,
}

impl Block {
    pub fn new(size: usize, mu: Mu) -> Self {
        Self {
            size,
            mu: normalize_mu(mu),
        }
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * mu_to_f64(&self.mu))
    }
}

/// Block structure `[(m_r, mu_r)]` of `rho(T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpec {
    blocks: Vec<Block>,
}

impl BlockSpec {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("block spec is empty".into()));
        }
        if blocks.iter().any(|b| b.size == 0) {
            return Err(Error::InvalidInput("block sizes must be positive".into()));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Number of blocks `t`.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Dimension `p`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// Largest block size `s`.
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(0)
    }

    /// Offsets `M_0 = 0, M_r = m_1 + ... + m_r` (length `t + 1`).
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for b in &self.blocks {
            out.push(out.last().unwrap() + b.size);
        }
        out
    }

    /// Block index of the 0-based row `row`.
    pub fn block_of(&self, row: usize) -> usize {
        let mut acc = 0;
        for (r, b) in self.blocks.iter().enumerate() {
            acc += b.size;
            if row < acc {
                return r;
            }
        }
        panic!("row {row} out of range for dimension {}", self.dim());
    }

    /// The modified Jordan matrix `rho(T)`.
    pub fn rho_t(&self) -> CMatrix {
        self.power_t(&BigInt::one())
    }

    /// `rho(T)^l` blockwise as `lambda^l sum_i binom(l, i) N^i`.
    pub fn power_t(&self, l: &BigInt) -> CMatrix {
        let p = self.dim();
        let mut out = CMatrix::zeros(p, p);
        let lf = l.to_f64().unwrap_or(f64::NAN);
        let s = self.max_block();
        let binoms: Vec<f64> = (0..s)
            .scan(1.0f64, |acc, i| {
                let cur = *acc;
                *acc = *acc * (lf - i as f64) / (i as f64 + 1.0);
                Some(cur)
            })
            .collect();
        let mut off = 0;
        for b in &self.blocks {
            let lam = lambda_pow(&b.mu, l);
            for i in 0..b.size {
                for j in 0..=i {
                    out[(off + i, off + j)] = lam * binoms[i - j];
                }
            }
            off += b.size;
        }
        out
    }

    /// [`BlockSpec::power_t`] for machine-size exponents.
    pub fn power_t_i64(&self, l: i64) -> CMatrix {
        let p = self.dim();
        let mut out = CMatrix::zeros(p, p);
        let lf = l as f64;
        let mut binoms = vec![1.0f64; self.max_block()];
        for i in 1..binoms.len() {
            binoms[i] = binoms[i - 1] * (lf - (i - 1) as f64) / i as f64;
        }
        let mut off = 0;
        for b in &self.blocks {
            let den = *b.mu.denom() as i128;
            let frac = ((*b.mu.numer() as i128 * l as i128).rem_euclid(den)) as f64 / den as f64;
            let lam = Complex64::from_polar(1.0, 2.0 * PI * frac);
            for i in 0..b.size {
                for j in 0..=i {
                    out[(off + i, off + j)] = lam * binoms[i - j];
                }
            }
            off += b.size;
        }
        out
    }

    /// `rho(T)^l` over `Q(i)` when every `lambda_r` is a fourth root of unity.
    pub fn power_t_exact(&self, l: &BigInt) -> Option<Vec<Vec<GaussRational>>> {
        let p = self.dim();
        let zero = GaussRational::zero();
        let mut out = vec![vec![zero; p]; p];
        let mut off = 0;
        for b in &self.blocks {
            let quarter = b.mu * 4;
            if !quarter.is_integer() {
                return None;
            }
            let e = (BigInt::from(quarter.to_integer()) * l).mod_floor(&BigInt::from(4));
            let unit = match e.to_u8().unwrap() {
                0 => linalg::gauss_from_i64(1),
                1 => GaussRational::new(BigRational::zero(), BigRational::one()),
                2 => linalg::gauss_from_i64(-1),
                _ => GaussRational::new(BigRational::zero(), -BigRational::one()),
            };
            let mut binom = BigRational::one();
            for k in 0..b.size {
                for i in k..b.size {
                    out[off + i][off + i - k] =
                        unit.clone() * GaussRational::new(binom.clone(), BigRational::zero());
                }
                binom = binom * BigRational::from_integer(l - BigInt::from(k))
                    / BigRational::from_integer(BigInt::from(k + 1));
            }
            off += b.size;
        }
        Some(out)
    }
}

/// Residuals of the defining relations.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// `max |(rho(S) rho(T))^3 - rho(S)^2|`
    pub braid_residual: f64,
    /// `max |rho(S)^4 - I|`
    pub order_residual: f64,
    pub tol: f64,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.braid_residual.max(self.order_residual)
    }
}

/// Outcome of splitting by the central element `S^2`.
#[derive(Clone, Debug)]
pub enum S2Split {
    /// `rho(S^2) = eps I`.
    Scalar(i8),
    /// Eigenspace projectors of `rho(S^2)` and the restricted representations.
    Split {
        proj_plus: CMatrix,
        proj_minus: CMatrix,
        plus: Box<Restricted>,
        minus: Box<Restricted>,
    },
}

/// A subrepresentation with the basis (columns, in the parent coordinates)
/// in which its `rho(T)` is in modified Jordan form.
#[derive(Clone, Debug)]
pub struct Restricted {
    pub rep: Representation,
    pub basis: CMatrix,
}

#[derive(Clone, Debug)]
pub struct Representation {
    rho_s: CMatrix,
    rho_s_inv: CMatrix,
    spec: BlockSpec,
}

impl Representation {
    pub fn new(rho_s: CMatrix, spec: BlockSpec) -> Result<Self> {
        let p = spec.dim();
        if rho_s.nrows() != p || rho_s.ncols() != p {
            return Err(Error::InvalidInput(format!(
                "rho(S) is {}x{} but the blocks sum to {p}",
                rho_s.nrows(),
                rho_s.ncols()
            )));
        }
        let rho_s_inv =
            linalg::try_inverse(&rho_s).ok_or_else(|| Error::InvalidInput("rho(S) is singular".into()))?;
        Ok(Self {
            rho_s,
            rho_s_inv,
            spec,
        })
    }

    /// The one-dimensional trivial representation.
    pub fn trivial() -> Self {
        let spec = BlockSpec::new(vec![Block::new(1, Mu::zero())]).unwrap();
        Self::new(CMatrix::identity(1, 1), spec).unwrap()
    }

    /// The defining representation, written in the basis `(e_2, e_1)` so that
    /// `rho(T) = (1, 0; 1, 1)` is a single modified Jordan block; then
    /// `rho(S) = (0, 1; -1, 0)`.
    pub fn standard() -> Self {
        let spec = BlockSpec::new(vec![Block::new(2, Mu::zero())]).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        let s = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]);
        Self::new(s, spec).unwrap()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (p, q) = (self.dim(), other.dim());
        let mut s = CMatrix::zeros(p + q, p + q);
        s.view_mut((0, 0), (p, p)).copy_from(&self.rho_s);
        s.view_mut((p, p), (q, q)).copy_from(&other.rho_s);
        let mut blocks = self.spec.blocks.clone();
        blocks.extend(other.spec.blocks.iter().cloned());
        Self::new(s, BlockSpec::new(blocks).unwrap()).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn spec(&self) -> &BlockSpec {
        &self.spec
    }

    pub fn rho_s(&self) -> &CMatrix {
        &self.rho_s
    }

    pub fn rho_s_inv(&self) -> &CMatrix {
        &self.rho_s_inv
    }

    pub fn rho_t(&self) -> CMatrix {
        self.spec.rho_t()
    }

    pub fn power_t(&self, l: &BigInt) -> CMatrix {
        self.spec.power_t(l)
    }

    pub fn rho_s2(&self) -> CMatrix {
        &self.rho_s * &self.rho_s
    }

    pub fn residuals(&self) -> ValidationReport {
        let st = &self.rho_s * self.rho_t();
        let st3 = &st * &st * &st;
        let s2 = self.rho_s2();
        let s4 = &s2 * &s2;
        ValidationReport {
            braid_residual: max_norm(&(st3 - &s2)),
            order_residual: max_norm(&(s4 - linalg::identity(self.dim()))),
            tol: 0.0,
        }
    }

    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        let mut report = self.residuals();
        report.tol = tol;
        let residual = report.max_residual();
        if !(residual <= tol) {
            return Err(Error::RelationViolation { residual, tol });
        }
        Ok(report)
    }

    /// `rho(g)` along the canonical word of `g`.
    pub fn evaluate(&self, g: &GammaElement) -> CMatrix {
        self.evaluate_word(&g.eichler_decompose())
    }

    /// `rho(g)^{-1}`.
    pub fn evaluate_inverse(&self, g: &GammaElement) -> CMatrix {
        self.evaluate(&g.inverse())
    }

    /// `rho(g)` for `g = (a, b; c, d)` with machine-size entries.
    ///
    /// Uses the Euclidean word `g = T^q S g'` rather than the canonical one;
    /// both give the same matrix since `rho` is a homomorphism.
    pub fn evaluate_i64(&self, g: [i64; 4]) -> CMatrix {
        let [mut a, mut b, mut c, mut d] = g;
        debug_assert_eq!(a as i128 * d as i128 - b as i128 * c as i128, 1);
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        while c != 0 {
            let q = a.div_euclid(c);
            acc = acc * self.spec.power_t_i64(q) * &self.rho_s;
            let (a1, b1) = (a - q * c, b - q * d);
            (a, b, c, d) = (c, d, -a1, -b1);
        }
        if a == 1 {
            acc * self.spec.power_t_i64(b)
        } else {
            acc * self.rho_s2() * self.spec.power_t_i64(-b)
        }
    }

    pub fn evaluate_word(&self, w: &EichlerWord) -> CMatrix {
        let p = self.dim();
        let mut acc = CMatrix::identity(p, p);
        for l in &w.exponents {
            acc = &self.rho_s * self.power_t(l) * acc;
        }
        if !w.shift.is_zero() {
            acc = self.power_t(&w.shift) * acc;
        }
        if w.sign < 0 {
            acc = self.rho_s2() * acc;
        }
        acc
    }

    /// `Some(eps)` when `rho(S^2) = eps I` within `tol`.
    pub fn s2_scalar(&self, tol: f64) -> Option<i8> {
        let s2 = self.rho_s2();
        let id = linalg::identity(self.dim());
        if max_norm(&(&s2 - &id)) <= tol {
            Some(1)
        } else if max_norm(&(&s2 + &id)) <= tol {
            Some(-1)
        } else {
            None
        }
    }

    pub fn split_by_s2(&self, tol: f64) -> Result<S2Split> {
        if let Some(eps) = self.s2_scalar(tol) {
            return Ok(S2Split::Scalar(eps));
        }
        let p = self.dim();
        let s2 = self.rho_s2();
        let id = linalg::identity(p);
        let inv_res = max_norm(&(&s2 * &s2 - &id));
        if inv_res > tol {
            return Err(Error::NonInvolutive(inv_res));
        }
        let half = Complex64::new(0.5, 0.0);
        let proj_plus = (&id + &s2) * half;
        let proj_minus = (&id - &s2) * half;
        let plus = self.restrict(&proj_plus, tol)?;
        let minus = self.restrict(&proj_minus, tol)?;
        Ok(S2Split::Split {
            proj_plus,
            proj_minus,
            plus: Box::new(plus),
            minus: Box::new(minus),
        })
    }

    /// Restriction to the range of a projector commuting with the image.
    fn restrict(&self, proj: &CMatrix, tol: f64) -> Result<Restricted> {
        let p = self.dim();
        // Fast path: every block lies inside the range or the kernel.
        let offsets = self.spec.offsets();
        let diag_like = (0..p).all(|i| {
            (0..p).all(|j| i == j || proj[(i, j)].norm() <= tol)
                && ((proj[(i, i)] - Complex64::new(1.0, 0.0)).norm() <= tol || proj[(i, i)].norm() <= tol)
        });
        if diag_like {
            let mut rows = Vec::new();
            let mut blocks = Vec::new();
            for (r, b) in self.spec.blocks.iter().enumerate() {
                let start = offsets[r];
                if proj[(start, start)].norm() > 0.5 {
                    rows.extend(start..start + b.size);
                    blocks.push(b.clone());
                }
            }
            let q = rows.len();
            if q == 0 {
                return Err(Error::InvalidInput("empty eigenspace".into()));
            }
            let s = CMatrix::from_fn(q, q, |i, j| self.rho_s[(rows[i], rows[j])]);
            let basis = CMatrix::from_fn(p, q, |i, j| {
                if i == rows[j] {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            return Ok(Restricted {
                rep: Representation::new(s, BlockSpec::new(blocks)?)?,
                basis,
            });
        }

        // General path: orthonormal basis of the range, then Jordanize T there.
        let svd = proj.clone().svd(true, false);
        let u = svd.u.unwrap();
        let cols: Vec<usize> = (0..p).filter(|&i| svd.singular_values[i] > 0.5).collect();
        if cols.is_empty() {
            return Err(Error::InvalidInput("empty eigenspace".into()));
        }
        let ub = CMatrix::from_fn(p, cols.len(), |i, j| u[(i, cols[j])]);
        let t_restr = ub.adjoint() * self.rho_t() * &ub;
        let s_restr = ub.adjoint() * &self.rho_s * &ub;
        let mut mus: Vec<Mu> = self.spec.blocks.iter().map(|b| b.mu).collect();
        mus.sort();
        mus.dedup();
        let (spec, q) = jordanize_t(&t_restr, &mus, tol.max(1e-9))?;
        let q_inv =
            linalg::try_inverse(&q).ok_or_else(|| Error::NearlyDefective("singular Jordan basis".into()))?;
        Ok(Restricted {
            rep: Representation::new(&q_inv * s_restr * &q, spec)?,
            basis: ub * q,
        })
    }

    /// Representation file: `{dim, rho_S: [[[re, im], ...], ...], blocks: [[m, mu], ...]}`.
    ///
    /// The group relations are checked at [`LOAD_TOL`], scaled by the size of
    /// `rho(S) rho(T)`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidInput("missing integer field `dim`".into()))?
            as usize;
        let blocks_v = v
            .get("blocks")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("missing array field `blocks`".into()))?;
        let mut blocks = Vec::new();
        for b in blocks_v {
            let arr = b
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::InvalidInput(format!("bad block {b}")))?;
            let m = arr[0]
                .as_u64()
                .ok_or_else(|| Error::InvalidInput(format!("bad block size {}", arr[0])))?;
            let mu = match io::parse_real(&arr[1])? {
                io::ParsedReal::Exact(r) => Ratio::new(
                    r.numer()
                        .to_i64()
                        .ok_or_else(|| Error::InvalidInput("mu numerator too large".into()))?,
                    r.denom()
                        .to_i64()
                        .ok_or_else(|| Error::InvalidInput("mu denominator too large".into()))?,
                ),
                io::ParsedReal::Float(x) if (0.0..1.0).contains(&x) => mu_from_f64(x)?,
                io::ParsedReal::Float(x) => {
                    return Err(Error::InvalidInput(format!("mu = {x} outside [0, 1)")))
                }
            };
            if mu < Mu::zero() || mu >= Mu::one() {
                return Err(Error::InvalidInput(format!("mu = {mu} outside [0, 1)")));
            }
            blocks.push(Block::new(m as usize, mu));
        }
        let spec = BlockSpec::new(blocks)?;
        if spec.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "blocks sum to {} but dim = {dim}",
                spec.dim()
            )));
        }
        let rows = v
            .get("rho_S")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("missing array field `rho_S`".into()))?;
        if rows.len() != dim {
            return Err(Error::InvalidInput(format!("rho_S has {} rows", rows.len())));
        }
        let mut s = CMatrix::zeros(dim, dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .filter(|r| r.len() == dim)
                .ok_or_else(|| Error::InvalidInput(format!("rho_S row {i} has wrong length")))?;
            for (j, z) in row.iter().enumerate() {
                s[(i, j)] = io::complex_to_c64(&io::parse_complex(z)?);
            }
        }
        let rep = Self::new(s, spec)?;
        // decimal input carries about 1e-16 relative error per entry, which
        // the cubed relation amplifies by the size of rho(S) rho(T)
        let scale = max_norm(&(&rep.rho_s * rep.rho_t()));
        rep.validate(LOAD_TOL * (1.0 + scale.powi(3)))?;
        Ok(rep)
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let p = self.dim();
        let rows: Vec<Value> = (0..p)
            .map(|i| {
                Value::Array(
                    (0..p)
                        .map(|j| io::complex_json(self.rho_s[(i, j)], digits))
                        .collect(),
                )
            })
            .collect();
        let blocks: Vec<Value> = self
            .spec
            .blocks
            .iter()
            .map(|b| json!([b.size, format!("{}", b.mu)]))
            .collect();
        json!({ "dim": p, "rho_S": rows, "blocks": blocks })
    }
}

/// True iff `eps = (-1)^k`.
pub fn parity_ok(eps: i8, k: i64) -> bool {
    let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
    eps == sign
}

/// The nontriviality condition in weight `k` for a representation with
/// scalar `rho(S^2)`.
pub fn nontriviality_holds(rho: &Representation, k: i64, tol: f64) -> Result<bool> {
    let eps = rho
        .s2_scalar(tol)
        .ok_or_else(|| Error::NotScalarS2(max_norm(&(rho.rho_s2() - linalg::identity(rho.dim())))))?;
    Ok(parity_ok(eps, k))
}

/// Max absolute entry.
pub fn matrix_norm(m: &CMatrix) -> f64 {
    max_norm(m)
}

/// Upper bound `max_i |binom(l, i)|` over `0 <= i < s`, which dominates
/// `||rho(T)^l||` for unimodular eigenvalues.
pub fn power_t_bound(s: usize, l: i64) -> f64 {
    let lf = l as f64;
    let mut b = 1.0f64;
    let mut best = 1.0f64;
    for i in 0..s.saturating_sub(1) {
        b = b * (lf - i as f64) / (i as f64 + 1.0);
        best = best.max(b.abs());
    }
    best
}

/// Modified Jordan basis for a matrix whose eigenvalues are known to be among
/// `e^{2 pi i mu}` for the declared `mus`.
///
/// Returns the block spec and `Q` with `Q^{-1} A Q` in modified Jordan form.
/// Refuses input whose rank decisions fall in the ambiguous band between
/// `tol` and `sqrt(tol)` (relative to the matrix scale).
pub fn jordanize_t(a: &CMatrix, mus: &[Mu], tol: f64) -> Result<(BlockSpec, CMatrix)> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let scale = max_norm(a).max(1.0);
    let hi = tol.sqrt();
    let mut blocks = Vec::new();
    let mut cols: Vec<nalgebra::DVector<Complex64>> = Vec::new();

    for mu in mus {
        let lam = Complex64::from_polar(1.0, 2.0 * PI * mu_to_f64(mu));
        let n = a - CMatrix::identity(p, p) * lam;
        // Kernel dimensions of N^j.
        let mut powers = vec![CMatrix::identity(p, p)];
        let mut kdims = vec![0usize];
        for j in 1..=p {
            let nj = &n * &powers[j - 1];
            let s = linalg::singular_values(&nj);
            let nscale = scale.powi(j as i32);
            if let Some(bad) = s.iter().find(|&&x| x > tol * nscale && x < hi * nscale) {
                return Err(Error::NearlyDefective(format!(
                    "singular value {bad:e} of (A - lambda)^{j} is neither zero nor separated"
                )));
            }
            let rank = s.iter().filter(|&&x| x >= hi * nscale).count();
            kdims.push(p - rank);
            powers.push(nj);
            if kdims[j] == kdims[j - 1] {
                break;
            }
        }
        let top = kdims.len() - 1;
        if kdims[top] == 0 {
            continue;
        }
        // Kernel bases.
        let kernel = |j: usize| -> CMatrix {
            let vs = linalg::numeric_kernel(&powers[j], hi / scale.powi(j as i32).max(1.0));
            let mut m = CMatrix::zeros(p, vs.len());
            for (c, v) in vs.iter().enumerate() {
                for i in 0..p {
                    m[(i, c)] = v[i];
                }
            }
            m
        };
        // Vectors already placed at each level (images of longer chains).
        let mut covered: Vec<Vec<nalgebra::DVector<Complex64>>> = vec![Vec::new(); top + 2];
        let mut chains: Vec<Vec<nalgebra::DVector<Complex64>>> = Vec::new();
        for size in (1..=top).rev() {
            let exact_count = (kdims[size] - kdims[size - 1])
                - if size < top {
                    kdims[size + 1] - kdims[size]
                } else {
                    0
                };
            if exact_count > 0 {
                let kj = kernel(size);
                let kj1 = kernel(size - 1);
                let mut span_cols: Vec<nalgebra::DVector<Complex64>> =
                    (0..kj1.ncols()).map(|c| kj1.column(c).into_owned()).collect();
                span_cols.extend(covered[size].iter().cloned());
                let mut chosen = 0;
                for c in 0..kj.ncols() {
                    if chosen == exact_count {
                        break;
                    }
                    let cand = kj.column(c).into_owned();
                    let mut trial = span_cols.clone();
                    trial.push(cand.clone());
                    let mat = CMatrix::from_columns(&trial);
                    if linalg::numeric_rank(&mat, hi) == trial.len() {
                        span_cols.push(cand.clone());
                        let mut chain = vec![cand];
                        for _ in 1..size {
                            let next = (&n * chain.last().unwrap()) / lam;
                            chain.push(next);
                        }
                        for (lvl_from_top, v) in chain.iter().enumerate().skip(1) {
                            covered[size - lvl_from_top].push(v.clone());
                        }
                        chains.push(chain);
                        chosen += 1;
                    }
                }
                if chosen != exact_count {
                    return Err(Error::NearlyDefective(format!(
                        "could not build {exact_count} chains of length {size}"
                    )));
                }
            }
        }
        for chain in chains {
            blocks.push(Block::new(chain.len(), *mu));
            cols.extend(chain);
        }
    }
    if cols.len() != p {
        return Err(Error::NearlyDefective(format!(
            "declared eigenvalues account for {} of {p} dimensions",
            cols.len()
        )));
    }
    let q = CMatrix::from_columns(&cols);
    let spec = BlockSpec::new(blocks)?;
    let q_inv =
        linalg::try_inverse(&q).ok_or_else(|| Error::NearlyDefective("Jordan basis is singular".into()))?;
    let check = max_norm(&(&q_inv * a * &q - spec.rho_t()));
    if check > hi * scale {
        return Err(Error::NearlyDefective(format!("Jordan form residual {check:e}")));
    }
    Ok((spec, q))
}

/// Exact `rho(T)^l` entries via binomials; helper for tests of the closed form.
pub fn exact_binomial(l: &BigInt, i: usize) -> BigRational {
    let mut b = BigRational::one();
    for k in 0..i {
        b = b * BigRational::from_integer(l - BigInt::from(k))
            / BigRational::from_integer(BigInt::from(k + 1));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn random_element(rng: &mut ChaCha8Rng, bound: i64) -> GammaElement {
        loop {
            let cc: i64 = rng.gen_range(-bound..=bound);
            let d: i64 = rng.gen_range(-bound..=bound);
            if cc.gcd(&d) != 1 {
                continue;
            }
            if cc == 0 {
                return GammaElement::new(d, rng.gen_range(-bound..=bound), 0, d).unwrap();
            }
            let base = crate::sl2z::coset_rep_for_row(cc, d);
            let m: i64 = rng.gen_range(-3..=3);
            return GammaElement::t_pow(m).compose(&base);
        }
    }

    #[test]
    fn trivial_and_standard_validate() {
        let r = Representation::trivial().validate(1e-12).unwrap();
        assert_eq!(r.max_residual(), 0.0);
        let r = Representation::standard().validate(1e-12).unwrap();
        assert_eq!(r.max_residual(), 0.0);
    }

    #[test]
    fn perturbed_rep_is_rejected() {
        let std = Representation::standard();
        let mut s = std.rho_s().clone();
        s[(0, 0)] += c(1e-3);
        let bad = Representation::new(s, std.spec().clone()).unwrap();
        match bad.validate(1e-6) {
            Err(Error::RelationViolation { residual, .. }) => assert!(residual > 1e-4),
            other => panic!("expected RelationViolation, got {other:?}"),
        }
    }

    #[test]
    fn standard_rep_evaluates_to_conjugated_matrix() {
        let std = Representation::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_element(&mut rng, 20);
            let [a, b, cc, d] = g.to_f64s();
            // swapped basis: (d, c; b, a)
            let expected = CMatrix::from_row_slice(2, 2, &[c(d), c(cc), c(b), c(a)]);
            assert!(max_norm(&(std.evaluate(&g) - expected)) < 1e-9, "{g}");
        }
    }

    /// The standard representation twisted by the character with
    /// `chi(T) = e^{2 pi i / 12}`, `chi(S) = chi(T)^{-3} = -i`.
    fn twisted_standard() -> Representation {
        let spec = BlockSpec::new(vec![Block::new(2, Mu::new(1, 12))]).unwrap();
        let s = Representation::standard().rho_s() * Complex64::new(0.0, -1.0);
        Representation::new(s, spec).unwrap()
    }

    #[test]
    fn euclidean_path_matches_canonical_word() {
        let rep = Representation::trivial().direct_sum(&Representation::standard());
        let odd = twisted_standard();
        odd.validate(1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let g = random_element(&mut rng, 25);
            let e = g.to_i64s().unwrap();
            for r in [&rep, &odd] {
                let diff = max_norm(&(r.evaluate(&g) - r.evaluate_i64(e)));
                assert!(diff < 1e-8 * (1.0 + max_norm(&r.evaluate(&g))), "{g}: {diff}");
            }
        }
    }

    #[test]
    fn power_t_examples() {
        let spec = BlockSpec::new(vec![Block::new(2, Mu::zero())]).unwrap();
        let m = spec.power_t(&BigInt::from(3));
        let expected = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(3.0), c(1.0)]);
        assert!(max_norm(&(m - expected)) < 1e-15);

        let spec = BlockSpec::new(vec![Block::new(3, Mu::new(1, 3))]).unwrap();
        let id = spec.power_t(&BigInt::zero());
        assert!(max_norm(&(id - CMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn power_t_five_is_fifth_power() {
        let spec = BlockSpec::new(vec![Block::new(3, Mu::new(2, 7)), Block::new(1, Mu::new(1, 2))]).unwrap();
        let t = spec.rho_t();
        let t5 = &t * &t * &t * &t * &t;
        assert!(max_norm(&(spec.power_t(&BigInt::from(5)) - t5)) < 1e-12);
        let tinv = linalg::try_inverse(&t).unwrap();
        let tm2 = &tinv * &tinv;
        assert!(max_norm(&(spec.power_t(&BigInt::from(-2)) - tm2)) < 1e-12);
    }

    #[test]
    fn power_t_exact_recursion() {
        let spec = BlockSpec::new(vec![Block::new(3, Mu::new(1, 4)), Block::new(2, Mu::zero())]).unwrap();
        let t = spec.power_t_exact(&BigInt::one()).unwrap();
        let mul = |x: &Vec<Vec<GaussRational>>, y: &Vec<Vec<GaussRational>>| {
            let n = x.len();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n).fold(GaussRational::zero(), |acc, k| {
                                acc + x[i][k].clone() * y[k][j].clone()
                            })
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        };
        for l in -6i64..6 {
            let a = spec.power_t_exact(&BigInt::from(l)).unwrap();
            let b = spec.power_t_exact(&BigInt::from(l + 1)).unwrap();
            assert_eq!(mul(&a, &t), b, "l = {l}");
        }
        let irrational = BlockSpec::new(vec![Block::new(1, Mu::new(1, 3))]).unwrap();
        assert!(irrational.power_t_exact(&BigInt::one()).is_none());
    }

    #[test]
    fn power_t_norm_bound() {
        let spec = BlockSpec::new(vec![Block::new(4, Mu::new(1, 5))]).unwrap();
        for l in [-50i64, -7, -1, 1, 2, 9, 40] {
            let norm = max_norm(&spec.power_t(&BigInt::from(l)));
            let bound = power_t_bound(4, l);
            assert!(norm <= bound * (1.0 + 1e-12), "l={l}: {norm} > {bound}");
            // C_s |l|^{s-1} with C_s = 1 works for s = 4
            assert!(bound <= (l.abs() as f64).powi(3).max(1.0));
        }
    }

    #[test]
    fn nontriviality_examples() {
        assert!(parity_ok(1, 4));
        assert!(!parity_ok(-1, 4));
        assert!(parity_ok(-1, -1));
        assert!(nontriviality_holds(&Representation::standard(), 7, 1e-12).unwrap());
        assert!(!nontriviality_holds(&Representation::standard(), 8, 1e-12).unwrap());
    }

    #[test]
    fn split_examples() {
        match Representation::trivial().split_by_s2(1e-12).unwrap() {
            S2Split::Scalar(e) => assert_eq!(e, 1),
            _ => panic!(),
        }
        match Representation::standard().split_by_s2(1e-12).unwrap() {
            S2Split::Scalar(e) => assert_eq!(e, -1),
            _ => panic!(),
        }
        let sum = Representation::trivial().direct_sum(&Representation::standard());
        match sum.split_by_s2(1e-12).unwrap() {
            S2Split::Split { plus, minus, .. } => {
                assert_eq!(plus.rep.dim(), 1);
                assert_eq!(minus.rep.dim(), 2);
                assert_eq!(minus.rep.spec().blocks()[0].size, 2);
                plus.rep.validate(1e-12).unwrap();
                minus.rep.validate(1e-12).unwrap();
            }
            _ => panic!(),
        }
    }

    #[test]
    fn split_in_a_mixed_basis() {
        // conjugate trivial + standard by a unipotent change of basis that
        // mixes the two eigenspaces of S^2 while keeping T block diagonal
        let sum = Representation::trivial().direct_sum(&Representation::standard());
        // T = diag(1, J_2) commutes with the basis change only if it preserves
        // the blocks, so mix via S instead: scale coordinates
        let scale = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(1.0), c(1.0)]));
        let s = linalg::try_inverse(&scale).unwrap() * sum.rho_s() * &scale;
        let rep = Representation::new(s, sum.spec().clone()).unwrap();
        match rep.split_by_s2(1e-12).unwrap() {
            S2Split::Split {
                proj_plus,
                proj_minus,
                plus,
                minus,
            } => {
                let id = CMatrix::identity(3, 3);
                assert!(max_norm(&(&proj_plus + &proj_minus - id)) < 1e-12);
                assert!(max_norm(&(&proj_plus * &proj_plus - &proj_plus)) < 1e-12);
                assert_eq!((plus.rep.dim(), minus.rep.dim()), (1, 2));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn jordanize_recovers_blocks() {
        let spec = BlockSpec::new(vec![
            Block::new(2, Mu::new(1, 4)),
            Block::new(1, Mu::new(1, 4)),
            Block::new(1, Mu::new(1, 2)),
        ])
        .unwrap();
        let j = spec.rho_t();
        // a well-conditioned basis change
        let p = CMatrix::from_row_slice(
            4,
            4,
            &[
                c(1.0),
                c(0.5),
                c(0.0),
                c(0.2),
                c(0.0),
                c(1.0),
                c(0.3),
                c(0.0),
                c(0.1),
                c(0.0),
                c(1.0),
                c(0.4),
                c(0.0),
                c(0.2),
                c(0.0),
                c(1.0),
            ],
        );
        let a = &p * &j * linalg::try_inverse(&p).unwrap();
        let (got, q) = jordanize_t(&a, &[Mu::new(1, 4), Mu::new(1, 2)], 1e-10).unwrap();
        let mut sizes: Vec<(usize, Mu)> = got.blocks().iter().map(|b| (b.size, b.mu)).collect();
        sizes.sort();
        assert_eq!(
            sizes,
            vec![(1, Mu::new(1, 4)), (1, Mu::new(1, 2)), (2, Mu::new(1, 4))]
        );
        let back = linalg::try_inverse(&q).unwrap() * &a * &q;
        assert!(max_norm(&(back - got.rho_t())) < 1e-8);
    }

    #[test]
    fn jordanize_refuses_nearly_defective() {
        // eigenvalues 1 and 1 + 1e-7: neither a clean Jordan block nor diagonal
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(1.0), c(1.0 + 1e-7)]);
        assert!(matches!(
            jordanize_t(&a, &[Mu::zero()], 1e-12),
            Err(Error::NearlyDefective(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let rep = Representation::trivial().direct_sum(&Representation::standard());
        let v = rep.to_json(17);
        let back = Representation::from_json(&v).unwrap();
        assert_eq!(back.spec(), rep.spec());
        assert!(max_norm(&(back.rho_s() - rep.rho_s())) == 0.0);
    }

    #[test]
    fn json_rejects_bad_blocks() {
        let v = serde_json::json!({"dim": 2, "rho_S": [[1,0],[0,1]], "blocks": [[1, 0]]});
        assert!(Representation::from_json(&v).is_err());
        let v = serde_json::json!({"dim": 1, "rho_S": [[1]], "blocks": [[1, 1.5]]});
        assert!(Representation::from_json(&v).is_err());
    }

    #[test]
    fn lambda_pow_large_exponent() {
        let mu = Mu::new(1, 3);
        let l = BigInt::parse_bytes(b"300000000000000000001", 10).unwrap();
        let z = lambda_pow(&mu, &l);
        let expected = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((z - expected).norm() < 1e-15);
    }
}
