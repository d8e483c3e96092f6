//! Numeric q-expansions of the truncated series.
//!
//! The rows of block `r` transform under `tau -> tau + 1` by the Jordan block
//! `J_{m_r, lambda_r}`, so `h = B_{m_r}(tau) g` is `lambda_r`-periodic and has an
//! ordinary expansion `sum_l a(l) q^{l + mu_r}`. At each height `y` a discrete
//! Fourier transform over equally spaced `x` gives `a(l) e^{-2 pi (l + mu) y}`;
//! the heights are combined by weighted least squares and the logarithmic
//! series is reassembled as `g_i = sum_t binom(tau, t) h_{i-t}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{poincare_eval, PoincareParams};
use crate::error::{Error, Result};
use crate::linalg::{numeric_rank, CMatrix};
use crate::logq::binom::g_to_h_values;
use crate::logq::classical::{eisenstein, Classical};
use crate::logq::{Classification, LogQSeries, Mu};
use crate::rep::{mu_to_f64, Representation};

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractOptions {
    /// Coefficients `q^{l + mu}` are fitted for `l < nq`.
    pub nq: usize,
    pub heights: Vec<f64>,
    /// Samples per height; defaults to `4 nq` (raised if the model needs more).
    pub samples_per_height: Option<usize>,
    /// Largest accepted amplification `e^{2 pi (l_max - l_min) y_min}`.
    pub cond_threshold: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            nq: 4,
            heights: vec![1.0, 1.2, 1.5],
            samples_per_height: None,
            cond_threshold: 1e15,
        }
    }
}

impl ExtractOptions {
    pub fn with_nq(nq: usize) -> Self {
        Self {
            nq,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    /// `series[m][n]` is the expansion of `P(tau)_{mn}`.
    pub series: Vec<Vec<LogQSeries<Complex64>>>,
    /// Max sample misfit relative to the largest sample.
    pub fit_residual: f64,
    pub condition: f64,
    pub samples_per_height: usize,
    pub heights: Vec<f64>,
    /// Relative level below which coefficients were zeroed.
    pub noise_floor: f64,
}

struct BlockModel {
    offset: usize,
    size: usize,
    mu: Mu,
    l_min: i64,
    l_max: i64,
}

fn block_models(rho: &Representation, params: &PoincareParams, nq: usize) -> Vec<BlockModel> {
    let mut off = 0;
    rho.spec()
        .blocks()
        .iter()
        .zip(&params.nu)
        .map(|(b, &nu)| {
            let m = BlockModel {
                offset: off,
                size: b.size,
                mu: b.mu,
                l_min: nu.min(0),
                l_max: (nq as i64 - 1).max(nu),
            };
            off += b.size;
            m
        })
        .collect()
}

pub fn extract_coefficients(
    rho: &Representation,
    params: &PoincareParams,
    opts: &ExtractOptions,
) -> Result<Extraction> {
    params.check(rho)?;
    if opts.nq == 0 {
        return Err(Error::InvalidInput("nq must be positive".into()));
    }
    if opts.heights.is_empty() || opts.heights.iter().any(|&y| !(y >= 1.0) || !y.is_finite()) {
        return Err(Error::InvalidInput(
            "heights must be finite and at least 1".into(),
        ));
    }
    let mut sorted = opts.heights.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("heights must be distinct".into()));
    }
    let y_min = sorted[0];
    let models = block_models(rho, params, opts.nq);
    let span = models.iter().map(|b| b.l_max - b.l_min + 1).max().unwrap_or(1) as usize;
    let ns = opts.samples_per_height.unwrap_or(4 * opts.nq).max(span + 1);
    let condition = models
        .iter()
        .map(|b| (2.0 * PI * (b.l_max - b.l_min) as f64 * y_min).exp())
        .fold(1.0, f64::max);
    if !(condition <= opts.cond_threshold) {
        return Err(Error::IllConditionedFit {
            cond: condition,
            threshold: opts.cond_threshold,
        });
    }

    // samples[h][s] = P(x_s + i y_h)
    let mut samples: Vec<Vec<(Complex64, CMatrix)>> = Vec::with_capacity(opts.heights.len());
    for &y in &opts.heights {
        let mut row = Vec::with_capacity(ns);
        for s in 0..ns {
            let tau = Complex64::new(s as f64 / ns as f64, y);
            row.push((tau, poincare_eval(rho, params, tau)?.value));
        }
        samples.push(row);
    }

    let p = rho.dim();
    // h-values per (block, column, u) and sample
    let mut hvals: Vec<Vec<Vec<Vec<Vec<Complex64>>>>> = Vec::new();
    let mut scale = 0.0f64;
    for b in &models {
        let mut per_col = Vec::with_capacity(p);
        for n in 0..p {
            let mut per_height = Vec::with_capacity(samples.len());
            for row in &samples {
                let mut per_sample = Vec::with_capacity(ns);
                for (tau, m) in row {
                    let g: Vec<Complex64> = (0..b.size).map(|i| m[(b.offset + i, n)]).collect();
                    let h = g_to_h_values(&g, *tau);
                    scale = h.iter().fold(scale, |acc, z| acc.max(z.norm()));
                    per_sample.push(h);
                }
                per_height.push(per_sample);
            }
            per_col.push(per_height);
        }
        hvals.push(per_col);
    }

    let eps = 1e-13f64.max(10f64.powi(-(params.precision as i32)));
    let mut series: Vec<Vec<LogQSeries<Complex64>>> =
        vec![vec![LogQSeries::zero(Mu::from_integer(0), 0); p]; p];
    let mut misfit = 0.0f64;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    for (bi, b) in models.iter().enumerate() {
        let mu = mu_to_f64(&b.mu);
        for n in 0..p {
            // coefficient table a[u][l - l_min]
            let mut coeffs: Vec<Vec<Complex64>> = Vec::with_capacity(b.size);
            for u in 0..b.size {
                let mut a_u = Vec::new();
                for l in b.l_min..=b.l_max {
                    let s_exp = l as f64 + mu;
                    let mut num = Complex64::new(0.0, 0.0);
                    let mut den = 0.0;
                    for (hi, &y) in opts.heights.iter().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (si, (tau, _)) in samples[hi].iter().enumerate() {
                            acc += hvals[bi][n][hi][si][u] * (-two_pi_i * s_exp * tau.re).exp();
                        }
                        acc /= ns as f64;
                        let w = (-2.0 * PI * s_exp * y).exp();
                        num += acc * w;
                        den += w * w;
                    }
                    let mut a = num / den;
                    let floor = eps * scale / (-2.0 * PI * s_exp * y_min).exp();
                    if a.norm() < floor {
                        a = Complex64::new(0.0, 0.0);
                    }
                    a_u.push(a);
                }
                // misfit of this h-series over all samples
                for (hi, row) in samples.iter().enumerate() {
                    for (si, (tau, _)) in row.iter().enumerate() {
                        let model: Complex64 = (b.l_min..=b.l_max)
                            .zip(&a_u)
                            .map(|(l, a)| a * (two_pi_i * (l as f64 + mu) * tau).exp())
                            .sum();
                        misfit = misfit.max((model - hvals[bi][n][hi][si][u]).norm());
                    }
                }
                coeffs.push(a_u);
            }
            for i in 0..b.size {
                let mut f = LogQSeries::zero(b.mu, b.l_max + 1);
                for t in 0..=i {
                    for (li, a) in coeffs[i - t].iter().enumerate() {
                        if a.norm() > 0.0 {
                            f.add_to(b.l_min + li as i64, t, *a);
                        }
                    }
                }
                series[b.offset + i][n] = f;
            }
        }
    }
    Ok(Extraction {
        series,
        fit_residual: if scale > 0.0 { misfit / scale } else { 0.0 },
        condition,
        samples_per_height: ns,
        heights: opts.heights.clone(),
        noise_floor: eps,
    })
}

/// Predicted leading term of `P(tau)_{mn}` (0-based indices):
/// `binom(tau, m - n) q^{nu_r + mu_r}` when `n` lies in the block of `m` and
/// `n <= m`, zero otherwise.
pub fn leading_term(
    rho: &Representation,
    params: &PoincareParams,
    m: usize,
    n: usize,
) -> Result<LogQSeries<Complex64>> {
    params.check(rho)?;
    let p = rho.dim();
    if m >= p || n >= p {
        return Err(Error::InvalidInput(format!(
            "indices ({m}, {n}) out of range for p = {p}"
        )));
    }
    let r = rho.spec().block_of(m);
    let off = rho.spec().offsets()[r];
    let mu = rho.spec().blocks()[r].mu;
    let nu = params.nu[r];
    if off <= n && n <= m {
        Ok(LogQSeries::monomial(
            mu,
            nu,
            m - n,
            Complex64::new(1.0, 0.0),
            nu + 1,
        ))
    } else {
        Ok(LogQSeries::zero(mu, nu + 1))
    }
}

/// Components `Delta^v sum_r P_{., M_{r-1}+1}` with their classifications
/// and the numeric rank of their coefficient matrix.
#[derive(Clone, Debug)]
pub struct HolomorphicForm {
    pub components: Vec<LogQSeries<Complex64>>,
    pub classifications: Vec<Classification>,
    pub rank: usize,
    pub extraction: Extraction,
}

impl HolomorphicForm {
    pub fn require_full_rank(&self) -> Result<()> {
        if self.rank < self.components.len() {
            return Err(Error::RankDeficient {
                rank: self.rank,
                expected: self.components.len(),
            });
        }
        Ok(())
    }
}

/// Builds `Delta^v` times the sum over blocks of the first column of each block.
///
/// The first column of block `r` has leading terms `binom(tau, u) q^{nu_r + mu_r}`
/// in every row of that block, which makes the components independent.
pub fn build_holomorphic_form(
    rho: &Representation,
    params: &PoincareParams,
    v: u32,
    opts: &ExtractOptions,
) -> Result<HolomorphicForm> {
    params.check(rho)?;
    let exps = params.exponents(rho);
    for (i, e) in exps.iter().enumerate() {
        if *e >= 0.0 {
            return Err(Error::InvalidInput(format!(
                "nu_{i} + mu_{i} = {e} must be negative"
            )));
        }
        if exps[..i].iter().any(|x| (x - e).abs() < 1e-12) {
            return Err(Error::InvalidInput(
                "exponents nu_r + mu_r must be distinct".into(),
            ));
        }
        if (v as f64) < -e {
            return Err(Error::InvalidInput(format!(
                "v = {v} is smaller than -(nu + mu) = {}",
                -e
            )));
        }
    }
    let ex = extract_coefficients(rho, params, opts)?;
    let p = rho.dim();
    let offsets = rho.spec().offsets();
    let cols: Vec<usize> = offsets[..offsets.len() - 1].to_vec();
    let max_order = ex.series.iter().flatten().map(|s| s.order()).max().unwrap_or(0);
    let delta: LogQSeries<Complex64> =
        eisenstein(Classical::Delta, (max_order + v as i64 + 1).max(2) as usize);
    let mut delta_v = LogQSeries::one(crate::logq::EXACT_ORDER);
    for _ in 0..v {
        delta_v = delta_v.mul(&delta)?;
    }
    let mut components = Vec::with_capacity(p);
    for i in 0..p {
        let mut f = ex.series[i][cols[0]].clone();
        for &c in &cols[1..] {
            f = f.add(&ex.series[i][c])?;
        }
        components.push(delta_v.mul(&f)?);
    }
    let scale = components.iter().map(|f| f.max_abs_coeff()).fold(0.0, f64::max);
    let tol = scale * 1e-9;
    let classifications = components.iter().map(|f| f.classify_at_infinity(tol)).collect();
    let mut keys: Vec<(Mu, i64, usize)> = components
        .iter()
        .flat_map(|f| f.terms().map(move |(&(n, j), _)| (f.mu(), n, j)))
        .collect();
    keys.sort();
    keys.dedup();
    let mat = CMatrix::from_fn(p, keys.len().max(1), |i, c| match keys.get(c) {
        Some(&(mu, n, j)) if components[i].mu() == mu => components[i].get(n, j),
        _ => Complex64::new(0.0, 0.0),
    });
    let rank = numeric_rank(&mat, 1e-8);
    Ok(HolomorphicForm {
        components,
        classifications,
        rank,
        extraction: ex,
    })
}
