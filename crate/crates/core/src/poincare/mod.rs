//! Truncated matrix-valued Poincare series.
//!
//! For a coset representative `M` the summand is
//!
//! ```text
//! rho(M)^{-1} Lambda(e^{2 pi i (nu_r + mu_r) M tau}) B_rho(M tau)^{-1} J_k(M, tau)^{-1}
//! ```
//!
//! and the truncated series sums it over the representatives of
//! `coset_reps(N)`, i.e. over coprime bottom rows with `max(|c|, |d|) <= N`.
//! The unfolded form is half the sum over `<T>\Gamma`. When `rho(S^2) = eps I`
//! the terms for `M` and `-M` differ by the column factor `eps (-1)^{k_n}`, so
//! the folded form sums over `+-<T>\Gamma` with column `n` scaled by
//! `(1 + eps (-1)^{k_n}) / 2`.

mod extract;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_norm, CMatrix};
use crate::logq::binom::binom_c64;
use crate::rep::{mu_to_f64, Representation};
use crate::sl2z::{coset_reps, GammaElement};
use crate::summation::deterministic_sum;

pub use extract::{
    build_holomorphic_form, extract_coefficients, leading_term, ExtractOptions, Extraction, HolomorphicForm,
};

/// Which coset space to sum over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SumForm {
    /// Folded when `rho(S^2)` is scalar, unfolded otherwise.
    #[default]
    Auto,
    Folded,
    Unfolded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareParams {
    /// Shifts `nu_r`, one per Jordan block.
    pub nu: Vec<i64>,
    /// Column weights `k_1, ..., k_p`.
    pub k: Vec<i64>,
    /// Coset cutoff `N`.
    pub n_trunc: u64,
    pub form: SumForm,
    /// Decimal digits used for output and noise floors.
    pub precision: usize,
    pub parallel: bool,
}

impl PoincareParams {
    pub fn new(nu: Vec<i64>, k: Vec<i64>, n_trunc: u64) -> Self {
        Self {
            nu,
            k,
            n_trunc,
            form: SumForm::Auto,
            precision: 17,
            parallel: true,
        }
    }

    pub fn with_form(mut self, form: SumForm) -> Self {
        self.form = form;
        self
    }

    pub fn check(&self, rho: &Representation) -> Result<()> {
        let t = rho.spec().num_blocks();
        if self.nu.len() != t {
            return Err(Error::InvalidInput(format!(
                "nu has {} entries but the representation has {t} blocks",
                self.nu.len()
            )));
        }
        if self.k.len() != rho.dim() {
            return Err(Error::InvalidInput(format!(
                "k has {} entries but the representation has dimension {}",
                self.k.len(),
                rho.dim()
            )));
        }
        if self.n_trunc == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        Ok(())
    }

    /// The exponent `nu_r + mu_r` of each block.
    pub fn exponents(&self, rho: &Representation) -> Vec<f64> {
        rho.spec()
            .blocks()
            .iter()
            .zip(&self.nu)
            .map(|(b, &nu)| nu as f64 + mu_to_f64(&b.mu))
            .collect()
    }
}

/// Heuristic weight threshold `3 + 2 K4` from a fitted norm exponent.
///
/// Convergence is only known for sufficiently large weights; this value is
/// an engineering guide, and weights below it only trigger a warning.
pub fn weight_threshold(rho: &Representation) -> f64 {
    let fit = crate::estimates::fit_norm_growth(rho, 256, 0);
    3.0 + 2.0 * fit.k4.max(0.0)
}

/// Logs a warning when `min(k)` is below [`weight_threshold`].
pub fn warn_if_low_weight(rho: &Representation, params: &PoincareParams) -> f64 {
    let thr = weight_threshold(rho);
    let kmin = params.k.iter().copied().min().unwrap_or(0);
    if (kmin as f64) < thr {
        log::warn!(
            "min weight {kmin} is below the heuristic convergence threshold {thr:.2}; \
             partial sums may not converge"
        );
    }
    thr
}

type CosetCache = Mutex<HashMap<(u64, bool), Arc<Vec<[i64; 4]>>>>;

/// Coset representatives as machine integers, cached per `(N, folded)`.
pub fn coset_table(n: u64, folded: bool) -> Arc<Vec<[i64; 4]>> {
    static CACHE: OnceLock<CosetCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(n, folded)) {
        return t.clone();
    }
    let table: Vec<[i64; 4]> = coset_reps(n, folded)
        .iter()
        .map(|g| g.to_i64s().expect("coset representatives fit in i64"))
        .collect();
    let table = Arc::new(table);
    cache.lock().unwrap().insert((n, folded), table.clone());
    table
}

/// `Lambda_rho(z_1, ..., z_t)`: block-scalar diagonal.
pub fn lambda_rho(rho: &Representation, z: &[Complex64]) -> CMatrix {
    let p = rho.dim();
    let mut m = CMatrix::zeros(p, p);
    let mut off = 0;
    for (b, zr) in rho.spec().blocks().iter().zip(z) {
        for i in 0..b.size {
            m[(off + i, off + i)] = *zr;
        }
        off += b.size;
    }
    m
}

fn block_toeplitz(rho: &Representation, f: impl Fn(usize) -> Complex64) -> CMatrix {
    let p = rho.dim();
    let mut m = CMatrix::zeros(p, p);
    let mut off = 0;
    for b in rho.spec().blocks() {
        for i in 0..b.size {
            for j in 0..=i {
                m[(off + i, off + j)] = f(i - j);
            }
        }
        off += b.size;
    }
    m
}

/// `B_rho(x) = diag(B_{m_1}(x), ..., B_{m_t}(x))`.
pub fn b_rho(rho: &Representation, x: Complex64) -> CMatrix {
    block_toeplitz(rho, |k| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        binom_c64(x + (k as f64 - 1.0), k) * sign
    })
}

/// `B_rho(x)^{-1}`, with entries `binom(x, i - j)`.
pub fn b_rho_inverse(rho: &Representation, x: Complex64) -> CMatrix {
    block_toeplitz(rho, |k| binom_c64(x, k))
}

/// `J_k(g, tau) = diag(j(g, tau)^{k_1}, ..., j(g, tau)^{k_p})`.
pub fn automorphy_j(k: &[i64], g: &GammaElement, tau: Complex64) -> CMatrix {
    let j = g.cocycle_j(tau);
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        k.len(),
        k.iter().map(|&kn| j.powi(kn as i32)),
    ))
}

/// A truncated evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSample {
    pub tau: Complex64,
    pub value: CMatrix,
    /// Heuristic estimate of the omitted tail (infinite when the shell sums
    /// do not decay fast enough to extrapolate).
    pub tail_bound: f64,
    pub num_terms: usize,
    pub folded: bool,
}

/// Precomputed per-evaluation data shared by all summands.
struct TermContext<'a> {
    rho: &'a Representation,
    k: &'a [i64],
    exps: Vec<f64>,
    col_factor: Vec<f64>,
    tau: Complex64,
}

impl TermContext<'_> {
    fn term(&self, m: &[i64; 4]) -> CMatrix {
        let [a, b, c, d] = *m;
        let p = self.rho.dim();
        let tau = self.tau;
        let j = tau * c as f64 + d as f64;
        let m_tau = (tau * a as f64 + b as f64) / j;
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let z: Vec<Complex64> = self.exps.iter().map(|s| (two_pi_i * *s * m_tau).exp()).collect();
        let mut y = b_rho_inverse(self.rho, m_tau);
        let mut off = 0;
        for (bl, zr) in self.rho.spec().blocks().iter().zip(&z) {
            for i in 0..bl.size {
                for jj in 0..bl.size {
                    y[(off + i, off + jj)] *= zr;
                }
            }
            off += bl.size;
        }
        // rho(M)^{-1} = rho(M^{-1})
        let rinv = self.rho.evaluate_i64([d, -b, -c, a]);
        let mut out = rinv * y;
        for n in 0..p {
            let f = j.powi(-(self.k[n] as i32)) * self.col_factor[n];
            for i in 0..p {
                out[(i, n)] *= f;
            }
        }
        out
    }
}

fn resolve_form(rho: &Representation, form: SumForm) -> Result<Option<i8>> {
    let tol = 1e-10;
    match form {
        SumForm::Unfolded => Ok(None),
        SumForm::Folded => match rho.s2_scalar(tol) {
            Some(eps) => Ok(Some(eps)),
            None => Err(Error::NotScalarS2(max_norm(
                &(rho.rho_s2() - crate::linalg::identity(rho.dim())),
            ))),
        },
        SumForm::Auto => Ok(rho.s2_scalar(tol)),
    }
}

fn shell(m: &[i64; 4]) -> i64 {
    m[2].abs().max(m[3].abs())
}

/// The truncated series at `tau`.
pub fn poincare_eval(rho: &Representation, params: &PoincareParams, tau: Complex64) -> Result<MatrixSample> {
    params.check(rho)?;
    if !(tau.im > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tau = {tau} is not in the upper half plane"
        )));
    }
    let eps = resolve_form(rho, params.form)?;
    let folded = eps.is_some();
    let p = rho.dim();
    let col_factor: Vec<f64> = match eps {
        Some(e) => params
            .k
            .iter()
            .map(|&kn| {
                let sign = if kn.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                (1.0 + e as f64 * sign) / 2.0
            })
            .collect(),
        None => vec![0.5; p],
    };
    let ctx = TermContext {
        rho,
        k: &params.k,
        exps: params.exponents(rho),
        col_factor,
        tau,
    };
    let table = coset_table(params.n_trunc, folded);
    let value = deterministic_sum(&table, p, p, params.parallel, |m| ctx.term(m));

    let n = params.n_trunc as i64;
    let shell_sum = |s: i64| -> f64 {
        table
            .iter()
            .filter(|m| shell(m) == s)
            .map(|m| max_norm(&ctx.term(m)))
            .sum()
    };
    let tail_bound = if n >= 4 {
        let (s_hi, s_lo) = (shell_sum(n), shell_sum(n / 2));
        tail_estimate(n, s_hi, n / 2, s_lo)
    } else {
        f64::INFINITY
    };
    Ok(MatrixSample {
        tau,
        value,
        tail_bound,
        num_terms: table.len(),
        folded,
    })
}

/// With shell sums `S_n ~ C n^{-a}`, the omitted tail is about
/// `S_N N / (a - 1)`.
fn tail_estimate(n_hi: i64, s_hi: f64, n_lo: i64, s_lo: f64) -> f64 {
    if s_hi == 0.0 {
        return 0.0;
    }
    if s_lo <= 0.0 {
        return f64::INFINITY;
    }
    let a = -(s_hi / s_lo).ln() / (n_hi as f64 / n_lo as f64).ln();
    if a <= 1.05 {
        f64::INFINITY
    } else {
        s_hi * n_hi as f64 / (a - 1.0)
    }
}

/// `max |rho(g) P(tau) - P(g tau) J_k(g, tau)^{-1}|` at equal truncation.
pub fn modularity_residual(
    rho: &Representation,
    params: &PoincareParams,
    g: &GammaElement,
    tau: Complex64,
) -> Result<f64> {
    let p_tau = poincare_eval(rho, params, tau)?.value;
    let p_gtau = poincare_eval(rho, params, g.mobius(tau))?.value;
    let jinv = automorphy_j(&params.k, g, tau)
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("singular automorphy factor".into()))?;
    Ok(max_norm(&(rho.evaluate(g) * p_tau - p_gtau * jinv)))
}
