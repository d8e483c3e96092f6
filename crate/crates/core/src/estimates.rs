//! Empirical checks of the norm and length inequalities, and growth fits for
//! Fourier coefficients.
//!
//! Every constant produced here is fitted from samples and reported with the
//! slack used to verify it. None of them is a proven universal value.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::max_norm;
use crate::logq::{Coeff, LogQSeries};
use crate::rep::Representation;
use crate::sl2z::{coset_rep_for_row, EichlerWord, GammaElement};

/// Which of the three product inequalities applies, with both sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prop36Check {
    /// `"l0<0"`, `"l0=0"`, `"l0>0"` or `"empty"` (for `c = 0`).
    pub case: &'static str,
    pub product: String,
    pub bound: String,
    pub holds: bool,
}

/// Checks `|l_0 ... l_v| <= |d|` (`l_0 < 0`), `|l_1 ... l_v| <= |d - c|`
/// (`l_0 = 0`) or `|l_0 ... l_v| <= |c| + |d|` (`l_0 > 0`) in exact integers.
pub fn prop36_details(g: &GammaElement) -> Prop36Check {
    let w: EichlerWord = g.eichler_decompose();
    let (c, d) = (g.c(), g.d());
    let Some(l0) = w.exponents.first() else {
        return Prop36Check {
            case: "empty",
            product: "1".into(),
            bound: "-".into(),
            holds: true,
        };
    };
    let prod_from = |start: usize| -> BigInt {
        w.exponents[start..]
            .iter()
            .fold(BigInt::one(), |acc, l| acc * l.abs())
    };
    let (case, product, bound) = if l0.is_negative() {
        ("l0<0", prod_from(0), d.abs())
    } else if l0.is_zero() {
        ("l0=0", prod_from(1), (d - c).abs())
    } else {
        ("l0>0", prod_from(0), c.abs() + d.abs())
    };
    Prop36Check {
        case,
        holds: product <= bound,
        product: product.to_string(),
        bound: bound.to_string(),
    }
}

pub fn check_prop36(g: &GammaElement) -> bool {
    prop36_details(g).holds
}

/// Counts from an exhaustive sweep over all elements with entries in `[-b, b]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub bound: i64,
    pub checked: u64,
    pub roundtrip_failures: u64,
    pub sign_failures: u64,
    pub prop36_failures: u64,
    pub first_failure: Option<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.roundtrip_failures == 0 && self.sign_failures == 0 && self.prop36_failures == 0
    }
}

/// All `(a, b, c, d)` with `ad - bc = 1` and entries in `[-bound, bound]`.
pub fn elements_in_box(bound: i64) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for c in -bound..=bound {
        for d in -bound..=bound {
            if c == 0 {
                if d.abs() == 1 {
                    for b in -bound..=bound {
                        out.push([d, b, 0, d]);
                    }
                }
                continue;
            }
            if c.gcd(&d) != 1 {
                continue;
            }
            for a in -bound..=bound {
                let num = a * d - 1;
                if num % c == 0 {
                    let b = num / c;
                    if b.abs() <= bound {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

pub fn eichler_sweep(bound: i64) -> SweepReport {
    use rayon::prelude::*;
    let elems = elements_in_box(bound);
    let results: Vec<(bool, bool, bool)> = elems
        .par_iter()
        .map(|e| {
            let g = GammaElement::new(e[0], e[1], e[2], e[3]).expect("determinant one");
            let w = g.eichler_decompose();
            (w.reconstruct() == g, w.is_sign_valid(), check_prop36(&g))
        })
        .collect();
    let mut rep = SweepReport {
        bound,
        checked: elems.len() as u64,
        ..Default::default()
    };
    for (e, (rt, sign, p36)) in elems.iter().zip(&results) {
        rep.roundtrip_failures += u64::from(!rt);
        rep.sign_failures += u64::from(!sign);
        rep.prop36_failures += u64::from(!p36);
        if rep.first_failure.is_none() && !(rt & sign & p36) {
            rep.first_failure = Some(format!("{e:?}"));
        }
    }
    rep
}

/// Membership in `{|Re tau| <= 1/2, Im tau >= sqrt(3)/2}`.
pub fn in_strip(tau: Complex64) -> bool {
    tau.re.abs() <= 0.5 && tau.im >= 3f64.sqrt() / 2.0
}

fn random_strip_point(rng: &mut ChaCha8Rng) -> Complex64 {
    let x = rng.gen_range(-0.5..=0.5);
    // dense near the lower edge, where the ratio is largest
    let y = 3f64.sqrt() / 2.0 + rng.gen::<f64>().powi(3) * 3.0;
    Complex64::new(x, y)
}

/// `(c^2 + d^2) / |c tau + d|^2`.
pub fn cd_ratio(tau: Complex64, c: i64, d: i64) -> f64 {
    let (cf, df) = (c as f64, d as f64);
    (cf * cf + df * df) / (tau * cf + df).norm_sqr()
}

/// Largest observed ratio over `samples` random `(tau, c, d)` with `c != 0`.
pub fn fit_k6(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let tau = random_strip_point(&mut rng);
        let c: i64 = loop {
            let c = rng.gen_range(-40..=40);
            if c != 0 {
                break c;
            }
        };
        let d = rng.gen_range(-40..=40);
        best = best.max(cd_ratio(tau, c, d));
    }
    best
}

/// `c^2 + d^2 <= 1.05 K6 |c tau + d|^2` for `tau` in the strip.
pub fn check_cd_bound(tau: Complex64, c: i64, d: i64, k6: f64) -> Result<bool> {
    if !in_strip(tau) {
        return Err(Error::InvalidInput(format!("tau = {tau} is outside the strip")));
    }
    if c == 0 {
        return Err(Error::InvalidInput("c must be nonzero".into()));
    }
    Ok(cd_ratio(tau, c, d) <= 1.05 * k6)
}

/// `Im(g tau) <= 2 / sqrt(3)` for `c != 0` and `tau` in the strip.
pub fn check_im_bound(tau: Complex64, g: &GammaElement) -> bool {
    g.mobius(tau).im <= 2.0 / 3f64.sqrt() * (1.0 + 1e-12)
}

/// Fitted `||rho(gamma)|| <= K3 (c^2 + d^2)^{K4}` over coset representatives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormGrowthFit {
    pub k3: f64,
    pub k4: f64,
    pub sample_size: usize,
    pub seed: u64,
    /// Largest `||rho|| / bound` on a fresh sample.
    pub fresh_max_ratio: f64,
    /// Largest `||rho(gamma^{-1})|| / bound` on the fresh sample.
    pub inverse_max_ratio: f64,
    pub slack: f64,
}

impl NormGrowthFit {
    pub fn holds(&self) -> bool {
        self.fresh_max_ratio <= self.slack && self.inverse_max_ratio <= self.slack
    }
}

/// Random normalized coset representative with `1 <= |c| <= max_c`.
fn random_coset_rep(rng: &mut ChaCha8Rng, max_c: f64) -> [i64; 4] {
    loop {
        let c = max_c.powf(rng.gen::<f64>()).floor().max(1.0) as i64;
        let dmax = max_c.powf(rng.gen::<f64>()).floor().max(1.0) as i64;
        let d = rng.gen_range(-dmax..=dmax);
        let c = if rng.gen::<bool>() { c } else { -c };
        if c.gcd(&d) == 1 {
            return coset_rep_for_row(c, d).to_i64s().expect("small entries");
        }
    }
}

fn log_cd(g: &[i64; 4]) -> f64 {
    let (c, d) = (g[2] as f64, g[3] as f64);
    (c * c + d * d).ln()
}

fn lstsq_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Slope by least squares on the log scale; the intercept is then raised to
/// the upper envelope of the fit sample. A fresh sample (seed + 1) and the
/// inverses are checked against the bound with 10% slack.
pub fn fit_norm_growth(rho: &Representation, sample_size: usize, seed: u64) -> NormGrowthFit {
    let max_c = 1e4;
    let sample = |seed: u64| -> Vec<[i64; 4]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sample_size.max(2))
            .map(|_| random_coset_rep(&mut rng, max_c))
            .collect()
    };
    let fit: Vec<[i64; 4]> = sample(seed);
    let xs: Vec<f64> = fit.iter().map(log_cd).collect();
    let ys: Vec<f64> = fit.iter().map(|g| max_norm(&rho.evaluate_i64(*g)).ln()).collect();
    let (k4, _) = lstsq_line(&xs, &ys);
    let log_k3 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - k4 * x)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = |g: &[i64; 4]| (log_k3 + k4 * log_cd(g)).exp();
    let fresh = sample(seed.wrapping_add(1));
    let mut fresh_max = 0.0f64;
    let mut inv_max = 0.0f64;
    for g in &fresh {
        let b = bound(g);
        fresh_max = fresh_max.max(max_norm(&rho.evaluate_i64(*g)) / b);
        let inv = [g[3], -g[1], -g[2], g[0]];
        inv_max = inv_max.max(max_norm(&rho.evaluate_i64(inv)) / b);
    }
    NormGrowthFit {
        k3: log_k3.exp(),
        k4,
        sample_size,
        seed,
        fresh_max_ratio: fresh_max,
        inverse_max_ratio: inv_max,
        slack: 1.1,
    }
}

/// Slope of `log |a(n)|` against `log n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub exponent: f64,
    pub intercept: f64,
    pub n_min: i64,
    pub n_max: i64,
    pub points: usize,
    /// RMS residual of the line on the log scale.
    pub residual: f64,
    pub cuspidal: bool,
    /// `k + alpha` or `(k + alpha) / 2`.
    pub bound: f64,
    pub within_bound: bool,
}

/// Fits the growth of the `tau`-degree-0 coefficients of `f` with `1 <= n <= n_max`.
///
/// `alpha` is the norm-growth exponent of the representation (`2 K4`); zero
/// for the trivial representation.
pub fn fit_fourier_growth<C: Coeff>(
    f: &LogQSeries<C>,
    k: i64,
    cuspidal: bool,
    n_max: i64,
    alpha: f64,
) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = f
        .ordinary(0)
        .into_iter()
        .filter(|(n, _)| *n >= 1 && *n <= n_max)
        .filter_map(|(n, c)| {
            let m = c.magnitude();
            (m > 0.0).then(|| ((n as f64).ln(), m.ln()))
        })
        .collect();
    if pts.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "{} nonzero coefficients, at least 50 needed",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, intercept) = lstsq_line(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    let bound = if cuspidal {
        (k as f64 + alpha) / 2.0
    } else {
        k as f64 + alpha
    };
    let ns = f.ordinary(0);
    let n_min = ns.iter().map(|p| p.0).filter(|n| *n >= 1).min().unwrap_or(0);
    let n_hi = ns.iter().map(|p| p.0).filter(|n| *n <= n_max).max().unwrap_or(0);
    Ok(GrowthFit {
        exponent: slope,
        intercept,
        n_min,
        n_max: n_hi,
        points: xs.len(),
        residual,
        cuspidal,
        bound,
        within_bound: slope <= bound,
    })
}

/// Fitted `L(gamma) <= C log(|c| + 2)` over random elements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthFit {
    pub constant: f64,
    pub sample_size: usize,
    pub max_c: i64,
    /// Largest ratio on a fresh sample.
    pub fresh_max_ratio: f64,
    pub slack: f64,
}

impl LengthFit {
    pub fn holds(&self) -> bool {
        self.fresh_max_ratio <= self.constant * self.slack
    }
}

fn random_element(rng: &mut ChaCha8Rng, max_c: i64) -> GammaElement {
    loop {
        let c = rng.gen_range(-max_c..=max_c);
        let d = rng.gen_range(-max_c..=max_c);
        if c == 0 || c.gcd(&d) != 1 {
            continue;
        }
        let m: i64 = rng.gen_range(-5..=5);
        let g = GammaElement::t_pow(m).compose(&coset_rep_for_row(c, d));
        return if rng.gen::<bool>() { g } else { g.neg() };
    }
}

fn length_ratio(g: &GammaElement) -> f64 {
    let c = g.c().abs().to_f64().unwrap_or(f64::INFINITY);
    g.eichler_decompose().length() as f64 / (c + 2.0).ln()
}

pub fn fit_eichler_length(sample_size: usize, max_c: i64, seed: u64) -> LengthFit {
    let ratios = |seed: u64| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sample_size)
            .map(|_| length_ratio(&random_element(&mut rng, max_c)))
            .collect()
    };
    // The length only depends on c and d mod c, and the ratio is largest for
    // small |c|, so every class with |c| <= SMALL_C enters the fit exhaustively.
    const SMALL_C: i64 = 64;
    let exhaustive = (1..=SMALL_C)
        .flat_map(|c| (0..c).filter(move |d| c.gcd(d) == 1).map(move |d| (c, d)))
        .map(|(c, d)| length_ratio(&coset_rep_for_row(c, d)))
        .fold(0.0, f64::max);
    let constant = ratios(seed).into_iter().fold(exhaustive, f64::max);
    let fresh = ratios(seed.wrapping_add(1)).into_iter().fold(0.0, f64::max);
    LengthFit {
        constant,
        sample_size,
        max_c,
        fresh_max_ratio: fresh,
        slack: 1.1,
    }
}

/// Counts of violations over random samples of the strip inequalities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripReport {
    pub samples: usize,
    pub k6: f64,
    pub cd_failures: usize,
    pub im_failures: usize,
}

pub fn strip_checks(samples: usize, seed: u64) -> StripReport {
    let k6 = fit_k6(samples, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let (mut cd_failures, mut im_failures) = (0, 0);
    for _ in 0..samples {
        let tau = random_strip_point(&mut rng);
        let g = random_element(&mut rng, 60);
        let [_, _, c, d] = g.to_i64s().expect("small entries");
        if !check_cd_bound(tau, c, d, k6).unwrap_or(false) {
            cd_failures += 1;
        }
        if !check_im_bound(tau, &g) {
            im_failures += 1;
        }
    }
    StripReport {
        samples,
        k6,
        cd_failures,
        im_failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logq::classical::{eisenstein, Classical};

    #[test]
    fn prop36_examples() {
        let g = GammaElement::st_pow(-2);
        let r = prop36_details(&g);
        assert_eq!((r.case, r.holds), ("l0<0", true));
        let r = prop36_details(&GammaElement::s());
        assert_eq!((r.case, r.product.as_str(), r.bound.as_str()), ("l0=0", "1", "1"));
        assert!(check_prop36(&GammaElement::t_pow(7)));
    }

    #[test]
    fn small_sweep_passes() {
        let r = eichler_sweep(8);
        assert!(r.passed(), "{r:?}");
        assert!(r.checked > 500);
    }

    #[test]
    fn box_enumeration_counts() {
        // all elements with entries in {-1, 0, 1}
        let e = elements_in_box(1);
        assert_eq!(e.len(), 20);
        assert!(e.iter().all(|m| m[0] * m[3] - m[1] * m[2] == 1));
    }

    #[test]
    fn cd_bound_examples() {
        let i = Complex64::new(0.0, 1.0);
        assert!(check_cd_bound(i, 1, 0, 1.0).unwrap());
        let rho = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        // |rho + 1|^2 = 1, so the ratio is 2
        assert!((cd_ratio(rho, 1, 1) - 2.0).abs() < 1e-12);
        let k6 = fit_k6(10_000, 3);
        assert!(k6 <= 2.0 + 1e-12 && k6 > 1.8, "{k6}");
        assert!(check_cd_bound(rho, 1, 1, k6).unwrap());
        assert!(check_cd_bound(Complex64::new(0.9, 1.0), 1, 1, k6).is_err());
    }

    #[test]
    fn strip_sample_passes() {
        let r = strip_checks(2000, 5);
        assert_eq!((r.cd_failures, r.im_failures), (0, 0));
    }

    #[test]
    fn norm_growth_trivial_and_standard() {
        let t = fit_norm_growth(&Representation::trivial(), 200, 1);
        assert_eq!(t.k4, 0.0);
        assert!(t.holds());
        let s = fit_norm_growth(&Representation::standard(), 500, 1);
        assert!(s.k4 > 0.3 && s.k4 < 0.7, "{}", s.k4);
        assert!(s.holds(), "{s:?}");
    }

    #[test]
    fn growth_fit_examples() {
        let e4: LogQSeries<Complex64> = eisenstein(Classical::E4, 600);
        let fit = fit_fourier_growth(&e4, 4, false, 600, 0.0).unwrap();
        assert!(fit.exponent > 2.8 && fit.exponent < 3.2, "{}", fit.exponent);
        assert!(fit.within_bound);
        let one: LogQSeries<Complex64> = LogQSeries::one(100);
        assert!(matches!(
            fit_fourier_growth(&one, 0, false, 100, 0.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn length_fit_is_bounded() {
        let f = fit_eichler_length(300, 10_000, 2);
        assert!(f.constant.is_finite() && f.constant > 0.0);
        assert!(f.holds(), "{f:?}");
    }
}
