//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use logvvmf::estimates::{eichler_sweep, fit_fourier_growth};
use logvvmf::linalg::{gauss_from_i64, max_norm};
use logvvmf::logq::binom::{
    binom_matrix, binom_matrix_inverse, g_to_h_values, jordan_unipotent, BinomMatrix,
};
use logvvmf::logq::classical::{classical_coeffs, eisenstein, Classical};
use logvvmf::logq::{g_to_h, h_to_g, Coeff, KappaPoly, LogQSeries, Mu};
use logvvmf::mlde::{find_mlde, hilbert_series_check, minimal_mlde, module_rank, Weighted};
use logvvmf::poincare::{
    extract_coefficients, leading_term, modularity_residual, poincare_eval, ExtractOptions, PoincareParams,
    SumForm,
};
use logvvmf::rep::{Block, BlockSpec, Representation};
use logvvmf::sl2z::GammaElement;
use logvvmf::Error;

type Outcome = Result<String, String>;

fn check(ok: bool, details: String) -> Outcome {
    if ok {
        Ok(details)
    } else {
        Err(details)
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    format!("error: {e}")
}

fn criterion_1() -> Outcome {
    let rep = eichler_sweep(30);
    check(
        rep.passed(),
        format!(
            "{} elements, round-trip/sign/inequality failures {}/{}/{}",
            rep.checked, rep.roundtrip_failures, rep.sign_failures, rep.prop36_failures
        ),
    )
}

fn criterion_2() -> Outcome {
    let one = BigRational::from_integer(1.into());
    for m in 1..=6 {
        let (b, bi) = (binom_matrix(m), binom_matrix_inverse(m));
        if b.mul(&bi) != BinomMatrix::identity(m) {
            return Err(format!("B B^-1 != I at m = {m}"));
        }
        // J_{m,lambda} = lambda J_{m,1}, so the identity reduces to lambda = 1
        if jordan_unipotent(m).mul(&bi) != bi.shift(&one) {
            return Err(format!("J B^-1(x) != B^-1(x + 1) at m = {m}"));
        }
    }

    // exact g <-> h round trip on series with kappa-dependent coefficients
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let order = 12;
    for m in 1..=6 {
        let g: Vec<LogQSeries<KappaPoly>> = (0..m)
            .map(|_| {
                let mut s = LogQSeries::zero(Mu::new(1, 3), order);
                for _ in 0..6 {
                    let c = KappaPoly::new(vec![
                        gauss_from_i64(rng.gen_range(-9..=9)),
                        gauss_from_i64(rng.gen_range(-9..=9)),
                    ]);
                    s.add_to(rng.gen_range(0..order), rng.gen_range(0..m), c);
                }
                s
            })
            .collect();
        let back = h_to_g(&g_to_h(&g).map_err(fail)?).map_err(fail)?;
        if back.iter().zip(&g).any(|(a, b)| !a.sub(b).unwrap().is_zero()) {
            return Err(format!("g -> h -> g differs at m = {m}"));
        }
    }

    // h_j(tau + 1) = lambda h_j(tau) when g is built from ordinary series h
    let mu = Mu::new(2, 7);
    let lambda = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 2.0 / 7.0);
    let mut worst: f64 = 0.0;
    for m in 1..=6 {
        let h: Vec<LogQSeries<Complex64>> = (0..m)
            .map(|_| {
                let mut s = LogQSeries::zero(mu, 20);
                for n in 0..20 {
                    s.set(
                        n,
                        0,
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    );
                }
                s
            })
            .collect();
        let g = h_to_g(&h).map_err(fail)?;
        for _ in 0..20 {
            let tau = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.8..2.0));
            let at =
                |t: Complex64| g_to_h_values(&g.iter().map(|s| s.evaluate(t).value).collect::<Vec<_>>(), t);
            let (h0, h1) = (at(tau), at(tau + 1.0));
            for (a, b) in h0.iter().zip(&h1) {
                worst = worst.max((b - lambda * a).norm() / (1.0 + a.norm()));
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("exact identities hold for m <= 6, periodicity residual {worst:.2e}"),
    )
}

fn serial(v: &Value) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn series_json(s: &LogQSeries<Complex64>) -> Value {
    let terms: Vec<Value> = s.terms().map(|(&(n, j), c)| json!([n, j, c.re, c.im])).collect();
    json!({"mu": s.mu().to_string(), "terms": terms})
}

/// Returns the verdict and a canonical serialization of everything computed.
fn criterion_3() -> (Outcome, String) {
    let rho = Representation::trivial();
    let run = || -> Result<(f64, f64, Value), Error> {
        let params = PoincareParams::new(vec![0], vec![8], 200);
        let ex = extract_coefficients(&rho, &params, &ExtractOptions::with_nq(3))?;
        let f = &ex.series[0][0];
        let e8 = (f.get(1, 0).re / 480.0 - 1.0)
            .abs()
            .max((f.get(2, 0).re / 61920.0 - 1.0).abs());

        let params = PoincareParams::new(vec![1], vec![12], 200);
        let nq = 5;
        let ex2 = extract_coefficients(&rho, &params, &ExtractOptions::with_nq(nq))?;
        let d = &ex2.series[0][0];
        let tau = classical_coeffs(Classical::Delta, nq);
        let a1 = d.get(1, 0);
        let delta = (2..nq)
            .map(|n| {
                let want = tau[n].to_f64().unwrap();
                ((d.get(n as i64, 0) / a1).re / want - 1.0).abs()
            })
            .fold(0.0, f64::max);
        Ok((e8, delta, json!([series_json(f), series_json(d)])))
    };
    match run() {
        Ok((e8, delta, v)) => (
            check(
                e8 <= 1e-6 && delta <= 1e-4,
                format!("E8 rel err {e8:.2e} (tol 1e-6), Delta rel err {delta:.2e} (tol 1e-4)"),
            ),
            serial(&v),
        ),
        Err(e) => (Err(fail(e)), String::new()),
    }
}

fn criterion_4() -> (Outcome, String) {
    let rho = Representation::standard();
    let i = Complex64::new(0.0, 1.0);
    let s = GammaElement::s();
    let t = GammaElement::t();
    let gammas = [
        ("S", s.clone()),
        ("TS", t.compose(&s)),
        ("ST^-1S", s.compose(&t.inverse()).compose(&s)),
    ];
    let mut rows = Vec::new();
    let mut ok = true;
    let mut worst_final: f64 = 0.0;
    for (name, g) in &gammas {
        let mut r = Vec::new();
        for n in [25, 50, 100] {
            let params = PoincareParams::new(vec![0], vec![7, 7], n);
            match modularity_residual(&rho, &params, g, i) {
                Ok(x) => r.push(x),
                Err(e) => return (Err(fail(e)), String::new()),
            }
        }
        ok &= r[2] <= 1e-6 && r[1] < r[0] + 1e-12 && r[2] < r[1] + 1e-12;
        worst_final = worst_final.max(r[2]);
        rows.push(json!({"gamma": name, "residuals": r}));
    }
    (
        check(
            ok,
            format!("max residual at N = 100 is {worst_final:.2e} (tol 1e-6), non-increasing in N"),
        ),
        serial(&json!(rows)),
    )
}

fn criterion_5() -> (Outcome, String) {
    let rho = Representation::standard();
    let params = PoincareParams::new(vec![0], vec![7, 8], 100).with_form(SumForm::Unfolded);
    let mut even: f64 = 0.0;
    let mut odd: f64 = 0.0;
    let mut vals = Vec::new();
    for tau in [
        Complex64::new(0.0, 1.0),
        Complex64::new(0.3, 1.1),
        Complex64::new(-0.45, 0.9),
    ] {
        let v = match poincare_eval(&rho, &params, tau) {
            Ok(s) => s.value,
            Err(e) => return (Err(fail(e)), String::new()),
        };
        even = even.max(max_norm(&v.columns(1, 1).into_owned()));
        odd = odd.max(max_norm(&v.columns(0, 1).into_owned()));
        vals.push(v.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>());
    }
    (
        check(
            even <= 1e-8,
            format!("weight-8 column max {even:.2e} (tol 1e-8); weight-7 column max {odd:.2e}"),
        ),
        serial(&json!(vals)),
    )
}

fn criterion_6() -> Outcome {
    // the standard representation twisted by the character with chi(T) = e^{2 pi i / 12}
    let spec = BlockSpec::new(vec![Block::new(2, Mu::new(1, 12))]).map_err(fail)?;
    let s = Representation::standard().rho_s() * Complex64::new(0.0, -1.0);
    let rho = Representation::new(s, spec).map_err(fail)?;
    let params = PoincareParams::new(vec![-1], vec![8, 8], 100);
    let ex = extract_coefficients(&rho, &params, &ExtractOptions::with_nq(3)).map_err(fail)?;
    let mut worst: f64 = 0.0;
    for m in 0..2 {
        for n in 0..2 {
            let p = &ex.series[m][n];
            if p.tau_degree().unwrap_or(0) > m {
                return Err(format!("P_{m}{n} has tau-degree {:?}, bound {m}", p.tau_degree()));
            }
            let lead = leading_term(&rho, &params, m, n).map_err(fail)?;
            for j in 0..2 {
                worst = worst.max((p.get(-1, j) - lead.get(-1, j)).norm());
            }
        }
    }
    check(
        worst <= 1e-5,
        format!("tau-degrees within bounds, leading-term error {worst:.2e} (tol 1e-5)"),
    )
}

fn criterion_7() -> Outcome {
    type Ex = KappaPoly;
    let order = 60;
    let delta: LogQSeries<Ex> = eisenstein(Classical::Delta, order);
    let m = minimal_mlde(&[delta], 12, 24).map_err(fail)?;
    let eq = &m.equation;
    if !(eq.order == 1 && eq.lead_weight == 0 && eq.g[0].coeff((0, 0)) == Ex::one() && eq.g[1].is_zero()) {
        return Err(format!("Delta: {}", eq.to_json(17)));
    }

    let tau_one = vec![
        LogQSeries::monomial(Mu::from_integer(0), 0, 1, Ex::one(), order as i64),
        LogQSeries::one(order as i64),
    ];
    let m = minimal_mlde(&tau_one, -1, 24).map_err(fail)?;
    let eq = &m.equation;
    let e4_over_144 = Ex::from_rational(&BigRational::new(1.into(), 144.into()));
    if !(eq.order == 2 && eq.lead_weight == 0 && eq.g[1].is_zero() && eq.g[2].coeff((1, 0)) == e4_over_144) {
        return Err(format!("(tau, 1): {}", eq.to_json(17)));
    }

    let e4: LogQSeries<Ex> = eisenstein(Classical::E4, order);
    for lead in [0, 2] {
        if !matches!(
            find_mlde(std::slice::from_ref(&e4), 4, 1, lead),
            Err(Error::NoSolution { .. })
        ) {
            return Err(format!("E4 admits an equation with leading weight {lead}"));
        }
    }
    let eq = find_mlde(&[e4], 4, 1, 4).map_err(fail)?;
    let third = Ex::from_rational(&BigRational::new(1.into(), 3.into()));
    check(
        eq.g[0].coeff((1, 0)) == Ex::one() && eq.g[1].coeff((0, 1)) == third,
        "D f = 0, D^2 f + E4/144 f = 0, E4 D f + E6/3 f = 0 exactly".into(),
    )
}

fn criterion_8() -> Outcome {
    let n_max = 2000;
    let delta: LogQSeries<Complex64> = eisenstein(Classical::Delta, n_max as usize + 1);
    let e4: LogQSeries<Complex64> = eisenstein(Classical::E4, n_max as usize + 1);
    let d = fit_fourier_growth(&delta, 12, true, n_max, 0.0).map_err(fail)?;
    let e = fit_fourier_growth(&e4, 4, false, n_max, 0.0).map_err(fail)?;
    check(
        (5.0..=6.2).contains(&d.exponent) && (2.8..=3.2).contains(&e.exponent),
        format!(
            "Delta slope {:.4} in [5.0, 6.2], E4 slope {:.4} in [2.8, 3.2]",
            d.exponent, e.exponent
        ),
    )
}

fn criterion_9() -> Outcome {
    type Ex = KappaPoly;
    let order = 40;
    let gens = vec![
        Weighted {
            weight: 0,
            components: vec![LogQSeries::<Ex>::one(order)],
        },
        Weighted {
            weight: 4,
            components: vec![eisenstein(Classical::E4, order as usize)],
        },
        Weighted {
            weight: 12,
            components: vec![eisenstein(Classical::Delta, order as usize)],
        },
    ];
    let mut samples = Vec::new();
    for k in 0..=24 {
        samples.push((k, module_rank(&gens, k, 2).map_err(fail)?));
    }
    let rows = hilbert_series_check(&[0], &samples).map_err(fail)?;
    let dims: Vec<usize> = rows
        .iter()
        .filter(|r| r.weight % 2 == 0)
        .map(|r| r.found)
        .collect();
    Ok(format!("dimensions for even k <= 24: {dims:?}"))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn outputs_3_to_5() -> String {
    [criterion_3().1, criterion_4().1, criterion_5().1].join("\n")
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n}: PASS ({d}; {secs:.1} s)"),
            Err(d) => {
                failed += 1;
                println!("criterion {n}: FAIL ({d}; {secs:.1} s)");
            }
        }
    };

    let t = Instant::now();
    report(1, t, criterion_1());
    let t = Instant::now();
    report(2, t, criterion_2());

    let t = Instant::now();
    let (c3, out3) = criterion_3();
    let secs = t.elapsed().as_secs_f64();
    let c3 = if secs >= 300.0 {
        c3.and_then(|d| Err(format!("{d}, over 300 s")))
    } else {
        c3
    };
    report(3, t, c3);
    let t = Instant::now();
    let (c4, out4) = criterion_4();
    report(4, t, c4);
    let t = Instant::now();
    let (c5, out5) = criterion_5();
    report(5, t, c5);

    let t = Instant::now();
    report(6, t, criterion_6());
    let t = Instant::now();
    report(7, t, criterion_7());
    let t = Instant::now();
    report(8, t, criterion_8());
    let t = Instant::now();
    report(9, t, criterion_9());

    let t = Instant::now();
    let first = [out3, out4, out5].join("\n");
    let again = outputs_3_to_5();
    let one = in_pool(1, outputs_3_to_5);
    let four = in_pool(4, outputs_3_to_5);
    report(
        10,
        t,
        check(
            !first.is_empty() && first == again && first == one && first == four,
            format!(
                "{} bytes; repeat, 1-thread and 4-thread runs identical",
                first.len()
            ),
        ),
    );

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
