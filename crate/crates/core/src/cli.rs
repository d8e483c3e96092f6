//! The `logvvmf` command line.
//!
//! Results go to stdout. A run manifest (command, effective config, versions
//! and wall time) goes to the file named by `--manifest`, or to stderr as one
//! JSON line. Exit codes: 0 success, 1 domain error or failed check, 2 usage.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Format, Overrides, RunConfig, PRECISION_ENV};
use crate::error::{Error, Result};
use crate::estimates;
use crate::io;
use crate::linalg::CMatrix;
use crate::logq::classical::{classical_coeffs, eisenstein, Classical};
use crate::logq::{KappaPoly, LogQSeries};
use crate::mlde;
use crate::poincare::{self, PoincareParams, SumForm};
use crate::poincare::{extract_coefficients, ExtractOptions};
use crate::rep::Representation;
use crate::sl2z::GammaElement;

#[derive(Debug, Parser)]
#[command(
    name = "logvvmf",
    version,
    about = "Logarithmic vector-valued modular forms toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON file with any of: precision, n_trunc, nq, seed, format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Significant digits in floating-point output.
    #[arg(long, global = true)]
    precision: Option<usize>,
    /// Seed for sampled estimates.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format; CSV is available for poincare-eval and poincare-qexp.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads for parallel sums (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct PoincareArgs {
    /// Representation file, or `trivial` / `standard`.
    #[arg(long, default_value = "trivial")]
    rep: String,
    /// Shifts nu_r, one per Jordan block.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    nu: Vec<i64>,
    /// Column weights k_1..k_p.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    k: Vec<i64>,
    /// Coset cutoff max(|c|, |d|) <= N.
    #[arg(long = "N")]
    n_trunc: Option<u64>,
    /// Sum over +-<T>\G (folded, needs rho(S^2) = +-I) or <T>\G (unfolded).
    #[arg(long, value_enum, default_value_t = FormArg::Auto)]
    form: FormArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormArg {
    Auto,
    Folded,
    Unfolded,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckCase {
    E8,
    Delta,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical word of a group element.
    Decompose {
        /// Entries a,b,c,d of the matrix (a, b; c, d).
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// rho(gamma) for a representation file.
    EvalRep {
        /// Representation file, or `trivial` / `standard`.
        #[arg(long)]
        rep: String,
        /// Entries a,b,c,d of the matrix (a, b; c, d).
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Truncated matrix Poincare series at one point.
    PoincareEval {
        #[command(flatten)]
        p: PoincareArgs,
        /// Point re,im in the upper half-plane.
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
    },
    /// Fitted logarithmic q-expansions of every matrix entry.
    PoincareQexp {
        #[command(flatten)]
        p: PoincareArgs,
        /// Number of q-orders fitted per entry.
        #[arg(long = "Nq")]
        nq: Option<usize>,
        /// Sampling heights Im(tau), comma separated.
        #[arg(long, value_delimiter = ',')]
        heights: Option<Vec<f64>>,
    },
    /// || rho(g) P(tau) - P(g tau) J(g, tau)^{-1} ||.
    VerifyModularity {
        #[command(flatten)]
        p: PoincareArgs,
        /// Point re,im in the upper half-plane.
        #[arg(long, allow_hyphen_values = true, default_value = "0,1.5")]
        tau: String,
        /// Entries a,b,c,d of the group element.
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// Minimal (or fixed-order) modular linear differential equation.
    MldeFind {
        /// JSON file with an array of series (or `{components: [...]}`).
        #[arg(long)]
        components: PathBuf,
        /// Weight of the input vector.
        #[arg(long, allow_negative_numbers = true)]
        weight: i64,
        /// Fix the order instead of searching for the least one.
        #[arg(long)]
        order: Option<usize>,
        /// Largest leading weight tried.
        #[arg(long = "max-lead", default_value_t = 24)]
        max_lead: u32,
        /// Solve in floating point even when the input is exact.
        #[arg(long)]
        float: bool,
    },
    /// Log-log slope of the Fourier coefficients.
    GrowthFit {
        /// Series file; alternatively use --classical.
        #[arg(long, conflicts_with = "classical")]
        series: Option<PathBuf>,
        /// Built-in series: e4, e6, delta or p.
        #[arg(long, required_unless_present = "series")]
        classical: Option<Classical>,
        /// Weight k used for the coefficient bound.
        #[arg(long, allow_negative_numbers = true)]
        weight: i64,
        /// Compare against the cusp-form bound (k + alpha) / 2.
        #[arg(long)]
        cuspidal: bool,
        /// Largest n used in the fit.
        #[arg(long = "n-max", default_value_t = 2000)]
        n_max: i64,
        /// Norm-growth exponent of the representation; taken from a fit when
        /// --rep is given.
        #[arg(long, conflicts_with = "rep")]
        alpha: Option<f64>,
        /// Representation whose norm growth sets alpha.
        #[arg(long)]
        rep: Option<String>,
    },
    /// Exhaustive word sweep plus sampled strip inequalities.
    CheckInequalities {
        /// Every element with entries in [-sweep, sweep] is decomposed.
        #[arg(long, default_value_t = 30)]
        sweep: i64,
        /// Random points and elements for the strip inequalities.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Poincare series of the trivial representation against classical forms.
    ClassicalCheck {
        #[arg(long = "case", value_enum)]
        case: CheckCase,
        /// Coset cutoff max(|c|, |d|) <= N.
        #[arg(long = "N")]
        n_trunc: Option<u64>,
        /// Number of q-orders fitted.
        #[arg(long = "Nq")]
        nq: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Decompose { .. } => "decompose",
            Command::EvalRep { .. } => "eval-rep",
            Command::PoincareEval { .. } => "poincare-eval",
            Command::PoincareQexp { .. } => "poincare-qexp",
            Command::VerifyModularity { .. } => "verify-modularity",
            Command::MldeFind { .. } => "mlde-find",
            Command::GrowthFit { .. } => "growth-fit",
            Command::CheckInequalities { .. } => "check-inequalities",
            Command::ClassicalCheck { .. } => "classical-check",
        }
    }
}

/// What a subcommand produced.
struct Outcome {
    body: String,
    /// False when a check ran but did not pass.
    passed: bool,
}

impl Outcome {
    fn json(v: Value) -> Self {
        Self::check(v, true)
    }

    fn check(v: Value, passed: bool) -> Self {
        let mut body = serde_json::to_string_pretty(&v).expect("serializable");
        body.push('\n');
        Self { body, passed }
    }
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let start = Instant::now();
    let env_precision = std::env::var(PRECISION_ENV).ok();
    let flags = Overrides {
        precision: cli.global.precision,
        seed: cli.global.seed,
        format: cli.global.format,
        ..Default::default()
    };
    let result = RunConfig::load(cli.global.config.as_deref(), env_precision.as_deref(), &flags)
        .map(|cfg| apply_command_overrides(&cli.command, cfg))
        .and_then(|cfg| with_threads(cli.global.threads, || dispatch(&cli.command, &cfg)).map(|o| (cfg, o)));
    let (code, cfg) = match result {
        Ok((cfg, outcome)) => {
            let _ = out.write_all(outcome.body.as_bytes());
            (if outcome.passed { 0 } else { 1 }, Some(cfg))
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            (1, None)
        }
    };
    let manifest = json!({
        "command": cli.command.name(),
        "argv": argv.iter().map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "config": cfg,
        "versions": {
            "logvvmf": env!("CARGO_PKG_VERSION"),
            "os": std::env::consts::OS,
            "arch": std::env::consts::ARCH,
        },
        "threads": cli.global.threads.unwrap_or_else(rayon::current_num_threads),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "exit_code": code,
    });
    match &cli.global.manifest {
        Some(path) => {
            if let Err(e) = std::fs::write(path, serde_json::to_string_pretty(&manifest).expect("json")) {
                let _ = writeln!(err, "error: cannot write manifest {}: {e}", path.display());
                return 1;
            }
        }
        None => {
            let _ = writeln!(err, "{manifest}");
        }
    }
    code
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(Error::InvalidInput("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(f),
    }
}

/// Folds subcommand flags that shadow config fields into the config, so the
/// manifest records the values actually used.
fn apply_command_overrides(cmd: &Command, mut cfg: RunConfig) -> RunConfig {
    let (n_trunc, nq) = match cmd {
        Command::PoincareEval { p, .. } | Command::VerifyModularity { p, .. } => (p.n_trunc, None),
        Command::PoincareQexp { p, nq, .. } => (p.n_trunc, *nq),
        Command::ClassicalCheck { n_trunc, nq, .. } => (*n_trunc, *nq),
        _ => (None, None),
    };
    cfg.n_trunc = n_trunc.unwrap_or(cfg.n_trunc);
    cfg.nq = nq.unwrap_or(cfg.nq);
    if cfg.format == Format::Csv && !matches!(cmd, Command::PoincareEval { .. } | Command::PoincareQexp { .. }) {
        log::warn!("CSV output is only available for poincare-eval and poincare-qexp; writing JSON");
    }
    cfg
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let digits = cfg.precision;
    match cmd {
        Command::Decompose { matrix } => {
            let g = parse_gamma(matrix)?;
            let w = g.eichler_decompose();
            Ok(Outcome::json(json!({
                "word": w.exponents.iter().map(io::bigint_json).collect::<Vec<_>>(),
                "length": w.length(),
                "sign": w.sign,
                "shift": io::bigint_json(&w.shift),
                "sign_alternation_ok": w.is_sign_valid(),
                "reconstruction_ok": w.reconstruct() == g,
            })))
        }
        Command::EvalRep { rep, matrix } => {
            let rho = load_rep(rep)?;
            let g = parse_gamma(matrix)?;
            Ok(Outcome::json(
                json!({ "matrix": matrix_json(&rho.evaluate(&g), digits) }),
            ))
        }
        Command::PoincareEval { p, tau } => {
            let (rho, params) = poincare_setup(p, cfg)?;
            let tau = parse_tau(tau)?;
            let threshold = poincare::warn_if_low_weight(&rho, &params);
            let s = poincare::poincare_eval(&rho, &params, tau)?;
            if cfg.format == Format::Csv {
                return Ok(Outcome {
                    body: matrix_csv(&s.value, digits),
                    passed: true,
                });
            }
            Ok(Outcome::json(json!({
                "tau": io::complex_json(s.tau, digits),
                "n_trunc": params.n_trunc,
                "folded": s.folded,
                "num_terms": s.num_terms,
                "tail_bound": io::format_real(s.tail_bound, digits),
                "weight_threshold_heuristic": threshold,
                "value": matrix_json(&s.value, digits),
            })))
        }
        Command::PoincareQexp { p, heights, .. } => {
            let (rho, params) = poincare_setup(p, cfg)?;
            poincare::warn_if_low_weight(&rho, &params);
            let mut opts = ExtractOptions::with_nq(cfg.nq);
            if let Some(h) = heights {
                opts.heights = h.clone();
            }
            let ex = extract_coefficients(&rho, &params, &opts)?;
            if cfg.format == Format::Csv {
                let mut body = String::from("row,col,j,n,exponent,re,im\n");
                for (m, row) in ex.series.iter().enumerate() {
                    for (n, s) in row.iter().enumerate() {
                        for line in s.to_csv(digits).lines().skip(1) {
                            let _ = writeln!(body, "{m},{n},{line}");
                        }
                    }
                }
                return Ok(Outcome { body, passed: true });
            }
            let series: Vec<Vec<Value>> = ex
                .series
                .iter()
                .map(|row| row.iter().map(|s| s.to_json(digits)).collect())
                .collect();
            Ok(Outcome::json(json!({
                "n_trunc": params.n_trunc,
                "nq": opts.nq,
                "heights": ex.heights,
                "samples_per_height": ex.samples_per_height,
                "fit_residual": io::format_real(ex.fit_residual, digits),
                "condition": io::format_real(ex.condition, digits),
                "noise_floor": io::format_real(ex.noise_floor, digits),
                "series": series,
            })))
        }
        Command::VerifyModularity { p, tau, gamma } => {
            let (rho, params) = poincare_setup(p, cfg)?;
            poincare::warn_if_low_weight(&rho, &params);
            let tau = parse_tau(tau)?;
            let g = parse_gamma(gamma)?;
            let r = poincare::modularity_residual(&rho, &params, &g, tau)?;
            Ok(Outcome::json(json!({
                "gamma": g.entries().iter().map(|x| io::bigint_json(x)).collect::<Vec<_>>(),
                "tau": io::complex_json(tau, digits),
                "n_trunc": params.n_trunc,
                "residual": io::format_real(r, digits),
            })))
        }
        Command::MldeFind {
            components,
            weight,
            order,
            max_lead,
            float,
        } => mlde_find(components, *weight, *order, *max_lead, *float, digits),
        Command::GrowthFit {
            series,
            classical,
            weight,
            cuspidal,
            n_max,
            alpha,
            rep,
        } => {
            let f: LogQSeries<Complex64> = match (series, classical) {
                (Some(path), _) => LogQSeries::from_json(&read_json(path)?)?,
                (None, Some(c)) => eisenstein(*c, (*n_max + 1).max(1) as usize),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let alpha = match (alpha, rep) {
                (Some(a), _) => *a,
                (None, Some(r)) => {
                    2.0 * estimates::fit_norm_growth(&load_rep(r)?, 1000, cfg.seed)
                        .k4
                        .max(0.0)
                }
                (None, None) => 0.0,
            };
            let fit = estimates::fit_fourier_growth(&f, *weight, *cuspidal, *n_max, alpha)?;
            let mut v = serde_json::to_value(&fit)?;
            v["alpha"] = json!(alpha);
            Ok(Outcome::json(v))
        }
        Command::CheckInequalities { sweep, samples } => {
            if *sweep < 1 {
                return Err(Error::InvalidInput("--sweep must be positive".into()));
            }
            let sw = estimates::eichler_sweep(*sweep);
            let strip = estimates::strip_checks(*samples, cfg.seed);
            let length = estimates::fit_eichler_length(1000, 10_000, cfg.seed);
            let passed = sw.passed() && strip.cd_failures == 0 && strip.im_failures == 0;
            Ok(Outcome::check(
                json!({
                    "sweep": sw,
                    "strip": strip,
                    "length_fit": length,
                    "length_fit_holds": length.holds(),
                    "passed": passed,
                }),
                passed,
            ))
        }
        Command::ClassicalCheck { case, .. } => classical_check(*case, cfg),
    }
}

fn mlde_find(
    path: &Path,
    weight: i64,
    order: Option<usize>,
    max_lead: u32,
    float: bool,
    digits: usize,
) -> Result<Outcome> {
    let v = read_json(path)?;
    let items = match &v {
        Value::Array(a) => a.clone(),
        Value::Object(o) => o
            .get("components")
            .and_then(Value::as_array)
            .cloned()
            .ok_or_else(|| {
                Error::InvalidInput("expected an array of series or {components: [...]}".into())
            })?,
        _ => return Err(Error::InvalidInput("expected an array of series".into())),
    };
    if !float {
        if let Ok(f) = items
            .iter()
            .map(LogQSeries::<KappaPoly>::from_json)
            .collect::<Result<Vec<_>>>()
        {
            return solve_mlde(&f, weight, order, max_lead, digits, "exact");
        }
        log::info!("components are not exact; solving in floating point");
    }
    let f = items
        .iter()
        .map(LogQSeries::<Complex64>::from_json)
        .collect::<Result<Vec<_>>>()?;
    solve_mlde(&f, weight, order, max_lead, digits, "float")
}

fn solve_mlde<C: crate::logq::Coeff>(
    f: &[LogQSeries<C>],
    weight: i64,
    order: Option<usize>,
    max_lead: u32,
    digits: usize,
    mode: &str,
) -> Result<Outcome> {
    let (eq, span) = match order {
        None => {
            let m = mlde::minimal_mlde(f, weight, max_lead)?;
            (m.equation, m.span)
        }
        Some(p) => {
            let mut found = None;
            for lead in (0..=max_lead).step_by(2) {
                match mlde::find_mlde(f, weight, p, lead) {
                    Ok(eq) => {
                        found = Some(eq);
                        break;
                    }
                    Err(Error::NoSolution { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            let eq = found.ok_or(Error::NoSolution {
                order: p,
                lead_weight: max_lead,
            })?;
            (eq, (0..f.len()).collect())
        }
    };
    let mut v = eq.to_json(digits);
    v["mode"] = json!(mode);
    v["span"] = json!(span);
    Ok(Outcome::json(v))
}

fn classical_check(case: CheckCase, cfg: &RunConfig) -> Result<Outcome> {
    let rho = Representation::trivial();
    let (nu, k, tol, name, min_nq) = match case {
        CheckCase::E8 => (0, 8, 1e-6, "e8", 3),
        CheckCase::Delta => (1, 12, 1e-4, "delta", 5),
    };
    let nq = cfg.nq.max(min_nq);
    let params = PoincareParams::new(vec![nu], vec![k], cfg.n_trunc);
    let ex = extract_coefficients(&rho, &params, &ExtractOptions::with_nq(nq))?;
    let f = &ex.series[0][0];
    let (expected, got): (Vec<f64>, Vec<f64>) = match case {
        CheckCase::E8 => {
            let e4: LogQSeries<Complex64> = eisenstein(Classical::E4, nq);
            let e8 = e4.mul(&e4)?;
            (1..nq as i64).map(|n| (e8.get(n, 0).re, f.get(n, 0).re)).unzip()
        }
        CheckCase::Delta => {
            let d = classical_coeffs(Classical::Delta, nq);
            let a1 = f.get(1, 0);
            if a1.norm() == 0.0 {
                return Err(Error::InsufficientData(
                    "extracted q^1 coefficient vanishes".into(),
                ));
            }
            (2..nq)
                .map(|n| {
                    use num_traits::ToPrimitive;
                    (d[n].to_f64().unwrap_or(f64::NAN), (f.get(n as i64, 0) / a1).re)
                })
                .unzip()
        }
    };
    let max_rel = expected
        .iter()
        .zip(&got)
        .map(|(e, g)| ((g - e) / e).abs())
        .fold(0.0, f64::max);
    let passed = max_rel <= tol;
    Ok(Outcome::check(
        json!({
            "case": name,
            "n_trunc": cfg.n_trunc,
            "nq": nq,
            "expected": expected,
            "extracted": got.iter().map(|x| io::format_real(*x, cfg.precision)).collect::<Vec<_>>(),
            "max_rel_error": io::format_real(max_rel, cfg.precision),
            "tolerance": tol,
            "passed": passed,
        }),
        passed,
    ))
}

fn poincare_setup(p: &PoincareArgs, cfg: &RunConfig) -> Result<(Representation, PoincareParams)> {
    let rho = load_rep(&p.rep)?;
    let mut params = PoincareParams::new(p.nu.clone(), p.k.clone(), cfg.n_trunc).with_form(match p.form {
        FormArg::Auto => SumForm::Auto,
        FormArg::Folded => SumForm::Folded,
        FormArg::Unfolded => SumForm::Unfolded,
    });
    params.precision = cfg.precision;
    params.check(&rho)?;
    Ok((rho, params))
}

fn load_rep(spec: &str) -> Result<Representation> {
    match spec {
        "trivial" => Ok(Representation::trivial()),
        "standard" => Ok(Representation::standard()),
        path => Representation::from_json(&read_json(Path::new(path))?),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_gamma(s: &str) -> Result<GammaElement> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::InvalidInput(format!("expected a,b,c,d but got {s:?}")));
    }
    let mut e = Vec::with_capacity(4);
    for p in parts {
        e.push(
            p.parse::<BigInt>()
                .map_err(|_| Error::InvalidInput(format!("{p:?} is not an integer")))?,
        );
    }
    let [a, b, c, d]: [BigInt; 4] = e.try_into().expect("four entries");
    GammaElement::new(a, b, c, d)
}

fn parse_tau(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::InvalidInput(format!("expected re,im but got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let re: f64 = parts[0].parse().map_err(|_| bad())?;
    let im: f64 = parts[1].parse().map_err(|_| bad())?;
    if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
        return Err(Error::InvalidInput(format!(
            "tau = {s} is not in the upper half plane"
        )));
    }
    Ok(Complex64::new(re, im))
}

fn matrix_json(m: &CMatrix, digits: usize) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|z| io::complex_json(*z, digits)).collect()))
            .collect(),
    )
}

fn matrix_csv(m: &CMatrix, digits: usize) -> String {
    let mut s = String::from("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = writeln!(
                s,
                "{i},{j},{},{}",
                io::format_real(z.re, digits),
                io::format_real(z.im, digits)
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("logvvmf").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn decompose_s() {
        let (code, out, err) = run_capture(&["decompose", "--matrix", "0,-1,1,0"]);
        assert_eq!(code, 0, "{err}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["word"], json!([0]));
        assert_eq!(v["reconstruction_ok"], json!(true));
        let manifest: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(manifest["command"], json!("decompose"));
    }

    #[test]
    fn usage_and_domain_errors() {
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["decompose"]).0, 2);
        assert_eq!(run_capture(&["decompose", "--matrix", "1,1,1,1"]).0, 1);
        assert_eq!(run_capture(&["decompose", "--matrix", "-1,0,0,-1"]).0, 0);
    }

    #[test]
    fn tau_and_gamma_parsing() {
        assert!(parse_tau("0.1,-1").is_err());
        assert_eq!(parse_tau("0.5, 2").unwrap(), Complex64::new(0.5, 2.0));
        assert!(parse_gamma("1,2,3").is_err());
        assert!(parse_gamma("1,x,0,1").is_err());
    }
}
