//! Modular linear differential equations over the ring `C[Q, R]` with
//! `Q = E4` and `R = E6`.
//!
//! An equation of order `p` and leading weight `l` is
//! `(g_0 D^p + g_1 D^{p-1} + ... + g_p) F = 0` with `g_j` of weight `l + 2j`,
//! where `D^i` is the iterated modular derivative starting at weight `k`.
//! The coefficients of the `g_j` in the monomial basis are found as the
//! kernel of a linear system whose rows are the coefficients of
//! `q^n binom(tau, j)` in each component. In exact mode every row is further
//! split by powers of `kappa = 1/(2 pi i)`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::logq::classical::{eisenstein, Classical};
use crate::logq::{Coeff, LogQSeries};

/// Singular-value threshold relative to the largest one in float mode.
pub const RANK_TOL: f64 = 1e-10;

/// Extra equations demanded beyond the unknown count.
pub const EQUATION_MARGIN: usize = 10;

/// Monomials `Q^a R^b` with `4a + 6b = weight`, ordered by decreasing `a`.
/// Negative or odd weights give the empty list.
pub fn mform_basis(weight: i64) -> Vec<(u32, u32)> {
    if weight < 0 || weight % 2 != 0 {
        return Vec::new();
    }
    (0..=weight / 6)
        .filter(|b| (weight - 6 * b) % 4 == 0)
        .map(|b| (((weight - 6 * b) / 4) as u32, b as u32))
        .collect()
}

/// `dim M_k`.
pub fn mform_dim(weight: i64) -> usize {
    mform_basis(weight).len()
}

/// `sum_{w <= weight} dim M_w`.
pub fn mform_dim_upto(weight: i64) -> usize {
    (0..=weight.max(-1)).map(mform_dim).sum()
}

/// Products `E4^a E6^b` known through `q^{order-1}`, cached by exponent.
struct MonomialTable<C: Coeff> {
    order: usize,
    q: LogQSeries<C>,
    r: LogQSeries<C>,
    cache: BTreeMap<(u32, u32), LogQSeries<C>>,
}

impl<C: Coeff> MonomialTable<C> {
    fn new(order: usize) -> Self {
        Self {
            order,
            q: eisenstein(Classical::E4, order),
            r: eisenstein(Classical::E6, order),
            cache: BTreeMap::new(),
        }
    }

    fn get(&mut self, (a, b): (u32, u32)) -> LogQSeries<C> {
        if let Some(s) = self.cache.get(&(a, b)) {
            return s.clone();
        }
        let s = if a > 0 {
            self.get((a - 1, b)).mul(&self.q).expect("holomorphic factors")
        } else if b > 0 {
            self.get((0, b - 1)).mul(&self.r).expect("holomorphic factors")
        } else {
            LogQSeries::one(self.order as i64)
        };
        self.cache.insert((a, b), s.clone());
        s
    }
}

/// Element of `C[Q, R]` homogeneous of one weight.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedModularForm<C> {
    weight: i64,
    coeffs: BTreeMap<(u32, u32), C>,
}

impl<C: Coeff> GradedModularForm<C> {
    /// Rejects monomials whose weight differs from `weight`.
    pub fn new(weight: i64, coeffs: impl IntoIterator<Item = ((u32, u32), C)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((a, b), c) in coeffs {
            if 4 * a as i64 + 6 * b as i64 != weight {
                return Err(Error::InvalidInput(format!(
                    "monomial Q^{a} R^{b} does not have weight {weight}"
                )));
            }
            if !c.is_zero() {
                map.insert((a, b), c);
            }
        }
        Ok(Self { weight, coeffs: map })
    }

    pub fn zero(weight: i64) -> Self {
        Self {
            weight,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn coeff(&self, mono: (u32, u32)) -> C {
        self.coeffs.get(&mono).cloned().unwrap_or_else(C::zero)
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&(u32, u32), &C)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// q-expansion through `q^{order-1}`.
    pub fn to_series(&self, order: usize) -> LogQSeries<C> {
        let mut table = MonomialTable::new(order);
        self.series_with(&mut table)
    }

    fn series_with(&self, table: &mut MonomialTable<C>) -> LogQSeries<C> {
        let mut acc = LogQSeries::zero(crate::logq::Mu::from_integer(0), table.order as i64);
        for (&m, c) in &self.coeffs {
            acc = acc.add(&table.get(m).scalar_mul(c)).expect("same offset");
        }
        acc
    }

    pub fn scale(&self, c: &C) -> Self {
        Self {
            weight: self.weight,
            coeffs: self
                .coeffs
                .iter()
                .map(|(m, x)| (*m, x.clone() * c.clone()))
                .filter(|(_, x)| !x.is_zero())
                .collect(),
        }
    }

    /// Product with `Q^a R^b`.
    pub fn times_monomial(&self, (a, b): (u32, u32)) -> Self {
        Self {
            weight: self.weight + 4 * a as i64 + 6 * b as i64,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(x, y), c)| ((x + a, y + b), c.clone()))
                .collect(),
        }
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let monomials: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(&(a, b), c)| json!({ "Q": a, "R": b, "coeff": c.to_json(digits) }))
            .collect();
        json!({ "weight": self.weight, "monomials": monomials })
    }
}

/// A vector of series together with its weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Weighted<C> {
    pub weight: i64,
    pub components: Vec<LogQSeries<C>>,
}

/// `[F, D_k F, D_{k+2} D_k F, ...]` with `count` derivatives after `F`.
pub fn d_iterates<C: Coeff>(f: &[LogQSeries<C>], k: i64, count: usize) -> Result<Vec<Weighted<C>>> {
    let mut out = vec![Weighted {
        weight: k,
        components: f.to_vec(),
    }];
    for i in 0..count {
        let prev = &out[i];
        let next = prev
            .components
            .iter()
            .map(|c| c.modular_derivative(prev.weight))
            .collect::<Result<Vec<_>>>()?;
        out.push(Weighted {
            weight: prev.weight + 2,
            components: next,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlde<C> {
    pub order: usize,
    pub lead_weight: u32,
    pub base_weight: i64,
    /// `g_0, ..., g_p`.
    pub g: Vec<GradedModularForm<C>>,
    /// Equations in the linear system after splitting.
    pub equations: usize,
    /// Largest coefficient of `sum_j g_j D^{p-j} F`.
    pub residual: f64,
}

impl<C: Coeff> Mlde<C> {
    /// `sum_j g_j D^{p-j} F`, componentwise.
    pub fn apply(&self, f: &[LogQSeries<C>]) -> Result<Vec<LogQSeries<C>>> {
        let iters = d_iterates(f, self.base_weight, self.order)?;
        let order = min_order(&iters);
        let mut table = MonomialTable::new(series_len(&iters, order));
        let mut out: Vec<Option<LogQSeries<C>>> = vec![None; f.len()];
        for (j, gj) in self.g.iter().enumerate() {
            let gs = gj.series_with(&mut table);
            for (slot, comp) in out.iter_mut().zip(&iters[self.order - j].components) {
                let term = gs.mul(comp)?;
                *slot = Some(match slot.take() {
                    None => term,
                    Some(acc) => acc.add(&term)?,
                });
            }
        }
        Ok(out.into_iter().map(|s| s.expect("order >= 0")).collect())
    }

    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "order": self.order,
            "lead_weight": self.lead_weight,
            "base_weight": self.base_weight,
            "g": self.g.iter().map(|g| g.to_json(digits)).collect::<Vec<_>>(),
            "equations": self.equations,
            "residual": self.residual,
        })
    }
}

fn min_order<C: Coeff>(iters: &[Weighted<C>]) -> i64 {
    iters
        .iter()
        .flat_map(|w| w.components.iter().map(LogQSeries::order))
        .min()
        .unwrap_or(0)
}

/// Length of the `E4`, `E6` series needed so products stay known to `order`.
fn series_len<C: Coeff>(iters: &[Weighted<C>], order: i64) -> usize {
    let low = iters
        .iter()
        .flat_map(|w| w.components.iter().filter_map(LogQSeries::valuation))
        .min()
        .unwrap_or(0)
        .min(0);
    (order - low).max(0) as usize
}

/// Rows `coeff of q^n binom(tau, j)` in each component, one column per entry
/// of `columns` (each a vector of component series). Rows known to be zero
/// are dropped.
fn coefficient_rows<C: Coeff>(columns: &[Vec<LogQSeries<C>>]) -> Vec<Vec<C::Field>> {
    let ncomp = columns.first().map_or(0, Vec::len);
    let mut rows = Vec::new();
    for comp in 0..ncomp {
        let order = columns.iter().map(|c| c[comp].order()).min().unwrap_or(0);
        let keys: BTreeSet<(i64, usize)> = columns
            .iter()
            .flat_map(|c| c[comp].terms().map(|(k, _)| *k))
            .filter(|&(n, _)| n < order)
            .collect();
        for (n, j) in keys {
            let splits: Vec<Vec<C::Field>> = columns.iter().map(|c| c[comp].get(n, j).split()).collect();
            let width = splits.iter().map(Vec::len).max().unwrap_or(0);
            for s in 0..width {
                let row: Vec<C::Field> = splits
                    .iter()
                    .map(|v| v.get(s).cloned().unwrap_or_else(C::field_zero))
                    .collect();
                if row.iter().any(|x| !C::field_is_zero(x)) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

/// Number of coefficient positions `(component, n)` known in `f`.
fn known_positions<C: Coeff>(f: &[Weighted<C>]) -> usize {
    let order = min_order(f);
    let Some(first) = f.first() else { return 0 };
    first
        .components
        .iter()
        .map(|c| (order - c.valuation().unwrap_or(0).min(0)).max(0) as usize)
        .sum()
}

fn rank_of<C: Coeff>(rows: &[Vec<C::Field>], ncols: usize) -> usize {
    ncols - C::kernel(rows, ncols, RANK_TOL).len()
}

/// Searches for an equation of order `p` whose leading coefficient has
/// weight exactly `lead`.
pub fn find_mlde<C: Coeff>(f: &[LogQSeries<C>], k: i64, p: usize, lead: u32) -> Result<Mlde<C>> {
    if f.is_empty() {
        return Err(Error::InvalidInput("no components".into()));
    }
    let iters = d_iterates(f, k, p)?;
    let weights: Vec<i64> = (0..=p).map(|j| lead as i64 + 2 * j as i64).collect();
    let bases: Vec<Vec<(u32, u32)>> = weights.iter().map(|&w| mform_basis(w)).collect();
    let unknowns: usize = bases.iter().map(Vec::len).sum();
    let required = (p + 1) * mform_dim_upto(lead as i64) + EQUATION_MARGIN;
    let available = known_positions(&iters);
    if available < required {
        return Err(Error::InsufficientData(format!(
            "{available} coefficient positions known, {required} required for order {p} and leading weight {lead}"
        )));
    }
    if bases[0].is_empty() {
        return Err(Error::NoSolution {
            order: p,
            lead_weight: lead,
        });
    }

    let order = min_order(&iters);
    let mut table = MonomialTable::new(series_len(&iters, order));
    let mut columns: Vec<Vec<LogQSeries<C>>> = Vec::with_capacity(unknowns);
    for (j, basis) in bases.iter().enumerate() {
        for &m in basis {
            let ms = table.get(m);
            let col = iters[p - j]
                .components
                .iter()
                .map(|c| ms.mul(c))
                .collect::<Result<Vec<_>>>()?;
            columns.push(col);
        }
    }
    let rows = coefficient_rows(&columns);
    let kernel = C::kernel(&rows, unknowns, RANK_TOL);
    match kernel.len() {
        0 => Err(Error::NoSolution {
            order: p,
            lead_weight: lead,
        }),
        1 => {
            let x = &kernel[0];
            let mut g = Vec::with_capacity(p + 1);
            let mut pos = 0;
            for (w, basis) in weights.iter().zip(&bases) {
                let coeffs = basis
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| (m, C::from_field(&x[pos + i])));
                g.push(GradedModularForm::new(*w, coeffs)?);
                pos += basis.len();
            }
            let scale = leading_coefficient(&g[0], &mut table).ok_or(Error::NoSolution {
                order: p,
                lead_weight: lead,
            })?;
            let g: Vec<_> = g.iter().map(|gj| gj.scale(&scale)).collect();
            let mut eq = Mlde {
                order: p,
                lead_weight: lead,
                base_weight: k,
                g,
                equations: rows.len(),
                residual: 0.0,
            };
            eq.residual = eq
                .apply(f)?
                .iter()
                .map(LogQSeries::max_abs_coeff)
                .fold(0.0, f64::max);
            Ok(eq)
        }
        dim => Err(Error::AmbiguousKernel {
            order: p,
            lead_weight: lead,
            dim,
            kernel: kernel
                .iter()
                .map(|v| v.iter().map(C::field_to_c64).collect())
                .collect(),
        }),
    }
}

/// Reciprocal of the first nonzero q-coefficient of `g`, if any.
fn leading_coefficient<C: Coeff>(g: &GradedModularForm<C>, table: &mut MonomialTable<C>) -> Option<C> {
    let s = g.series_with(table);
    let scale = s.max_abs_coeff();
    let (_, c) = s.terms().find(|(_, c)| {
        if C::EXACT {
            !c.is_zero()
        } else {
            c.magnitude() > 1e-12 * scale
        }
    })?;
    let parts = c.split();
    // the monomials have rational q-expansions, so the coefficient lies in the field
    let lead = parts.first()?;
    Some(C::from_field(&C::field_div(&first_field_one::<C>(), lead)))
}

fn first_field_one<C: Coeff>() -> C::Field {
    C::one().split().into_iter().next().expect("one is nonzero")
}

/// Indices of a maximal linearly independent subset of the components, chosen
/// greedily in order.
pub fn independent_components<C: Coeff>(f: &[LogQSeries<C>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..f.len() {
        let mut trial = chosen.clone();
        trial.push(i);
        let columns: Vec<Vec<LogQSeries<C>>> = trial.iter().map(|&t| vec![f[t].clone()]).collect();
        let rows = coefficient_rows(&columns);
        if rank_of::<C>(&rows, trial.len()) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

/// Result of [`minimal_mlde`], recording which components were kept.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalMlde<C> {
    pub equation: Mlde<C>,
    /// Indices of the independent components the equation was computed for.
    pub span: Vec<usize>,
}

/// Least order, then least leading weight up to `max_lead`. Dependent
/// components are first reduced to an independent subset.
pub fn minimal_mlde<C: Coeff>(f: &[LogQSeries<C>], k: i64, max_lead: u32) -> Result<MinimalMlde<C>> {
    let span = independent_components(f);
    if span.is_empty() {
        return Err(Error::InvalidInput("all components vanish".into()));
    }
    let reduced: Vec<LogQSeries<C>> = span.iter().map(|&i| f[i].clone()).collect();
    let p = reduced.len();
    for order in p..=p + 1 {
        for lead in (0..=max_lead).step_by(2) {
            match find_mlde(&reduced, k, order, lead) {
                Ok(equation) => return Ok(MinimalMlde { equation, span }),
                Err(Error::NoSolution { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::NoSolution {
        order: p + 1,
        lead_weight: max_lead,
    })
}

/// Coefficient of `t^k` in `sum_j t^{k_j} / ((1 - t^4)(1 - t^6))`.
pub fn hilbert_coefficient(generator_weights: &[i64], k: i64) -> usize {
    generator_weights.iter().map(|&w| mform_dim(k - w)).sum()
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HilbertRow {
    pub weight: i64,
    pub expected: usize,
    pub found: usize,
}

/// Compares measured dimensions `(k, dim)` with the series of a claimed free
/// basis and fails at the first disagreement.
pub fn hilbert_series_check(generator_weights: &[i64], samples: &[(i64, usize)]) -> Result<Vec<HilbertRow>> {
    let mut rows = Vec::with_capacity(samples.len());
    for &(weight, found) in samples {
        let expected = hilbert_coefficient(generator_weights, weight);
        if expected != found {
            return Err(Error::Mismatch {
                weight,
                expected,
                found,
            });
        }
        rows.push(HilbertRow {
            weight,
            expected,
            found,
        });
    }
    Ok(rows)
}

/// Rank of the family `m D^i G` of weight `k`, where `G` runs over the given
/// weighted generators, `i <= max_derivs` and `m` over monomials of the
/// complementary weight. For a spanning set of generators this is the
/// dimension of the weight-`k` piece of the module they generate.
pub fn module_rank<C: Coeff>(generators: &[Weighted<C>], k: i64, max_derivs: usize) -> Result<usize> {
    let mut columns: Vec<Vec<LogQSeries<C>>> = Vec::new();
    for gen in generators {
        let iters = d_iterates(&gen.components, gen.weight, max_derivs)?;
        let order = min_order(&iters);
        let mut table = MonomialTable::new(series_len(&iters, order));
        for it in &iters {
            for m in mform_basis(k - it.weight) {
                let ms = table.get(m);
                columns.push(
                    it.components
                        .iter()
                        .map(|c| ms.mul(c))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
        }
    }
    if columns.is_empty() {
        return Ok(0);
    }
    let ncomp = columns[0].len();
    if columns.iter().any(|c| c.len() != ncomp) {
        return Err(Error::InvalidInput(
            "generators have different numbers of components".into(),
        ));
    }
    let rows = coefficient_rows(&columns);
    Ok(rank_of::<C>(&rows, columns.len()))
}

/// Weight-`k` float coefficients for display.
pub fn to_c64_form<C: Coeff>(g: &GradedModularForm<C>) -> GradedModularForm<Complex64> {
    GradedModularForm {
        weight: g.weight,
        coeffs: g.coeffs.iter().map(|(m, c)| (*m, c.to_c64())).collect(),
    }
}
