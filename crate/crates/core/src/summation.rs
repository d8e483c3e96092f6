//! Compensated accumulation with a fixed reduction order.
//!
//! Terms are split into chunks of a fixed size independent of the thread
//! count; each chunk is accumulated sequentially with Neumaier's correction
//! and the chunk partials are combined by a pairwise tree over chunk indices.
//! The result is therefore bit-identical for any number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::CMatrix;

/// Neumaier-compensated running sum of `f64`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Entrywise compensated accumulator for `p x q` complex matrices.
#[derive(Clone, Debug)]
pub struct MatrixAccumulator {
    rows: usize,
    cols: usize,
    re: Vec<Neumaier>,
    im: Vec<Neumaier>,
}

impl MatrixAccumulator {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            re: vec![Neumaier::default(); rows * cols],
            im: vec![Neumaier::default(); rows * cols],
        }
    }

    pub fn add(&mut self, m: &CMatrix) {
        debug_assert_eq!((m.nrows(), m.ncols()), (self.rows, self.cols));
        for j in 0..self.cols {
            for i in 0..self.rows {
                let z = m[(i, j)];
                let k = j * self.rows + i;
                self.re[k].add(z.re);
                self.im[k].add(z.im);
            }
        }
    }

    pub fn merge(&mut self, other: &MatrixAccumulator) {
        for k in 0..self.re.len() {
            self.re[k].merge(&other.re[k]);
            self.im[k].merge(&other.im[k]);
        }
    }

    pub fn value(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let k = j * self.rows + i;
            Complex64::new(self.re[k].value(), self.im[k].value())
        })
    }
}

pub const CHUNK: usize = 256;

/// Sum `f(item)` over `items` in the fixed chunked/pairwise order.
pub fn deterministic_sum<T, F>(items: &[T], rows: usize, cols: usize, parallel: bool, f: F) -> CMatrix
where
    T: Sync,
    F: Fn(&T) -> CMatrix + Sync,
{
    let chunk_sum = |chunk: &[T]| {
        let mut acc = MatrixAccumulator::new(rows, cols);
        for it in chunk {
            acc.add(&f(it));
        }
        acc
    };
    let partials: Vec<MatrixAccumulator> = if parallel {
        items.par_chunks(CHUNK).map(chunk_sum).collect()
    } else {
        items.chunks(CHUNK).map(chunk_sum).collect()
    };
    pairwise_reduce(partials)
        .map(|a| a.value())
        .unwrap_or_else(|| CMatrix::zeros(rows, cols))
}

/// Combine partials pairwise: `((0+1)+(2+3))+...` over the index order.
pub fn pairwise_reduce(mut parts: Vec<MatrixAccumulator>) -> Option<MatrixAccumulator> {
    if parts.is_empty() {
        return None;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.merge(&b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop()
}
