//! Small dense linear algebra over `Complex64` and over the Gaussian
//! rationals `Q(i)`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type CMatrix = DMatrix<Complex64>;
pub type GaussRational = Complex<BigRational>;

/// Max absolute entry.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn identity(p: usize) -> CMatrix {
    CMatrix::identity(p, p)
}

pub fn try_inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}

/// Singular values, largest first.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank with the threshold `sigma_max * rel_tol`.
pub fn numeric_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&0.0) => 0,
        Some(&smax) => s.iter().filter(|&&x| x > smax * rel_tol).count(),
    }
}

/// Kernel basis of `m` (columns are unknowns) using the threshold
/// `sigma_max * rel_tol`. Each returned vector has unit 2-norm.
pub fn numeric_kernel(m: &CMatrix, rel_tol: f64) -> Vec<Vec<Complex64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Pad with zero rows so the SVD yields a full right basis.
    let rows = m.nrows().max(n);
    let mut a = CMatrix::zeros(rows, n);
    a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0f64, |x, &y| x.max(y));
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if smax == 0.0 || s <= smax * rel_tol {
            out.push(v_t.row(i).iter().map(|z| z.conj()).collect());
        }
    }
    out
}

/// [`numeric_kernel`] after scaling every row and column to unit max norm.
///
/// The returned vectors are mapped back to the original unknowns, so they are
/// no longer unit vectors.
pub fn equilibrated_kernel(m: &CMatrix, rel_tol: f64) -> Vec<Vec<Complex64>> {
    let mut a = m.clone();
    for mut row in a.row_iter_mut() {
        let s = row.iter().fold(0.0f64, |x, z| x.max(z.norm()));
        if s > 0.0 {
            row /= Complex64::new(s, 0.0);
        }
    }
    let col_scale: Vec<f64> = a
        .column_iter()
        .map(|c| c.iter().fold(0.0f64, |x, z| x.max(z.norm())))
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    for (j, mut col) in a.column_iter_mut().enumerate() {
        col /= Complex64::new(col_scale[j], 0.0);
    }
    numeric_kernel(&a, rel_tol)
        .into_iter()
        .map(|v| v.iter().zip(&col_scale).map(|(x, s)| x / s).collect())
        .collect()
}

pub fn gauss_from_ratio(r: BigRational) -> GaussRational {
    Complex::new(r, BigRational::zero())
}

pub fn gauss_from_i64(n: i64) -> GaussRational {
    gauss_from_ratio(BigRational::from_integer(BigInt::from(n)))
}

pub fn gauss_to_c64(z: &GaussRational) -> Complex64 {
    use num_traits::ToPrimitive;
    Complex64::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn exact_rref(rows: &mut [Vec<GaussRational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r >= rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = GaussRational::one() / rows[r][col].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in col..ncols {
                    let delta = f.clone() * rows[r][j].clone();
                    rows[i][j] = rows[i][j].clone() - delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn exact_rank(rows: &[Vec<GaussRational>], ncols: usize) -> usize {
    let mut work = rows.to_vec();
    exact_rref(&mut work, ncols).len()
}

/// Exact kernel basis (one vector per free column).
pub fn exact_kernel(rows: &[Vec<GaussRational>], ncols: usize) -> Vec<Vec<GaussRational>> {
    let mut work: Vec<Vec<GaussRational>> = rows
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    let pivots = exact_rref(&mut work, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![GaussRational::zero(); ncols];
            v[f] = GaussRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -work[row][f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> GaussRational {
        gauss_from_ratio(BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn exact_kernel_of_rank_one() {
        // x + 2y - z = 0 twice
        let rows = vec![vec![q(1, 1), q(2, 1), q(-1, 1)], vec![q(2, 1), q(4, 1), q(-2, 1)]];
        let k = exact_kernel(&rows, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s = v[0].clone() + q(2, 1) * v[1].clone() - v[2].clone();
            assert!(s.is_zero());
        }
        assert_eq!(exact_rank(&rows, 3), 1);
    }

    #[test]
    fn numeric_kernel_matches_exact() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert_eq!(numeric_rank(&m, 1e-10), 2);
        let k = numeric_kernel(&m, 1e-10);
        assert_eq!(k.len(), 1);
        let v = nalgebra::DVector::from_vec(k[0].clone());
        assert!(max_norm(&CMatrix::from_column_slice(3, 1, (m * v).as_slice())) < 1e-12);
    }
}
