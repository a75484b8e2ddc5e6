//! Factorization-based kernels: linear solves, nullspaces, singular and eigen values.

use nalgebra::DVector;

use super::matrix::DenseMatrix;
use super::vector::norm2;
use crate::error::{Error, Result};

/// Relative pivot tolerance used to declare a square system singular.
pub const PIVOT_TOL: f64 = 1e-12;
/// Relative tolerance for rank decisions against the largest singular value.
pub const RANK_TOL: f64 = 1e-9;

/// Solves A x = b by LU with partial pivoting.
pub fn solve_linear(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve_linear needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side {}",
            a.rows(),
            b.len()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let lu = a.to_nalgebra().lu();
    let u = lu.u();
    if (0..n).any(|i| u[(i, i)].abs() <= PIVOT_TOL * scale) {
        return Err(Error::Singular);
    }
    let x = lu.solve(&DVector::from_column_slice(b)).ok_or(Error::Singular)?;
    let x: Vec<f64> = x.iter().copied().collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Full singular value decomposition A = U diag(s) Vᵀ with U (m×k), V (n×k), k = min(m,n).
/// Singular values are sorted in decreasing order.
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

pub fn svd(a: &DenseMatrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    let k = m.min(n);
    if k == 0 {
        return Svd {
            u: DenseMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        };
    }
    let dec = a.to_nalgebra().svd(true, true);
    let u = dec.u.expect("requested U");
    let vt = dec.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let mut uu = DenseMatrix::zeros(m, k);
    let mut vv = DenseMatrix::zeros(n, k);
    let mut s = Vec::with_capacity(k);
    for (c, &i) in order.iter().enumerate() {
        s.push(dec.singular_values[i]);
        for r in 0..m {
            uu[(r, c)] = u[(r, i)];
        }
        for r in 0..n {
            vv[(r, c)] = vt[(i, r)];
        }
    }
    Svd {
        u: uu,
        singular_values: s,
        v: vv,
    }
}

pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    svd(a).singular_values
}

/// ‖A‖₂, the largest singular value.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn rank(a: &DenseMatrix) -> usize {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > RANK_TOL * top).count()
}

/// Orthonormal basis (as columns) of {x : A x = 0}.
pub fn nullspace_basis(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return DenseMatrix::zeros(0, 0);
    }
    if m == 0 || a.max_abs() == 0.0 {
        return DenseMatrix::identity(n);
    }
    // Pad to at least n rows so the decomposition returns a complete V.
    let padded = if m < n {
        DenseMatrix::vstack(&[a, &DenseMatrix::zeros(n - m, n)], n)
    } else {
        a.clone()
    };
    let dec = svd(&padded);
    let top = dec.singular_values[0];
    let null: Vec<usize> = (0..n).filter(|&i| dec.singular_values[i] <= RANK_TOL * top).collect();
    dec.v.select_cols(&null)
}

/// Orthonormal basis of the column space of A.
pub fn range_basis(a: &DenseMatrix) -> DenseMatrix {
    if a.cols() == 0 || a.rows() == 0 || a.max_abs() == 0.0 {
        return DenseMatrix::zeros(a.rows(), 0);
    }
    let dec = svd(a);
    let top = dec.singular_values[0];
    let keep: Vec<usize> = (0..dec.singular_values.len())
        .filter(|&i| dec.singular_values[i] > RANK_TOL * top)
        .collect();
    dec.u.select_cols(&keep)
}

/// Minimum-norm least-squares solution of A x ≈ b via the pseudo-inverse.
pub fn lstsq_min_norm(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return vec![0.0; n];
    }
    let dec = svd(a);
    let top = dec.singular_values[0];
    let mut x = vec![0.0; n];
    if top == 0.0 {
        return x;
    }
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if s <= RANK_TOL * top {
            continue;
        }
        let coef: f64 = (0..a.rows()).map(|i| dec.u[(i, k)] * b[i]).sum::<f64>() / s;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * dec.v[(j, k)];
        }
    }
    x
}

/// Smallest singular value and the right/left singular vectors attaining it.
#[derive(Debug, Clone)]
pub struct SmallestSingular {
    pub value: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

pub fn smallest_singular_value(a: &DenseMatrix) -> Result<SmallestSingular> {
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "smallest_singular_value needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.cols();
    if n == 0 {
        return Ok(SmallestSingular {
            value: f64::INFINITY,
            right: Vec::new(),
            left: vec![0.0; a.rows()],
        });
    }
    let dec = svd(a);
    let k = n - 1;
    let right = dec.v.column(k);
    let mut left = dec.u.column(k);
    if norm2(&left) < 0.5 {
        // Zero singular value: any unit vector orthogonal to the range works.
        left = complete_unit_vector(&dec.u.select_cols(&(0..k).collect::<Vec<_>>()));
    }
    Ok(SmallestSingular {
        value: dec.singular_values[k],
        right,
        left,
    })
}

/// A unit vector orthogonal to the (orthonormal) columns of `q`.
fn complete_unit_vector(q: &DenseMatrix) -> Vec<f64> {
    let m = q.rows();
    let mut best = vec![0.0; m];
    let mut best_norm = -1.0;
    for e in 0..m {
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        for c in 0..q.cols() {
            let col = q.column(c);
            let d: f64 = col.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, ci) in v.iter_mut().zip(&col) {
                *vi -= d * ci;
            }
        }
        let nv = norm2(&v);
        if nv > best_norm {
            best_norm = nv;
            best = v;
        }
    }
    best.iter().map(|x| x / best_norm).collect()
}

fn check_symmetric(a: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("symmetric matrix must be square".into()));
    }
    let asym = a.asymmetry();
    if asym > 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Eigenvalues in increasing order with matching eigenvectors as columns.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    check_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), DenseMatrix::zeros(0, 0)));
    }
    let mut m = a.to_nalgebra();
    // Symmetrize exactly so roundoff in the input does not leak into the decomposition.
    let mt = m.transpose();
    m = (m + mt) * 0.5;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, c)] = eig.eigenvectors[(r, i)];
        }
    }
    Ok((values, vecs))
}

#[derive(Debug, Clone)]
pub struct EigenExtremes {
    pub lambda_min: f64,
    pub v_min: Vec<f64>,
    pub lambda_max: f64,
    pub v_max: Vec<f64>,
}

pub fn symmetric_eigen_extremes(a: &DenseMatrix) -> Result<EigenExtremes> {
    let (values, vecs) = symmetric_eigen(a)?;
    let n = values.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty matrix has no eigenvalues".into()));
    }
    Ok(EigenExtremes {
        lambda_min: values[0],
        v_min: vecs.column(0),
        lambda_max: values[n - 1],
        v_max: vecs.column(n - 1),
    })
}

/// Thin QR factorization A = Q R for rows ≥ cols.
pub fn qr_thin(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let qr = a.to_nalgebra().qr();
    (DenseMatrix::from_nalgebra(&qr.q()), DenseMatrix::from_nalgebra(&qr.r()))
}

pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve_linear(a, &e)?);
    }
    DenseMatrix::from_columns(&cols, n)
}

/// Greedy selection of a maximal linearly independent subset of the rows of A,
/// scanning rows in order (relative tolerance `RANK_TOL` on the residual norm).
pub fn independent_rows(a: &DenseMatrix) -> Vec<usize> {
    let scale = (0..a.rows()).map(|i| norm2(a.row(i))).fold(0.0f64, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut picked = Vec::new();
    if scale == 0.0 {
        return picked;
    }
    for i in 0..a.rows() {
        let mut r = a.row(i).to_vec();
        // Two passes of Gram-Schmidt for stability.
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= d * y;
                }
            }
        }
        let nr = norm2(&r);
        if nr > RANK_TOL * scale.max(norm2(a.row(i))) {
            basis.push(r.iter().map(|x| x / nr).collect());
            picked.push(i);
        }
    }
    picked
}
